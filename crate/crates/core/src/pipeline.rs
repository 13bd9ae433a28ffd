//! End-to-end embedding: voxel grid → adjacency graph → Laplacian →
//! eigenvectors → planar layout → intensity image.

use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::eigen::{smallest_nontrivial_pairs, EigenError, SolveSettings};
use crate::graph::{bridge_components, build_adjacency_graph, Connectivity, GraphError};
use crate::image_io::ImageWriteSettings;
use crate::layout::{rasterize, spectral_layout, EmbeddedImage, LayoutError};
use crate::mesh::Mesh;
use crate::sparse::laplacian;
use crate::voxel::{normalize_mesh, voxelize_surface, VoxelError, VoxelGrid, DEFAULT_RESOLUTION};

pub const DEFAULT_DIM: usize = 144;

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("voxel grid has no occupied voxels")]
    EmptyGrid,
    #[error(transparent)]
    Voxel(#[from] VoxelError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Eigen(#[from] EigenError),
    #[error(transparent)]
    Layout(#[from] LayoutError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineConfig {
    /// Voxel grid resolution for mesh inputs.
    pub resolution: usize,
    pub connectivity: Connectivity,
    /// Side length of the output image in pixels.
    pub dim: usize,
    /// Fill enclosed interiors before building the graph.
    pub fill: bool,
    pub solve: SolveSettings,
    pub write: ImageWriteSettings,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            resolution: DEFAULT_RESOLUTION,
            connectivity: Connectivity::Six,
            dim: DEFAULT_DIM,
            fill: false,
            solve: SolveSettings::default(),
            write: ImageWriteSettings::default(),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), EmbedError> {
        if self.dim == 0 {
            return Err(EmbedError::Config("dim must be at least 1".into()));
        }
        if self.resolution == 0 {
            return Err(EmbedError::Config("resolution must be at least 1".into()));
        }
        self.solve.validate()?;
        self.write
            .validate()
            .map_err(|e| EmbedError::Config(e.to_string()))?;
        Ok(())
    }
}

/// Wall-clock milliseconds per stage.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct StageTimings {
    pub voxelize_ms: f64,
    pub graph_ms: f64,
    pub laplacian_ms: f64,
    pub eigen_ms: f64,
    pub layout_ms: f64,
}

/// Diagnostics for one embedding. Field order is the serialized key order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmbedReport {
    pub node_count: usize,
    /// Adjacency edges, not counting bridges.
    pub edge_count: usize,
    pub bridges_added: usize,
    pub lambda2: Option<f64>,
    pub lambda3: Option<f64>,
    pub solver_iterations: usize,
    pub max_residual: f64,
    pub dim: usize,
    pub mass: f64,
    pub collision_count: usize,
    pub timings: StageTimings,
}

impl EmbedReport {
    /// The report with timing fields zeroed, for reproducibility checks.
    pub fn without_timings(&self) -> Self {
        Self {
            timings: StageTimings::default(),
            ..self.clone()
        }
    }
}

fn millis(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

/// Embed a voxel grid as a `dim`×`dim` image.
pub fn embed_grid(grid: &VoxelGrid, config: &PipelineConfig) -> Result<(EmbeddedImage, EmbedReport), EmbedError> {
    config.validate()?;
    let mut timings = StageTimings::default();

    let start = Instant::now();
    let filled;
    let grid = if config.fill {
        filled = grid.fill_interior();
        &filled
    } else {
        grid
    };
    if grid.is_empty() {
        return Err(EmbedError::EmptyGrid);
    }
    timings.voxelize_ms = millis(start);

    let start = Instant::now();
    let adjacency = build_adjacency_graph(grid, config.connectivity)?;
    let (graph, bridges_added) = bridge_components(&adjacency);
    timings.graph_ms = millis(start);

    let start = Instant::now();
    let lap = laplacian(&graph);
    timings.laplacian_ms = millis(start);

    let n = graph.node_count();
    let start = Instant::now();
    let (u2, u3, lambda2, lambda3, iterations, max_residual) = match n {
        1 => (vec![0.0], vec![0.0], None, None, 0, 0.0),
        // only one nontrivial eigenvector exists; the y axis collapses
        2 => {
            let s = smallest_nontrivial_pairs(&lap, 1, &config.solve)?;
            let pair = &s.pairs[0];
            (pair.vector.clone(), vec![0.0; 2], Some(pair.value), None, s.iterations, s.residuals[0])
        }
        _ => {
            let s = smallest_nontrivial_pairs(&lap, 2, &config.solve)?;
            let worst = s.residuals.iter().copied().fold(0.0, f64::max);
            let [a, b] = [&s.pairs[0], &s.pairs[1]];
            (
                a.vector.clone(),
                b.vector.clone(),
                Some(a.value),
                Some(b.value),
                s.iterations,
                worst,
            )
        }
    };
    timings.eigen_ms = millis(start);

    let start = Instant::now();
    let coords = spectral_layout(&u2, &u3)?;
    let raster = rasterize(&coords, graph.values(), config.dim)?;
    timings.layout_ms = millis(start);

    let report = EmbedReport {
        node_count: n,
        edge_count: adjacency.edge_count(),
        bridges_added,
        lambda2,
        lambda3,
        solver_iterations: iterations,
        max_residual,
        dim: config.dim,
        mass: grid.mass(),
        collision_count: raster.collision_count,
        timings,
    };
    log::debug!(
        "embedded {} nodes ({} bridges) in {:.1} ms of eigensolve",
        n,
        bridges_added,
        report.timings.eigen_ms
    );
    Ok((raster.image, report))
}

/// Normalize and surface-voxelize a mesh at `config.resolution`, then embed.
pub fn embed_mesh(mesh: &Mesh, config: &PipelineConfig) -> Result<(EmbeddedImage, EmbedReport), EmbedError> {
    config.validate()?;
    let start = Instant::now();
    if mesh.faces.is_empty() {
        return Err(VoxelError::NoFaces.into());
    }
    let grid = voxelize_surface(&normalize_mesh(mesh)?, config.resolution)?;
    let voxelize_ms = millis(start);
    let (image, mut report) = embed_grid(&grid, config)?;
    report.timings.voxelize_ms += voxelize_ms;
    Ok((image, report))
}
