//! Sparse voxel grids, surface voxelization of triangle meshes and the
//! plain-text voxel format.

use std::collections::{BTreeMap, VecDeque};
use std::fmt::Write as _;

use thiserror::Error;

use crate::mesh::Mesh;

pub const DEFAULT_RESOLUTION: usize = 32;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VoxelError {
    #[error("degenerate mesh extent")]
    DegenerateExtent,
    #[error("mesh has no vertices")]
    NoVertices,
    #[error("mesh has no faces")]
    NoFaces,
    #[error("resolution must be at least 1")]
    ZeroResolution,
    #[error("coordinate out of range: ({x}, {y}, {z}) with resolution {resolution}")]
    CoordinateOutOfRange {
        x: i64,
        y: i64,
        z: i64,
        resolution: usize,
    },
    #[error("voxel value must be positive and finite, got {0}")]
    NonPositiveValue(f64),
    #[error("line {line}: non-numeric token `{token}`")]
    NonNumeric { line: usize, token: String },
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
}

/// Sparse R×R×R grid. Only voxels with a positive value are stored, keyed by
/// integer coordinate; iteration order is lexicographic in `(x, y, z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct VoxelGrid {
    resolution: usize,
    voxels: BTreeMap<[u32; 3], f64>,
}

impl VoxelGrid {
    pub fn new(resolution: usize) -> Result<Self, VoxelError> {
        if resolution == 0 {
            return Err(VoxelError::ZeroResolution);
        }
        Ok(Self {
            resolution,
            voxels: BTreeMap::new(),
        })
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn len(&self) -> usize {
        self.voxels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.voxels.is_empty()
    }

    pub fn get(&self, coord: [u32; 3]) -> Option<f64> {
        self.voxels.get(&coord).copied()
    }

    pub fn contains(&self, coord: [u32; 3]) -> bool {
        self.voxels.contains_key(&coord)
    }

    /// Occupied voxels in lexicographic coordinate order.
    pub fn iter(&self) -> impl Iterator<Item = ([u32; 3], f64)> + '_ {
        self.voxels.iter().map(|(&c, &v)| (c, v))
    }

    /// Total voxel value.
    pub fn mass(&self) -> f64 {
        self.voxels.values().sum()
    }

    /// Add `value` to the voxel at `coord`, creating it if absent.
    pub fn add(&mut self, coord: [i64; 3], value: f64) -> Result<(), VoxelError> {
        if !(value > 0.0 && value.is_finite()) {
            return Err(VoxelError::NonPositiveValue(value));
        }
        let key = self.checked(coord)?;
        *self.voxels.entry(key).or_insert(0.0) += value;
        Ok(())
    }

    /// Set the voxel at `coord` to `value`, replacing any previous value.
    pub fn set(&mut self, coord: [i64; 3], value: f64) -> Result<(), VoxelError> {
        if !(value > 0.0 && value.is_finite()) {
            return Err(VoxelError::NonPositiveValue(value));
        }
        let key = self.checked(coord)?;
        self.voxels.insert(key, value);
        Ok(())
    }

    fn checked(&self, [x, y, z]: [i64; 3]) -> Result<[u32; 3], VoxelError> {
        let r = self.resolution as i64;
        if [x, y, z].iter().any(|&c| c < 0 || c >= r) {
            return Err(VoxelError::CoordinateOutOfRange {
                x,
                y,
                z,
                resolution: self.resolution,
            });
        }
        Ok([x as u32, y as u32, z as u32])
    }

    /// Mark every empty voxel not reachable from the grid boundary through
    /// face-adjacent empty voxels as occupied with value 1.0.
    pub fn fill_interior(&self) -> VoxelGrid {
        let r = self.resolution;
        let idx = |x: usize, y: usize, z: usize| (x * r + y) * r + z;
        let mut exterior = vec![false; r * r * r];
        let mut queue = VecDeque::new();
        for x in 0..r {
            for y in 0..r {
                for z in 0..r {
                    let on_boundary =
                        x == 0 || y == 0 || z == 0 || x == r - 1 || y == r - 1 || z == r - 1;
                    if on_boundary && !self.contains([x as u32, y as u32, z as u32]) {
                        exterior[idx(x, y, z)] = true;
                        queue.push_back([x, y, z]);
                    }
                }
            }
        }
        while let Some([x, y, z]) = queue.pop_front() {
            for (dx, dy, dz) in FACE_OFFSETS {
                let (nx, ny, nz) = (x as i64 + dx, y as i64 + dy, z as i64 + dz);
                if [nx, ny, nz].iter().any(|&c| c < 0 || c >= r as i64) {
                    continue;
                }
                let (nx, ny, nz) = (nx as usize, ny as usize, nz as usize);
                let i = idx(nx, ny, nz);
                if !exterior[i] && !self.contains([nx as u32, ny as u32, nz as u32]) {
                    exterior[i] = true;
                    queue.push_back([nx, ny, nz]);
                }
            }
        }
        let mut filled = self.clone();
        for x in 0..r {
            for y in 0..r {
                for z in 0..r {
                    let key = [x as u32, y as u32, z as u32];
                    if !exterior[idx(x, y, z)] && !filled.contains(key) {
                        filled.voxels.insert(key, 1.0);
                    }
                }
            }
        }
        filled
    }
}

const FACE_OFFSETS: [(i64, i64, i64); 6] = [
    (-1, 0, 0),
    (1, 0, 0),
    (0, -1, 0),
    (0, 1, 0),
    (0, 0, -1),
    (0, 0, 1),
];

/// Translate and uniformly scale `mesh` so its bounding box is centered in
/// the unit cube with its longest side equal to 1.
pub fn normalize_mesh(mesh: &Mesh) -> Result<Mesh, VoxelError> {
    let (lo, hi) = mesh.bounds().ok_or(VoxelError::NoVertices)?;
    let extent = (0..3).map(|k| hi[k] - lo[k]).fold(0.0, f64::max);
    if extent.is_nan() || extent <= 0.0 || !extent.is_finite() {
        return Err(VoxelError::DegenerateExtent);
    }
    let scale = 1.0 / extent;
    let mut offset = [0.0; 3];
    for k in 0..3 {
        let side = (hi[k] - lo[k]) * scale;
        offset[k] = 0.5 * (1.0 - side);
    }
    let vertices = mesh
        .vertices
        .iter()
        .map(|v| {
            let mut out = [0.0; 3];
            for k in 0..3 {
                out[k] = (v[k] - lo[k]) * scale + offset[k];
            }
            out
        })
        .collect();
    Ok(Mesh {
        vertices,
        faces: mesh.faces.clone(),
    })
}

/// Mark every voxel whose closed cube intersects at least one triangle.
/// The mesh is expected to live in the unit cube; geometry outside it is
/// clipped to the grid.
pub fn voxelize_surface(mesh: &Mesh, resolution: usize) -> Result<VoxelGrid, VoxelError> {
    if resolution == 0 {
        return Err(VoxelError::ZeroResolution);
    }
    if mesh.faces.is_empty() {
        return Err(VoxelError::NoFaces);
    }
    let mut grid = VoxelGrid::new(resolution)?;
    let r = resolution as f64;
    let max_index = resolution as i64 - 1;
    for f in 0..mesh.face_count() {
        // work in voxel units so cube corners are integers
        let tri = mesh.triangle(f).map(|p| [p[0] * r, p[1] * r, p[2] * r]);
        let mut range = [(0i64, 0i64); 3];
        for k in 0..3 {
            let lo = tri.iter().map(|p| p[k]).fold(f64::INFINITY, f64::min);
            let hi = tri.iter().map(|p| p[k]).fold(f64::NEG_INFINITY, f64::max);
            // a voxel [i, i+1] touches [lo, hi] iff i <= hi and i + 1 >= lo
            let first = ((lo - 1.0).ceil() as i64).max(0);
            let last = (hi.floor() as i64).min(max_index);
            range[k] = (first, last);
        }
        for x in range[0].0..=range[0].1 {
            for y in range[1].0..=range[1].1 {
                for z in range[2].0..=range[2].1 {
                    let center = [x as f64 + 0.5, y as f64 + 0.5, z as f64 + 0.5];
                    if triangle_box_overlap(center, 0.5, &tri) {
                        grid.set([x, y, z], 1.0)?;
                    }
                }
            }
        }
    }
    Ok(grid)
}

/// Separating-axis test between a triangle and an axis-aligned cube with the
/// given center and half side. Touching counts as overlap.
pub fn triangle_box_overlap(center: [f64; 3], half: f64, tri: &[[f64; 3]; 3]) -> bool {
    let v = tri.map(|p| sub(p, center));
    let e = [sub(v[1], v[0]), sub(v[2], v[1]), sub(v[0], v[2])];

    // axes: cross products of box axes with triangle edges
    for edge in &e {
        for axis_index in 0..3 {
            let mut axis = [0.0; 3];
            axis[axis_index] = 1.0;
            let a = cross(axis, *edge);
            if separated_on(a, &v, half) {
                return false;
            }
        }
    }
    // box face normals
    for k in 0..3 {
        let lo = v.iter().map(|p| p[k]).fold(f64::INFINITY, f64::min);
        let hi = v.iter().map(|p| p[k]).fold(f64::NEG_INFINITY, f64::max);
        if lo > half || hi < -half {
            return false;
        }
    }
    // triangle plane
    let normal = cross(e[0], e[1]);
    !separated_on(normal, &v, half)
}

fn separated_on(axis: [f64; 3], v: &[[f64; 3]; 3], half: f64) -> bool {
    if axis == [0.0; 3] {
        return false;
    }
    let p = v.map(|q| dot(axis, q));
    let lo = p.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let radius = half * (axis[0].abs() + axis[1].abs() + axis[2].abs());
    lo > radius || hi < -radius
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Parse the text voxel format: a resolution line followed by `x y z v`
/// lines. Repeated coordinates accumulate. `#` starts a comment.
pub fn parse_voxel_text(text: &str) -> Result<VoxelGrid, VoxelError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let (line, first) = lines.next().ok_or(VoxelError::Malformed {
        line: 1,
        msg: "missing resolution line".into(),
    })?;
    let resolution: usize = first.parse().map_err(|_| VoxelError::NonNumeric {
        line,
        token: first.to_string(),
    })?;
    let mut grid = VoxelGrid::new(resolution).map_err(|_| VoxelError::Malformed {
        line,
        msg: "resolution must be at least 1".into(),
    })?;
    for (line, content) in lines {
        let tokens: Vec<&str> = content.split_whitespace().collect();
        if tokens.len() != 4 {
            return Err(VoxelError::Malformed {
                line,
                msg: format!("expected `x y z v`, found {} fields", tokens.len()),
            });
        }
        let mut coord = [0i64; 3];
        for k in 0..3 {
            coord[k] = tokens[k].parse().map_err(|_| VoxelError::NonNumeric {
                line,
                token: tokens[k].to_string(),
            })?;
        }
        let value: f64 = tokens[3].parse().map_err(|_| VoxelError::NonNumeric {
            line,
            token: tokens[3].to_string(),
        })?;
        grid.add(coord, value)?;
    }
    Ok(grid)
}

pub fn write_voxel_text(grid: &VoxelGrid) -> String {
    let mut out = format!("{}\n", grid.resolution());
    for ([x, y, z], v) in grid.iter() {
        let _ = writeln!(out, "{x} {y} {z} {v:?}");
    }
    out
}
