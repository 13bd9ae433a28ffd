//! Synthetic shapes and a nearest-neighbor classifier over embedded images.
//!
//! Shapes are voxelized from analytic signed distance functions: a voxel is
//! kept when the surface passes within half a voxel diagonal of its center.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::layout::EmbeddedImage;
use crate::pipeline::{embed_grid, EmbedError, PipelineConfig};
use crate::voxel::VoxelGrid;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("invalid shape parameters: {0}")]
    InvalidShape(String),
    #[error("image dimensions differ: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("need at least 2 items, found {0}")]
    TooFewItems(usize),
    #[error("embedding {id} failed: {source}")]
    Embed {
        id: String,
        #[source]
        source: EmbedError,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ShapeKind {
    Box,
    Sphere,
    Torus,
    Line,
}

impl ShapeKind {
    pub const ALL: [ShapeKind; 4] = [Self::Box, Self::Sphere, Self::Torus, Self::Line];

    pub fn name(self) -> &'static str {
        match self {
            Self::Box => "box",
            Self::Sphere => "sphere",
            Self::Torus => "torus",
            Self::Line => "line",
        }
    }
}

impl fmt::Display for ShapeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ShapeKind {
    type Err = EvalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| EvalError::InvalidShape(format!("unknown shape kind `{s}`")))
    }
}

/// Analytic shape, sized in voxel units and centered on the voxel at
/// `(R/2, R/2, R/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    Box { half_extents: [f64; 3] },
    Sphere { radius: f64 },
    Torus { major: f64, minor: f64 },
    /// Voxel row along x.
    Line { length: usize },
}

impl Shape {
    pub fn kind(&self) -> ShapeKind {
        match self {
            Self::Box { .. } => ShapeKind::Box,
            Self::Sphere { .. } => ShapeKind::Sphere,
            Self::Torus { .. } => ShapeKind::Torus,
            Self::Line { .. } => ShapeKind::Line,
        }
    }

    fn validate(&self, resolution: usize) -> Result<(), EvalError> {
        let r = resolution as f64;
        let bad = |msg: String| Err(EvalError::InvalidShape(msg));
        match *self {
            Shape::Box { half_extents } => {
                if half_extents.iter().any(|&h| h.is_nan() || h <= 0.0 || h > r / 2.0) {
                    return bad(format!("box half extents must be in (0, {}]: {half_extents:?}", r / 2.0));
                }
            }
            Shape::Sphere { radius } => {
                if !(radius > 0.0 && radius < r / 2.0) {
                    return bad(format!("sphere radius must be in (0, {}): {radius}", r / 2.0));
                }
            }
            Shape::Torus { major, minor } => {
                if !(minor > 0.0 && major > minor && major + minor < r / 2.0) {
                    return bad(format!(
                        "torus needs 0 < minor < major and major + minor < {}: ({major}, {minor})",
                        r / 2.0
                    ));
                }
            }
            Shape::Line { length } => {
                if length == 0 || length >= resolution {
                    return bad(format!("line length must be in [1, {resolution}): {length}"));
                }
            }
        }
        Ok(())
    }

    /// Signed distance in voxel units, in the shape's own frame (origin at
    /// the shape center).
    fn distance(&self, p: [f64; 3]) -> f64 {
        match *self {
            Shape::Box { half_extents } => {
                let q = [0, 1, 2].map(|k| p[k].abs() - half_extents[k]);
                let outside = q.iter().map(|v| v.max(0.0).powi(2)).sum::<f64>().sqrt();
                let inside = q[0].max(q[1]).max(q[2]).min(0.0);
                outside + inside
            }
            Shape::Sphere { radius } => norm3(p) - radius,
            Shape::Torus { major, minor } => {
                let ring = (p[0] * p[0] + p[1] * p[1]).sqrt() - major;
                (ring * ring + p[2] * p[2]).sqrt() - minor
            }
            Shape::Line { length } => {
                let start = -(((length - 1) / 2) as f64);
                let end = start + (length - 1) as f64;
                let dx = (start - p[0]).max(p[0] - end).max(0.0);
                (dx * dx + p[1] * p[1] + p[2] * p[2]).sqrt()
            }
        }
    }
}

fn norm3(p: [f64; 3]) -> f64 {
    (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt()
}

type Mat3 = [[f64; 3]; 3];

fn mat_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

fn transpose_apply(m: &Mat3, p: [f64; 3]) -> [f64; 3] {
    [0, 1, 2].map(|j| (0..3).map(|i| m[i][j] * p[i]).sum())
}

/// The 24 proper rotations that map the cube onto itself, as signed
/// permutation matrices with determinant +1.
pub fn cube_rotations() -> Vec<Mat3> {
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    const PARITY: [f64; 6] = [1.0, -1.0, -1.0, 1.0, 1.0, -1.0];
    let mut out = Vec::with_capacity(24);
    for (perm, parity) in PERMS.iter().zip(PARITY) {
        for signs in 0..8u32 {
            let s = [0, 1, 2].map(|k| if signs >> k & 1 == 1 { -1.0 } else { 1.0 });
            if parity * s[0] * s[1] * s[2] < 0.0 {
                continue;
            }
            let mut m = [[0.0; 3]; 3];
            for row in 0..3 {
                m[row][perm[row]] = s[row];
            }
            out.push(m);
        }
    }
    out
}

/// Rotation by `angle` about the unit `axis` (Rodrigues).
fn axis_angle(axis: [f64; 3], angle: f64) -> Mat3 {
    let (s, c) = angle.sin_cos();
    let t = 1.0 - c;
    let [x, y, z] = axis;
    [
        [t * x * x + c, t * x * y - s * z, t * x * z + s * y],
        [t * x * y + s * z, t * y * y + c, t * y * z - s * x],
        [t * x * z - s * y, t * y * z + s * x, t * z * z + c],
    ]
}

/// Largest perturbation applied on top of a cube rotation, in radians.
pub const MAX_PERTURBATION: f64 = 10.0 * PI / 180.0;

/// A cube rotation composed with a small random rotation, drawn from `rng`.
pub fn random_pose<R: Rng>(rng: &mut R) -> Mat3 {
    let rotations = cube_rotations();
    let base = rotations[rng.gen_range(0..rotations.len())];
    let axis = loop {
        let v = [0, 1, 2].map(|_| rng.gen_range(-1.0..1.0));
        let n = norm3(v);
        if n > 1e-3 && n <= 1.0 {
            break v.map(|x| x / n);
        }
    };
    let angle = rng.gen_range(-MAX_PERTURBATION..=MAX_PERTURBATION);
    mat_mul(&axis_angle(axis, angle), &base)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenParams {
    pub resolution: usize,
    /// Apply a random pose drawn from the seed.
    pub rotate: bool,
}

/// Voxel shell of `shape` centered in an R×R×R grid.
pub fn generate_shape(shape: &Shape, params: &GenParams, seed: u64) -> Result<VoxelGrid, EvalError> {
    let r = params.resolution;
    if r == 0 {
        return Err(EvalError::InvalidShape("resolution must be at least 1".into()));
    }
    shape.validate(r)?;
    let pose = if params.rotate {
        random_pose(&mut ChaCha8Rng::seed_from_u64(seed))
    } else {
        [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
    };
    // a voxel center, so axis-aligned lines hit whole voxels
    let center = (r / 2) as f64 + 0.5;
    let band = 3f64.sqrt() / 2.0;
    let mut grid = VoxelGrid::new(r).expect("resolution checked");
    for x in 0..r {
        for y in 0..r {
            for z in 0..r {
                let p = [x, y, z].map(|c| c as f64 + 0.5 - center);
                // world = pose * local, so local = poseᵀ * world
                let local = transpose_apply(&pose, p);
                if shape.distance(local).abs() <= band {
                    grid.set([x as i64, y as i64, z as i64], 1.0).expect("in range");
                }
            }
        }
    }
    if grid.is_empty() {
        return Err(EvalError::InvalidShape("shape produced no voxels".into()));
    }
    Ok(grid)
}

/// Draw a shape of `kind` with seeded random proportions that fit a grid of
/// the given resolution under any rotation.
pub fn sample_shape(kind: ShapeKind, resolution: usize, seed: u64) -> Shape {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_5a3e);
    let r = resolution as f64;
    match kind {
        ShapeKind::Box => Shape::Box {
            half_extents: [0, 1, 2].map(|_| r * rng.gen_range(0.12..0.26)),
        },
        ShapeKind::Sphere => Shape::Sphere {
            radius: r * rng.gen_range(0.25..0.4),
        },
        ShapeKind::Torus => {
            let major = r * rng.gen_range(0.22..0.3);
            Shape::Torus {
                major,
                minor: major * rng.gen_range(0.3..0.45),
            }
        }
        ShapeKind::Line => Shape::Line {
            length: ((r * rng.gen_range(0.4..0.9)) as usize).clamp(1, resolution.saturating_sub(1).max(1)),
        },
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledImage {
    pub label: String,
    pub image: EmbeddedImage,
    pub source: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LabeledImageSet {
    pub items: Vec<LabeledImage>,
}

fn squared_distance(a: &EmbeddedImage, b: &EmbeddedImage) -> Result<f64, EvalError> {
    if a.dim() != b.dim() {
        return Err(EvalError::DimMismatch(a.dim(), b.dim()));
    }
    Ok(a.intensities()
        .iter()
        .zip(b.intensities())
        .map(|(x, y)| (x - y) * (x - y))
        .sum())
}

/// Index of the training item nearest to `query`, skipping `exclude`.
fn nearest(train: &[LabeledImage], query: &EmbeddedImage, exclude: Option<usize>) -> Result<Option<usize>, EvalError> {
    let mut best: Option<(f64, usize)> = None;
    for (i, item) in train.iter().enumerate() {
        if Some(i) == exclude {
            continue;
        }
        let d = squared_distance(&item.image, query)?;
        if best.is_none_or(|(bd, _)| d < bd) {
            best = Some((d, i));
        }
    }
    Ok(best.map(|(_, i)| i))
}

/// Label of the nearest training image (Euclidean over raw intensities,
/// first occurrence wins ties).
pub fn one_nn_classify(train: &LabeledImageSet, query: &EmbeddedImage) -> Result<String, EvalError> {
    let i = nearest(&train.items, query, None)?.ok_or(EvalError::EmptyTrainingSet)?;
    Ok(train.items[i].label.clone())
}

/// Per-item outcome of leave-one-out classification.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub source: String,
    pub label: String,
    pub predicted: String,
}

impl Prediction {
    pub fn correct(&self) -> bool {
        self.label == self.predicted
    }
}

pub fn leave_one_out(set: &LabeledImageSet) -> Result<Vec<Prediction>, EvalError> {
    let n = set.items.len();
    if n < 2 {
        return Err(EvalError::TooFewItems(n));
    }
    set.items
        .iter()
        .enumerate()
        .map(|(i, item)| {
            let j = nearest(&set.items, &item.image, Some(i))?.expect("n >= 2");
            Ok(Prediction {
                source: item.source.clone(),
                label: item.label.clone(),
                predicted: set.items[j].label.clone(),
            })
        })
        .collect()
}

/// Fraction of items whose nearest other item shares their label.
pub fn leave_one_out_accuracy(set: &LabeledImageSet) -> Result<f64, EvalError> {
    let predictions = leave_one_out(set)?;
    let correct = predictions.iter().filter(|p| p.correct()).count();
    Ok(correct as f64 / predictions.len() as f64)
}

/// One synthetic instance: a kind and the seed that fixes its proportions
/// and pose.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Instance {
    pub kind: ShapeKind,
    pub seed: u64,
}

impl Instance {
    pub fn id(&self) -> String {
        format!("{}-{}", self.kind, self.seed)
    }

    pub fn grid(&self, resolution: usize) -> Result<VoxelGrid, EvalError> {
        let shape = sample_shape(self.kind, resolution, self.seed);
        generate_shape(&shape, &GenParams { resolution, rotate: true }, self.seed)
    }

    pub fn embed(&self, config: &PipelineConfig) -> Result<LabeledImage, EvalError> {
        let grid = self.grid(config.resolution)?;
        let (image, _) = embed_grid(&grid, config).map_err(|source| EvalError::Embed { id: self.id(), source })?;
        Ok(LabeledImage {
            label: self.kind.to_string(),
            image,
            source: self.id(),
        })
    }
}

/// `per_kind` instances of each kind with seeds `base_seed + i`.
pub fn instances(kinds: &[ShapeKind], per_kind: usize, base_seed: u64) -> Vec<Instance> {
    kinds
        .iter()
        .flat_map(|&kind| (0..per_kind as u64).map(move |i| Instance { kind, seed: base_seed + i }))
        .collect()
}

/// Results table: one `kind,seed,predicted,correct` row per item.
pub fn results_csv(instances: &[Instance], predictions: &[Prediction]) -> String {
    let mut out = String::from("kind,seed,predicted,correct\n");
    for (inst, p) in instances.iter().zip(predictions) {
        out.push_str(&format!("{},{},{},{}\n", inst.kind, inst.seed, p.predicted, p.correct()));
    }
    out
}
