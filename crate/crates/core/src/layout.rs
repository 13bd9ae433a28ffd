//! Spectral coordinates and their rasterization into a square intensity grid.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LayoutError {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("layout needs at least one node")]
    Empty,
    #[error("image dimension must be at least 1")]
    ZeroDim,
    #[error("value {v} outside [{lo}, {hi}]")]
    OutOfRange { v: f64, lo: f64, hi: f64 },
}

/// Per-node planar coordinates with the exact extent of each axis.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralCoords {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
}

impl SpectralCoords {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

/// Square grid of non-negative intensities, row-major. Row 0 holds the
/// smallest y bin and column 0 the smallest x bin.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedImage {
    dim: usize,
    intensities: Vec<f64>,
}

impl EmbeddedImage {
    pub fn zeros(dim: usize) -> Result<Self, LayoutError> {
        if dim == 0 {
            return Err(LayoutError::ZeroDim);
        }
        Ok(Self {
            dim,
            intensities: vec![0.0; dim * dim],
        })
    }

    /// Build from rows listed from the smallest y bin upwards.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, LayoutError> {
        let dim = rows.len();
        if dim == 0 {
            return Err(LayoutError::ZeroDim);
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
            return Err(LayoutError::LengthMismatch {
                left: bad.len(),
                right: dim,
            });
        }
        Ok(Self {
            dim,
            intensities: rows.concat(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.intensities[row * self.dim + col]
    }

    pub fn intensities(&self) -> &[f64] {
        &self.intensities
    }

    pub fn mass(&self) -> f64 {
        self.intensities.iter().sum()
    }

    pub fn max(&self) -> f64 {
        self.intensities.iter().copied().fold(0.0, f64::max)
    }

    pub fn nonzero_count(&self) -> usize {
        self.intensities.iter().filter(|&&v| v != 0.0).count()
    }
}

/// Pair the entries of the two eigenvectors into planar coordinates.
pub fn spectral_layout(u2: &[f64], u3: &[f64]) -> Result<SpectralCoords, LayoutError> {
    if u2.len() != u3.len() {
        return Err(LayoutError::LengthMismatch {
            left: u2.len(),
            right: u3.len(),
        });
    }
    if u2.is_empty() {
        return Err(LayoutError::Empty);
    }
    Ok(SpectralCoords {
        x_range: extent(u2),
        y_range: extent(u3),
        x: u2.to_vec(),
        y: u3.to_vec(),
    })
}

fn extent(v: &[f64]) -> (f64, f64) {
    v.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
}

/// Index of the equal-width subinterval of `[lo, hi]` holding `v`. Bins are
/// half-open except the last, which also holds `hi`. A zero-width range maps
/// to the center bin.
pub fn bin_index(v: f64, lo: f64, hi: f64, dim: usize) -> Result<usize, LayoutError> {
    if dim == 0 {
        return Err(LayoutError::ZeroDim);
    }
    if !(lo <= v && v <= hi) {
        return Err(LayoutError::OutOfRange { v, lo, hi });
    }
    if lo == hi {
        return Ok((dim - 1) / 2);
    }
    let t = (v - lo) / (hi - lo);
    Ok(((t * dim as f64).floor() as usize).min(dim - 1))
}

/// Result of rasterizing a layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    pub image: EmbeddedImage,
    /// Nodes that share their pixel with at least one other node.
    pub collision_count: usize,
}

/// Sum node values into the `dim`×`dim` grid of equal squares spanning the
/// layout's extent.
pub fn rasterize(coords: &SpectralCoords, values: &[f64], dim: usize) -> Result<Raster, LayoutError> {
    if coords.len() != values.len() {
        return Err(LayoutError::LengthMismatch {
            left: coords.len(),
            right: values.len(),
        });
    }
    let mut image = EmbeddedImage::zeros(dim)?;
    let mut hits = vec![0usize; dim * dim];
    let (xlo, xhi) = coords.x_range;
    let (ylo, yhi) = coords.y_range;
    for ((&x, &y), &value) in coords.x.iter().zip(&coords.y).zip(values) {
        let col = bin_index(x, xlo, xhi, dim)?;
        let row = bin_index(y, ylo, yhi, dim)?;
        image.intensities[row * dim + col] += value;
        hits[row * dim + col] += 1;
    }
    let collision_count = hits.iter().filter(|&&h| h > 1).sum();
    Ok(Raster {
        image,
        collision_count,
    })
}
