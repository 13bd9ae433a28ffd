//! Binary PGM and CSV serialization of embedded images.
//!
//! Both formats write the largest y bin first, so the image origin is the
//! top-left corner as image viewers expect.

use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::layout::EmbeddedImage;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ImageError {
    #[error("max_gray must be in [1, 65535], got {0}")]
    MaxGray(u32),
    #[error("malformed PGM: {0}")]
    Pgm(String),
    #[error("malformed CSV at line {line}: {msg}")]
    Csv { line: usize, msg: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ImageFormat {
    #[default]
    Pgm,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Scaling {
    #[default]
    Linear,
    /// `ln(1 + v)` before normalizing
    Log1p,
}

impl Scaling {
    fn apply(self, v: f64) -> f64 {
        match self {
            Self::Linear => v,
            Self::Log1p => v.ln_1p(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ImageWriteSettings {
    pub format: ImageFormat,
    pub scaling: Scaling,
    pub max_gray: u32,
}

impl Default for ImageWriteSettings {
    fn default() -> Self {
        Self {
            format: ImageFormat::Pgm,
            scaling: Scaling::Linear,
            max_gray: 255,
        }
    }
}

impl ImageWriteSettings {
    pub fn validate(&self) -> Result<(), ImageError> {
        if !(1..=65535).contains(&self.max_gray) {
            return Err(ImageError::MaxGray(self.max_gray));
        }
        Ok(())
    }
}

/// Gray levels in output order (top row first).
pub fn gray_levels(image: &EmbeddedImage, settings: &ImageWriteSettings) -> Vec<u32> {
    let dim = image.dim();
    let peak = settings.scaling.apply(image.max());
    let max_gray = settings.max_gray as f64;
    let mut out = Vec::with_capacity(dim * dim);
    for row in (0..dim).rev() {
        for col in 0..dim {
            let v = image.get(row, col);
            let level = if peak > 0.0 {
                (settings.scaling.apply(v) / peak * max_gray).round()
            } else {
                0.0
            };
            out.push(level.clamp(0.0, max_gray) as u32);
        }
    }
    out
}

/// Binary `P5` graymap. Samples are one byte when `max_gray < 256`, else two
/// bytes big-endian.
pub fn write_pgm(image: &EmbeddedImage, settings: &ImageWriteSettings) -> Result<Vec<u8>, ImageError> {
    settings.validate()?;
    let dim = image.dim();
    let mut out = format!("P5\n{dim} {dim}\n{}\n", settings.max_gray).into_bytes();
    let wide = settings.max_gray > 255;
    for level in gray_levels(image, settings) {
        if wide {
            out.extend_from_slice(&(level as u16).to_be_bytes());
        } else {
            out.push(level as u8);
        }
    }
    Ok(out)
}

/// Decoded `P5` graymap: `(width, height, max_gray, samples)`.
pub type Pgm = (usize, usize, u32, Vec<u32>);

pub fn read_pgm(bytes: &[u8]) -> Result<Pgm, ImageError> {
    let bad = |msg: &str| ImageError::Pgm(msg.to_string());
    let mut pos = 0;
    let mut fields = Vec::with_capacity(4);
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if pos < bytes.len() && bytes[pos] == b'#' {
            while pos < bytes.len() && bytes[pos] != b'\n' {
                pos += 1;
            }
            continue;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(bad("truncated header"));
        }
        fields.push(std::str::from_utf8(&bytes[start..pos]).map_err(|_| bad("non-ascii header"))?);
    }
    if fields[0] != "P5" {
        return Err(bad("magic number is not P5"));
    }
    let parse = |s: &str| s.parse::<usize>().map_err(|_| bad("non-numeric header field"));
    let (width, height, max_gray) = (parse(fields[1])?, parse(fields[2])?, parse(fields[3])?);
    if !(1..=65535).contains(&max_gray) {
        return Err(bad("maxval out of range"));
    }
    // exactly one whitespace byte separates the header from the raster
    pos += 1;
    let sample_bytes = if max_gray > 255 { 2 } else { 1 };
    let raster = bytes.get(pos..).unwrap_or_default();
    if raster.len() != width * height * sample_bytes {
        return Err(bad("raster size does not match header"));
    }
    let samples = if sample_bytes == 1 {
        raster.iter().map(|&b| b as u32).collect()
    } else {
        raster
            .chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]) as u32)
            .collect()
    };
    Ok((width, height, max_gray as u32, samples))
}

/// One line per row (top row first), comma-separated, each value in the
/// shortest form that parses back to the same `f64`.
pub fn write_csv(image: &EmbeddedImage) -> String {
    let dim = image.dim();
    let mut out = String::new();
    for row in (0..dim).rev() {
        for col in 0..dim {
            if col > 0 {
                out.push(',');
            }
            let _ = write!(out, "{}", image.get(row, col));
        }
        out.push('\n');
    }
    out
}

pub fn read_csv(text: &str) -> Result<EmbeddedImage, ImageError> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let row = line
            .split(',')
            .map(|t| {
                t.trim().parse::<f64>().map_err(|_| ImageError::Csv {
                    line: i + 1,
                    msg: format!("non-numeric value `{t}`"),
                })
            })
            .collect::<Result<Vec<f64>, _>>()?;
        rows.push(row);
    }
    rows.reverse();
    EmbeddedImage::from_rows(&rows).map_err(|e| ImageError::Csv {
        line: 0,
        msg: e.to_string(),
    })
}
