//! Triangle meshes and the ASCII OFF format.
//!
//! Polygons with more than three corners are fan-triangulated while parsing.
//! Faces that repeat a vertex index carry no area and are dropped; the number
//! dropped is reported through [`OffStats`].

use std::fmt::Write as _;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OffError {
    #[error("line {line}: malformed header: {msg}")]
    Header { line: usize, msg: String },
    #[error("line {line}: count mismatch: {msg}")]
    CountMismatch { line: usize, msg: String },
    #[error("line {line}: face index out of range: {index} not in [0, {vertex_count})")]
    FaceIndexOutOfRange {
        line: usize,
        index: i64,
        vertex_count: usize,
    },
    #[error("line {line}: non-numeric token `{token}`")]
    NonNumeric { line: usize, token: String },
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
}

/// Indexed triangle mesh in model coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<[f64; 3]>,
    pub faces: Vec<[usize; 3]>,
}

/// Side information gathered while parsing an OFF document.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OffStats {
    pub declared_faces: usize,
    pub degenerate_dropped: usize,
}

impl Mesh {
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    /// Corner positions of face `i`.
    pub fn triangle(&self, i: usize) -> [[f64; 3]; 3] {
        let [a, b, c] = self.faces[i];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    /// Axis-aligned bounding box as `(min, max)`; `None` for a mesh without vertices.
    pub fn bounds(&self) -> Option<([f64; 3], [f64; 3])> {
        let first = *self.vertices.first()?;
        Some(self.vertices.iter().fold((first, first), |(mut lo, mut hi), v| {
            for k in 0..3 {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
            (lo, hi)
        }))
    }
}

/// Parse an ASCII OFF document, discarding the parse statistics.
pub fn parse_off(text: &str) -> Result<Mesh, OffError> {
    parse_off_with_stats(text).map(|(mesh, _)| mesh)
}

pub fn parse_off_with_stats(text: &str) -> Result<(Mesh, OffStats), OffError> {
    // (1-based line number, content without comment)
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, strip_comment(l).trim()))
        .filter(|(_, l)| !l.is_empty());
    let last_line = text.lines().count();

    let (header_line, header) = lines.next().ok_or(OffError::Header {
        line: last_line.max(1),
        msg: "empty document".into(),
    })?;
    let rest = header.strip_prefix("OFF").ok_or_else(|| OffError::Header {
        line: header_line,
        msg: format!("expected `OFF`, found `{header}`"),
    })?;
    // ModelNet ships both `OFF\nn m k` and `OFFn m k` / `OFF n m k`.
    let (counts_line, counts_text) = if rest.trim().is_empty() {
        lines.next().ok_or(OffError::Header {
            line: header_line + 1,
            msg: "missing element counts".into(),
        })?
    } else {
        (header_line, rest.trim())
    };
    let counts = parse_numbers::<i64>(counts_line, counts_text)?;
    if counts.len() < 2 || counts.len() > 3 {
        return Err(OffError::Header {
            line: counts_line,
            msg: format!("expected `vertices faces [edges]`, found {} values", counts.len()),
        });
    }
    if counts.iter().any(|&c| c < 0) {
        return Err(OffError::Header {
            line: counts_line,
            msg: "negative element count".into(),
        });
    }
    let vertex_count = counts[0] as usize;
    let face_count = counts[1] as usize;
    if vertex_count == 0 {
        return Err(OffError::Header {
            line: counts_line,
            msg: "mesh declares no vertices".into(),
        });
    }

    let mut vertices = Vec::with_capacity(vertex_count);
    for i in 0..vertex_count {
        let (line, content) = lines.next().ok_or_else(|| OffError::CountMismatch {
            line: last_line + 1,
            msg: format!("expected {vertex_count} vertices, found {i}"),
        })?;
        let xs = parse_numbers::<f64>(line, content)?;
        if xs.len() < 3 {
            return Err(OffError::Malformed {
                line,
                msg: format!("vertex needs 3 coordinates, found {}", xs.len()),
            });
        }
        if xs[..3].iter().any(|x| !x.is_finite()) {
            return Err(OffError::Malformed {
                line,
                msg: "non-finite vertex coordinate".into(),
            });
        }
        vertices.push([xs[0], xs[1], xs[2]]);
    }

    let mut faces = Vec::with_capacity(face_count);
    let mut degenerate = 0;
    for i in 0..face_count {
        let (line, content) = lines.next().ok_or_else(|| OffError::CountMismatch {
            line: last_line + 1,
            msg: format!("expected {face_count} faces, found {i}"),
        })?;
        let mut tokens = content.split_whitespace();
        let arity_token = tokens.next().unwrap_or_default();
        let arity: usize = arity_token.parse().map_err(|_| OffError::NonNumeric {
            line,
            token: arity_token.to_string(),
        })?;
        if arity < 3 {
            return Err(OffError::Malformed {
                line,
                msg: format!("face needs at least 3 vertices, found {arity}"),
            });
        }
        let mut corners = Vec::with_capacity(arity);
        for _ in 0..arity {
            let token = tokens.next().ok_or_else(|| OffError::Malformed {
                line,
                msg: format!("face declares {arity} vertices but lists fewer"),
            })?;
            let index: i64 = token.parse().map_err(|_| OffError::NonNumeric {
                line,
                token: token.to_string(),
            })?;
            if index < 0 || index as usize >= vertex_count {
                return Err(OffError::FaceIndexOutOfRange {
                    line,
                    index,
                    vertex_count,
                });
            }
            corners.push(index as usize);
        }
        // trailing tokens are per-face colors; they must still be numeric
        for token in tokens {
            if token.parse::<f64>().is_err() {
                return Err(OffError::NonNumeric {
                    line,
                    token: token.to_string(),
                });
            }
        }
        for k in 1..arity - 1 {
            let tri = [corners[0], corners[k], corners[k + 1]];
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                degenerate += 1;
            } else {
                faces.push(tri);
            }
        }
    }

    if let Some((line, _)) = lines.next() {
        return Err(OffError::CountMismatch {
            line,
            msg: format!(
                "unexpected data after {vertex_count} vertices and {face_count} faces"
            ),
        });
    }
    if degenerate > 0 {
        log::warn!("dropped {degenerate} degenerate triangle(s) while parsing OFF");
    }

    Ok((
        Mesh { vertices, faces },
        OffStats {
            declared_faces: face_count,
            degenerate_dropped: degenerate,
        },
    ))
}

/// Serialize as ASCII OFF. Coordinates use the shortest representation that
/// parses back to the same `f64`.
pub fn write_off(mesh: &Mesh) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "OFF");
    let _ = writeln!(out, "{} {} 0", mesh.vertices.len(), mesh.faces.len());
    for v in &mesh.vertices {
        let _ = writeln!(out, "{:?} {:?} {:?}", v[0], v[1], v[2]);
    }
    for f in &mesh.faces {
        let _ = writeln!(out, "3 {} {} {}", f[0], f[1], f[2]);
    }
    out
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

fn parse_numbers<T: std::str::FromStr>(line: usize, content: &str) -> Result<Vec<T>, OffError> {
    content
        .split_whitespace()
        .map(|t| {
            t.parse::<T>().map_err(|_| OffError::NonNumeric {
                line,
                token: t.to_string(),
            })
        })
        .collect()
}
