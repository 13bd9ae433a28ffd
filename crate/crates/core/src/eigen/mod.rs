//! Eigenpairs of graph Laplacians.
//!
//! [`smallest_nontrivial_pairs`] is the production path: a blocked,
//! locally optimal preconditioned iteration (LOBPCG) that works in the
//! orthogonal complement of the constant vector. [`dense_eigen_oracle`] is a
//! full Jacobi decomposition for checking it on small graphs.

mod dense;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

pub use dense::{jacobi_eigen, DenseEigen};

use crate::sparse::SparseSymMatrix;

/// Largest order accepted by the dense oracle.
pub const DENSE_LIMIT: usize = 2000;

/// Extra block vectors carried beyond the requested pairs. They absorb
/// clusters of nearby eigenvalues and speed up convergence of the wanted ones.
const GUARD_VECTORS: usize = 4;

/// Relative tolerance for treating two entries as equally large when fixing
/// the eigenvector sign.
const SIGN_TIE_TOL: f64 = 1e-8;

/// Relative threshold under which a new search direction is considered
/// linearly dependent on the current basis.
const DEPENDENCE_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EigenError {
    #[error("invalid solver settings: {0}")]
    InvalidSettings(String),
    #[error("requested {count} nontrivial eigenpairs but the matrix has order {n}")]
    TooFewNodes { count: usize, n: usize },
    #[error("graph is disconnected (lambda_2 = {lambda2:e}); bridge its components before solving")]
    Disconnected { lambda2: f64 },
    #[error("eigensolver not converged after {iterations} iterations (residual {residual:e} > {target:e})")]
    NotConverged {
        iterations: usize,
        residual: f64,
        target: f64,
    },
    #[error("matrix of order {n} exceeds the dense limit {limit}")]
    TooLarge { n: usize, limit: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolveSettings {
    /// Residual tolerance, relative to `max(1, 2 * max degree)`.
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for SolveSettings {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 5000,
            seed: 42,
        }
    }
}

impl SolveSettings {
    pub fn validate(&self) -> Result<(), EigenError> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(EigenError::InvalidSettings(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(EigenError::InvalidSettings("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<f64>,
}

/// Output of the iterative solver.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// Ascending by eigenvalue, starting at the second smallest.
    pub pairs: Vec<EigenPair>,
    /// `‖L u − λ u‖₂` per pair, recomputed from the returned vectors.
    pub residuals: Vec<f64>,
    pub iterations: usize,
}

/// The `count` eigenpairs of a connected graph's Laplacian that follow the
/// trivial constant one, in ascending order.
///
/// Each vector has unit norm, is orthogonal to the constant vector and to
/// the other returned vectors, and satisfies
/// `‖L u − λ u‖ ≤ tol · max(1, 2 · max degree)`. Signs are fixed so the
/// entry of largest magnitude is positive. Results are a pure function of
/// the matrix and settings.
pub fn smallest_nontrivial_pairs(
    l: &SparseSymMatrix,
    count: usize,
    settings: &SolveSettings,
) -> Result<Spectrum, EigenError> {
    settings.validate()?;
    let n = l.order();
    if count == 0 || count + 1 > n {
        return Err(EigenError::TooFewNodes { count, n });
    }
    let bound = l.laplacian_spectral_bound();
    let target = settings.tol * bound.max(1.0);
    let block = (count + GUARD_VECTORS).min(n - 1);

    let precond: Vec<f64> = l
        .diagonal()
        .into_iter()
        .map(|d| if d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(block);
    while basis.len() < block {
        let candidate: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
        append_orthonormal(&mut basis, candidate);
    }
    let mut ritz = rayleigh_ritz(l, &basis, block);
    let mut search: Vec<Vec<f64>> = Vec::new();
    let mut iterations = 0;

    loop {
        let residuals: Vec<Vec<f64>> = (0..block)
            .map(|k| {
                let (x, lx, theta) = (&ritz.x[k], &ritz.lx[k], ritz.values[k]);
                lx.iter().zip(x).map(|(a, b)| a - theta * b).collect()
            })
            .collect();
        let norms: Vec<f64> = residuals.iter().map(|r| norm(r)).collect();
        let worst = norms[..count].iter().copied().fold(0.0, f64::max);
        if worst <= target || iterations >= settings.max_iter {
            if ritz.values[0] <= 1e-10 * bound {
                return Err(EigenError::Disconnected {
                    lambda2: ritz.values[0],
                });
            }
            if worst > target {
                return Err(EigenError::NotConverged {
                    iterations,
                    residual: worst,
                    target,
                });
            }
            break;
        }

        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(3 * block);
        for x in &ritz.x {
            append_orthonormal(&mut basis, x.clone());
        }
        let locked = basis.len();
        for (r, &rn) in residuals.into_iter().zip(&norms) {
            if rn > target {
                let w = r.iter().zip(&precond).map(|(a, b)| a * b).collect();
                append_orthonormal(&mut basis, w);
            }
        }
        for p in search.drain(..) {
            append_orthonormal(&mut basis, p);
        }
        let next = rayleigh_ritz(l, &basis, block);
        // the part of each new Ritz vector outside the old block is the next
        // search direction
        search = (0..block)
            .map(|k| {
                let mut p = vec![0.0; n];
                for (i, q) in basis.iter().enumerate().skip(locked) {
                    axpy(next.coeffs[k][i], q, &mut p);
                }
                p
            })
            .collect();
        ritz = next;
        iterations += 1;
    }

    let mut pairs = Vec::with_capacity(count);
    let mut residual_norms = Vec::with_capacity(count);
    for k in 0..count {
        let mut vector = ritz.x[k].clone();
        fix_sign(&mut vector);
        let lu = l.mul_vec(&vector);
        let value = dot(&vector, &lu);
        let r: Vec<f64> = lu.iter().zip(&vector).map(|(a, b)| a - value * b).collect();
        residual_norms.push(norm(&r));
        pairs.push(EigenPair { value, vector });
    }
    Ok(Spectrum {
        pairs,
        residuals: residual_norms,
        iterations,
    })
}

struct Ritz {
    values: Vec<f64>,
    x: Vec<Vec<f64>>,
    lx: Vec<Vec<f64>>,
    /// coefficients of each Ritz vector in the basis it was computed from
    coeffs: Vec<Vec<f64>>,
}

/// Rayleigh–Ritz projection of `l` onto the orthonormal `basis`, keeping the
/// `keep` lowest Ritz pairs.
fn rayleigh_ritz(l: &SparseSymMatrix, basis: &[Vec<f64>], keep: usize) -> Ritz {
    let m = basis.len();
    let n = l.order();
    let lq: Vec<Vec<f64>> = basis.iter().map(|q| l.mul_vec(q)).collect();
    let mut s = vec![0.0; m * m];
    for i in 0..m {
        for j in i..m {
            let v = 0.5 * (dot(&basis[i], &lq[j]) + dot(&basis[j], &lq[i]));
            s[i * m + j] = v;
            s[j * m + i] = v;
        }
    }
    let eig = jacobi_eigen(&s, m);
    let keep = keep.min(m);
    let mut x = Vec::with_capacity(keep);
    let mut lx = Vec::with_capacity(keep);
    for k in 0..keep {
        let c = &eig.vectors[k];
        let mut xk = vec![0.0; n];
        let mut lxk = vec![0.0; n];
        for i in 0..m {
            axpy(c[i], &basis[i], &mut xk);
            axpy(c[i], &lq[i], &mut lxk);
        }
        x.push(xk);
        lx.push(lxk);
    }
    Ritz {
        values: eig.values[..keep].to_vec(),
        x,
        lx,
        coeffs: eig.vectors[..keep].to_vec(),
    }
}

/// Orthogonalize `v` against the constant vector and `basis` (two passes of
/// classical Gram–Schmidt) and append it if it is not dependent.
fn append_orthonormal(basis: &mut Vec<Vec<f64>>, mut v: Vec<f64>) -> bool {
    remove_mean(&mut v);
    let before = norm(&v);
    if before == 0.0 || !before.is_finite() {
        return false;
    }
    for _ in 0..2 {
        let coeffs: Vec<f64> = basis.iter().map(|b| dot(b, &v)).collect();
        for (b, c) in basis.iter().zip(coeffs) {
            axpy(-c, b, &mut v);
        }
        remove_mean(&mut v);
    }
    let after = norm(&v);
    if after <= DEPENDENCE_TOL * before {
        return false;
    }
    v.iter_mut().for_each(|x| *x /= after);
    basis.push(v);
    true
}

fn remove_mean(v: &mut [f64]) {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|x| *x -= mean);
}

/// Flip `v` so its entry of largest magnitude is positive; near-ties go to
/// the lowest index.
fn fix_sign(v: &mut [f64]) {
    let largest = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if let Some(pivot) = v.iter().position(|x| x.abs() >= largest * (1.0 - SIGN_TIE_TOL)) {
        if v[pivot] < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Full ascending eigendecomposition of a (small) Laplacian, for testing the
/// iterative solver.
pub fn dense_eigen_oracle(l: &SparseSymMatrix) -> Result<DenseEigen, EigenError> {
    let n = l.order();
    if n > DENSE_LIMIT {
        return Err(EigenError::TooLarge { n, limit: DENSE_LIMIT });
    }
    Ok(jacobi_eigen(&l.to_dense(), n))
}
