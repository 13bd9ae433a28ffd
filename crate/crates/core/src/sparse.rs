//! Compressed sparse row storage for symmetric matrices and the graph
//! Laplacian.

use crate::graph::Graph;

/// Symmetric matrix in CSR form with sorted column indices per row. Both
/// triangles are stored.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSymMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseSymMatrix {
    pub fn order(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[span.clone()].iter().copied().zip(self.values[span].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[span.clone()].binary_search(&j) {
            Ok(k) => self.values[span.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// `y = A x`, accumulated row by row in column order.
    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            *yi = acc;
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.mul_vec_into(x, &mut y);
        y
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n * self.n];
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                out[i * self.n + j] = v;
            }
        }
        out
    }

    /// Upper bound on the largest eigenvalue of a Laplacian: twice the
    /// largest diagonal entry.
    pub fn laplacian_spectral_bound(&self) -> f64 {
        2.0 * self.diagonal().into_iter().fold(0.0, f64::max)
    }
}

/// Graph Laplacian: weighted degree on the diagonal, negated edge weight
/// off the diagonal, zero elsewhere.
pub fn laplacian(graph: &Graph) -> SparseSymMatrix {
    let n = graph.node_count();
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut degree = vec![0.0; n];
    for e in graph.edges() {
        rows[e.p].push((e.q, -e.weight));
        rows[e.q].push((e.p, -e.weight));
        degree[e.p] += e.weight;
        degree[e.q] += e.weight;
    }
    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut col_idx = Vec::with_capacity(n + 2 * graph.edge_count());
    let mut values = Vec::with_capacity(n + 2 * graph.edge_count());
    row_ptr.push(0);
    for (i, mut row) in rows.into_iter().enumerate() {
        row.push((i, degree[i]));
        row.sort_by_key(|&(j, _)| j);
        for (j, v) in row {
            col_idx.push(j);
            values.push(v);
        }
        row_ptr.push(col_idx.len());
    }
    SparseSymMatrix {
        n,
        row_ptr,
        col_idx,
        values,
    }
}
