//! Cross-check of the iterative eigensolver against the dense oracle on
//! seeded random connected graphs.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::eigen::{dense_eigen_oracle, smallest_nontrivial_pairs, EigenError, SolveSettings};
use crate::graph::{bridge_components, build_adjacency_graph, build_knn_graph, Connectivity, Graph};
use crate::sparse::laplacian;
use crate::voxel::VoxelGrid;

pub const EIGENVALUE_TOL: f64 = 1e-6;
pub const ALIGNMENT_TOL: f64 = 1e-6;
/// Eigenvalues closer than this to a neighbor are treated as repeated, and
/// their vectors are not compared.
pub const GAP_TOL: f64 = 1e-6;

/// Random connected graph with `n` nodes: even `index` gives a voxel
/// adjacency graph, odd a k-NN graph; both are bridged.
pub fn random_connected_graph(rng: &mut ChaCha8Rng, n: usize, index: usize) -> Graph {
    let graph = if index.is_multiple_of(2) {
        let r = ((2.0 * n as f64).cbrt().ceil() as usize).max(2);
        let mut cells: Vec<[i64; 3]> = (0..r * r * r)
            .map(|i| [(i / (r * r)) as i64, (i / r % r) as i64, (i % r) as i64])
            .collect();
        cells.shuffle(rng);
        let mut grid = VoxelGrid::new(r).expect("r >= 2");
        for c in &cells[..n] {
            grid.set(*c, 1.0).expect("in range");
        }
        let conn = [Connectivity::Six, Connectivity::Eighteen, Connectivity::TwentySix][rng.gen_range(0..3)];
        build_adjacency_graph(&grid, conn).expect("nonempty grid")
    } else {
        let dim = rng.gen_range(2..=3);
        let points: Vec<Vec<f64>> = (0..n).map(|_| (0..dim).map(|_| rng.gen()).collect()).collect();
        let k = rng.gen_range(1..=6.min(n - 1));
        build_knn_graph(&points, k).expect("valid k")
    };
    bridge_components(&graph).0
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphCheck {
    pub nodes: usize,
    pub eigenvalue_error: f64,
    /// Smallest `|<u, u_oracle>|` over pairs with a clear eigengap; 1 when
    /// every compared eigenvalue is repeated.
    pub min_alignment: f64,
    pub passed: bool,
}

/// Compare the two smallest nontrivial pairs from both solvers.
pub fn check_graph(graph: &Graph, settings: &SolveSettings) -> Result<GraphCheck, EigenError> {
    let l = laplacian(graph);
    let sparse = smallest_nontrivial_pairs(&l, 2, settings)?;
    let oracle = dense_eigen_oracle(&l)?;
    let n = l.order();
    let mut eigenvalue_error: f64 = 0.0;
    let mut min_alignment: f64 = 1.0;
    for (k, pair) in sparse.pairs.iter().enumerate() {
        let i = k + 1;
        eigenvalue_error = eigenvalue_error.max((pair.value - oracle.values[i]).abs());
        let below = oracle.values[i] - oracle.values[i - 1];
        let above = if i + 1 < n { oracle.values[i + 1] - oracle.values[i] } else { f64::INFINITY };
        if below.min(above) > GAP_TOL {
            let align: f64 = pair.vector.iter().zip(&oracle.vectors[i]).map(|(a, b)| a * b).sum();
            min_alignment = min_alignment.min(align.abs());
        }
    }
    Ok(GraphCheck {
        nodes: n,
        eigenvalue_error,
        min_alignment,
        passed: eigenvalue_error <= EIGENVALUE_TOL && min_alignment >= 1.0 - ALIGNMENT_TOL,
    })
}

/// Run [`check_graph`] on `count` random connected graphs with node counts
/// in `[min_nodes, max_nodes]`.
pub fn run(count: usize, min_nodes: usize, max_nodes: usize, seed: u64, settings: &SolveSettings) -> Vec<Result<GraphCheck, EigenError>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let n = rng.gen_range(min_nodes..=max_nodes);
            let graph = random_connected_graph(&mut rng, n, i);
            check_graph(&graph, settings)
        })
        .collect()
}
