mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use voxel_spectral::eigen::dense_eigen_oracle;
use voxel_spectral::graph::{
    bridge_components, build_adjacency_graph, build_knn_graph, connected_components, Connectivity, Graph, Positions,
};
use voxel_spectral::sparse::laplacian;
use voxel_spectral::voxel::VoxelGrid;

use common::{corpus, random_grid};

fn check_laplacian_algebra(g: &Graph, rng: &mut ChaCha8Rng) {
    let l = laplacian(g);
    let n = l.order();
    for i in 0..n {
        let mut row_sum = 0.0;
        for (j, v) in l.row(i) {
            assert_eq!(v, l.get(j, i), "asymmetric at ({i},{j})");
            if i != j {
                assert!(v <= 0.0);
            } else {
                assert!(v >= 0.0);
            }
            row_sum += v;
        }
        assert!(row_sum.abs() <= 1e-12, "row {i} sums to {row_sum}");
    }
    for _ in 0..10 {
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let lx = l.mul_vec(&x);
        let quad: f64 = common::dot(&x, &lx);
        let edge_sum: f64 = g.edges().iter().map(|e| e.weight * (x[e.p] - x[e.q]).powi(2)).sum();
        assert!(edge_sum >= 0.0);
        assert!((quad - edge_sum).abs() <= 1e-9 * edge_sum.abs().max(1e-300), "{quad} vs {edge_sum}");
    }
}

#[test]
fn laplacian_algebra_on_corpus() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for g in corpus(1, 40, 1, 200) {
        check_laplacian_algebra(&g, &mut rng);
        let (bridged, _) = bridge_components(&g);
        check_laplacian_algebra(&bridged, &mut rng);
    }
}

#[test]
fn zero_eigenvalue_multiplicity_counts_components() {
    for g in corpus(2, 24, 2, 120) {
        let (components, _) = connected_components(&g);
        let spectrum = dense_eigen_oracle(&laplacian(&g)).unwrap();
        let zeros = spectrum.values.iter().filter(|v| v.abs() < 1e-8).count();
        assert_eq!(zeros, components);
    }
}

#[test]
fn full_cube_edge_count_matches_enumeration() {
    let mut grid = VoxelGrid::new(2).unwrap();
    let mut coords = Vec::new();
    for x in 0..2 {
        for y in 0..2 {
            for z in 0..2 {
                grid.set([x, y, z], 1.0).unwrap();
                coords.push([x, y, z]);
            }
        }
    }
    for (conn, max_l1) in [(Connectivity::Six, 1), (Connectivity::Eighteen, 2), (Connectivity::TwentySix, 3)] {
        // every unordered pair whose coordinates differ by at most one per axis
        let mut expected = 0;
        for i in 0..coords.len() {
            for j in i + 1..coords.len() {
                let d: Vec<i64> = (0..3).map(|k| (coords[i][k] - coords[j][k]).abs()).collect();
                if d.iter().all(|&v| v <= 1) && d.iter().sum::<i64>() <= max_l1 {
                    expected += 1;
                }
            }
        }
        let g = build_adjacency_graph(&grid, conn).unwrap();
        assert_eq!(g.node_count(), 8);
        assert_eq!(g.edge_count(), expected);
        if conn == Connectivity::Six {
            assert_eq!(expected, 12);
        }
        assert_eq!(connected_components(&g).0, 1);
    }
}

#[test]
fn adjacency_independent_of_insertion_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let grid = random_grid(&mut rng, 60);
    let mut coords: Vec<[u32; 3]> = grid.iter().map(|(c, _)| c).collect();
    coords.shuffle(&mut rng);
    let mut shuffled = VoxelGrid::new(grid.resolution()).unwrap();
    for c in coords {
        shuffled.set(c.map(i64::from), 1.0).unwrap();
    }
    for conn in [Connectivity::Six, Connectivity::TwentySix] {
        assert_eq!(
            build_adjacency_graph(&grid, conn).unwrap(),
            build_adjacency_graph(&shuffled, conn).unwrap()
        );
    }
}

/// Brute-force search for the closest cross-component pair, merging greedily.
fn greedy_bridges(coords: &[[i64; 3]], labels: &[usize]) -> Vec<(usize, usize)> {
    let mut labels = labels.to_vec();
    let mut out = Vec::new();
    loop {
        let mut best: Option<(i64, usize, usize)> = None;
        for p in 0..coords.len() {
            for q in p + 1..coords.len() {
                if labels[p] == labels[q] {
                    continue;
                }
                let d = (0..3).map(|k| (coords[p][k] - coords[q][k]).pow(2)).sum::<i64>();
                if best.is_none_or(|b| (d, p, q) < b) {
                    best = Some((d, p, q));
                }
            }
        }
        let Some((_, p, q)) = best else { return out };
        let (keep, drop) = (labels[p], labels[q]);
        labels.iter_mut().filter(|l| **l == drop).for_each(|l| *l = keep);
        out.push((p, q));
    }
}

#[test]
fn bridges_follow_greedy_rule() {
    let mut grid = VoxelGrid::new(6).unwrap();
    for x in [0, 1, 5] {
        grid.set([x, 0, 0], 1.0).unwrap();
    }
    let g = build_adjacency_graph(&grid, Connectivity::Six).unwrap();
    // (0,1) are face neighbors already, so only (1,2) is bridged here
    let (b, added) = bridge_components(&g);
    assert_eq!(added, 1);
    assert_eq!(b.edges().iter().map(|e| (e.p, e.q)).collect::<Vec<_>>(), vec![(0, 1), (1, 2)]);

    // singletons at x = 0, 1, 5 with no edges at all
    let singletons = Graph::new(
        Positions::Voxels(vec![[0, 0, 0], [1, 0, 0], [5, 0, 0]]),
        vec![1.0; 3],
        vec![],
    )
    .unwrap();
    let coords = [[0, 0, 0], [1, 0, 0], [5, 0, 0]];
    assert_eq!(greedy_bridges(&coords, &[0, 1, 2]), vec![(0, 1), (1, 2)]);
    let (b, added) = bridge_components(&singletons);
    assert_eq!(added, 2);
    assert_eq!(b.edges().iter().map(|e| (e.p, e.q)).collect::<Vec<_>>(), vec![(0, 1), (1, 2)]);

    // three isolated voxels on a line: bridges (0,1) then (1,2)
    let mut spaced = VoxelGrid::new(12).unwrap();
    for x in [0, 2, 10] {
        spaced.set([x, 0, 0], 1.0).unwrap();
    }
    let g = build_adjacency_graph(&spaced, Connectivity::Six).unwrap();
    let coords = [[0, 0, 0], [2, 0, 0], [10, 0, 0]];
    assert_eq!(greedy_bridges(&coords, &connected_components(&g).1), vec![(0, 1), (1, 2)]);
    let (b, added) = bridge_components(&g);
    assert_eq!(added, 2);
    let edges: BTreeSet<(usize, usize)> = b.edges().iter().map(|e| (e.p, e.q)).collect();
    assert_eq!(edges, BTreeSet::from([(0, 1), (1, 2)]));

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..30 {
        let n = rng.gen_range(2..40);
        let grid = random_grid(&mut rng, n);
        let g = build_adjacency_graph(&grid, Connectivity::Six).unwrap();
        let coords: Vec<[i64; 3]> = grid.iter().map(|(c, _)| c.map(i64::from)).collect();
        let (_, labels) = connected_components(&g);
        let expected: BTreeSet<(usize, usize)> = greedy_bridges(&coords, &labels).into_iter().collect();
        let (b, added) = bridge_components(&g);
        let new: BTreeSet<(usize, usize)> = b.edges()[g.edge_count()..].iter().map(|e| (e.p, e.q)).collect();
        assert_eq!(added, expected.len());
        assert_eq!(new, expected);
        assert_eq!(connected_components(&b).0, 1);
    }
}

#[test]
fn knn_neighbors_include_k_nearest() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let n = rng.gen_range(2..60);
        let k = rng.gen_range(1..n.min(8));
        let points: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.gen(), rng.gen(), rng.gen()]).collect();
        let g = build_knn_graph(&points, k).unwrap();
        let adj = g.adjacency();
        for i in 0..n {
            assert!(!adj[i].is_empty());
            let mut others: Vec<(f64, usize)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| ((0..3).map(|d| (points[i][d] - points[j][d]).powi(2)).sum(), j))
                .collect();
            others.sort_by(|a, b| a.partial_cmp(b).unwrap());
            for &(_, j) in &others[..k] {
                assert!(adj[i].contains(&j), "node {i} lost neighbor {j}");
            }
        }
    }
}

#[test]
fn knn_one_dimensional_example() {
    let points = vec![vec![0.0], vec![1.0], vec![3.0]];
    let edges: Vec<(usize, usize)> = build_knn_graph(&points, 1)
        .unwrap()
        .edges()
        .iter()
        .map(|e| (e.p, e.q))
        .collect();
    // all-pairs distances: d01 = 1, d02 = 3, d12 = 2
    assert_eq!(edges, vec![(0, 1), (1, 2)]);
}

proptest! {
    #[test]
    fn knn_graph_laplacian_is_consistent(seed in any::<u64>(), n in 3usize..40) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = common::random_knn_graph(&mut rng, n);
        check_laplacian_algebra(&g, &mut rng);
    }
}
