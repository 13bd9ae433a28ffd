#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use voxel_spectral::graph::{build_adjacency_graph, build_knn_graph, Connectivity, Graph};
use voxel_spectral::voxel::VoxelGrid;

/// `n` distinct random voxels in the smallest cube that is at most half full.
pub fn random_grid(rng: &mut ChaCha8Rng, n: usize) -> VoxelGrid {
    let r = ((2.0 * n as f64).cbrt().ceil() as usize).max(2);
    let mut all: Vec<[i64; 3]> = Vec::new();
    for x in 0..r as i64 {
        for y in 0..r as i64 {
            for z in 0..r as i64 {
                all.push([x, y, z]);
            }
        }
    }
    all.shuffle(rng);
    let mut grid = VoxelGrid::new(r).unwrap();
    for c in &all[..n] {
        grid.set(*c, 1.0).unwrap();
    }
    grid
}

pub fn random_voxel_graph(rng: &mut ChaCha8Rng, n: usize) -> Graph {
    let conn = [Connectivity::Six, Connectivity::Eighteen, Connectivity::TwentySix][rng.gen_range(0..3)];
    build_adjacency_graph(&random_grid(rng, n), conn).unwrap()
}

pub fn random_knn_graph(rng: &mut ChaCha8Rng, n: usize) -> Graph {
    let d = rng.gen_range(2..=3);
    let points: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.gen::<f64>()).collect()).collect();
    let k = rng.gen_range(1..=6.min(n - 1));
    build_knn_graph(&points, k).unwrap()
}

/// Mixed corpus of (possibly disconnected) graphs with `n` in `[lo, hi]`.
pub fn corpus(seed: u64, count: usize, lo: usize, hi: usize) -> Vec<Graph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let n = rng.gen_range(lo..=hi);
            if i % 2 == 0 {
                random_voxel_graph(&mut rng, n)
            } else {
                random_knn_graph(&mut rng, n)
            }
        })
        .collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
