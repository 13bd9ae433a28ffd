use proptest::prelude::*;
use voxel_spectral::eigen::dense_eigen_oracle;
use voxel_spectral::eval::{generate_shape, GenParams, Shape};
use voxel_spectral::graph::{build_adjacency_graph, Connectivity};
use voxel_spectral::layout::{bin_index, rasterize, spectral_layout, SpectralCoords};
use voxel_spectral::mesh::parse_off;
use voxel_spectral::sparse::laplacian;
use voxel_spectral::voxel::VoxelGrid;
use voxel_spectral::{embed_grid, embed_mesh, PipelineConfig};

fn line_grid(n: i64) -> VoxelGrid {
    let mut g = VoxelGrid::new(n as usize).unwrap();
    for x in 0..n {
        g.set([x, 0, 0], 1.0).unwrap();
    }
    g
}

fn full_cube() -> VoxelGrid {
    let mut g = VoxelGrid::new(2).unwrap();
    for x in 0..2 {
        for y in 0..2 {
            for z in 0..2 {
                g.set([x, y, z], 1.0).unwrap();
            }
        }
    }
    g
}

fn config(dim: usize) -> PipelineConfig {
    PipelineConfig { dim, ..Default::default() }
}

#[test]
fn three_voxel_line() {
    // Oracle eigenvectors of the path 0-1-2, with the largest entry made positive.
    let l = laplacian(&build_adjacency_graph(&line_grid(3), Connectivity::Six).unwrap());
    let oracle = dense_eigen_oracle(&l).unwrap();
    let fix = |v: &Vec<f64>| {
        let big = v.iter().enumerate().fold(0, |b, (i, x)| if x.abs() > v[b].abs() + 1e-9 { i } else { b });
        let s = v[big].signum();
        v.iter().map(|x| x * s).collect::<Vec<f64>>()
    };
    let (u2, u3) = (fix(&oracle.vectors[1]), fix(&oracle.vectors[2]));
    // u2 = (0.707, 0, -0.707) -> columns 2, 1, 0
    // u3 = (-0.408, 0.816, -0.408) -> rows 0, 2, 0
    let range = |v: &[f64]| v.iter().fold((f64::MAX, f64::MIN), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    let ((xlo, xhi), (ylo, yhi)) = (range(&u2), range(&u3));
    let cols: Vec<usize> = u2.iter().map(|&v| bin_index(v, xlo, xhi, 3).unwrap()).collect();
    let rows: Vec<usize> = u3.iter().map(|&v| bin_index(v, ylo, yhi, 3).unwrap()).collect();
    assert_eq!(cols, vec![2, 1, 0]);
    assert_eq!(rows, vec![0, 2, 0]);

    let (image, report) = embed_grid(&line_grid(3), &config(3)).unwrap();
    let expected = [1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0];
    assert_eq!(image.intensities(), &expected);
    assert_eq!(image.nonzero_count(), 3);
    assert_eq!(image.mass(), 3.0);
    assert_eq!(report.collision_count, 0);
    assert!((report.lambda2.unwrap() - 1.0).abs() < 1e-12);
    assert!((report.lambda3.unwrap() - 3.0).abs() < 1e-12);
}

#[test]
fn full_cube_mass_and_layout() {
    let (image, report) = embed_grid(&full_cube(), &config(2)).unwrap();
    assert_eq!(image.mass(), 8.0);
    assert_eq!(report.node_count, 8);
    assert_eq!(report.edge_count, 12);
    assert!((report.lambda2.unwrap() - 2.0).abs() < 1e-10);
    assert!((report.lambda3.unwrap() - 2.0).abs() < 1e-10);
}

#[test]
fn single_voxel_lands_in_center() {
    let (image, _) = embed_grid(&line_grid(1), &config(5)).unwrap();
    assert_eq!(image.get(2, 2), 1.0);
    assert_eq!(image.mass(), 1.0);
}

const UNIT_CUBE_OFF: &str = "OFF\n8 6 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n0 0 1\n1 0 1\n1 1 1\n0 1 1\n\
4 0 3 2 1\n4 4 5 6 7\n4 0 1 5 4\n4 2 3 7 6\n4 1 2 6 5\n4 0 4 7 3\n";

#[test]
fn cube_mesh_matches_grid_path() {
    let mesh = parse_off(UNIT_CUBE_OFF).unwrap();
    let cfg = PipelineConfig { resolution: 2, dim: 2, ..Default::default() };
    let (from_mesh, a) = embed_mesh(&mesh, &cfg).unwrap();
    let (from_grid, b) = embed_grid(&full_cube(), &cfg).unwrap();
    assert_eq!(from_mesh, from_grid);
    assert_eq!(a.without_timings(), b.without_timings());
    let (again, _) = embed_mesh(&mesh, &cfg).unwrap();
    assert_eq!(again, from_mesh);
}

#[test]
fn separated_blobs_are_bridged() {
    let mut grid = VoxelGrid::new(12).unwrap();
    for x in 0..3 {
        for y in 0..3 {
            grid.set([x, y, 0], 1.0).unwrap();
            grid.set([x + 8, y + 8, 5], 2.0).unwrap();
        }
    }
    let (image, report) = embed_grid(&grid, &config(16)).unwrap();
    assert_eq!(report.bridges_added, 1);
    assert!((image.mass() - 27.0).abs() < 1e-12);
}

#[test]
fn connected_shapes_need_no_bridges() {
    let params = GenParams { resolution: 16, rotate: true };
    for (seed, shape) in [
        (1, Shape::Sphere { radius: 5.0 }),
        (2, Shape::Box { half_extents: [4.0, 3.0, 2.0] }),
        (3, Shape::Torus { major: 4.5, minor: 1.8 }),
    ] {
        let grid = generate_shape(&shape, &params, seed).unwrap();
        let (image, report) = embed_grid(&grid, &config(24)).unwrap();
        assert_eq!(report.bridges_added, 0, "{shape:?}");
        assert_eq!(image.mass(), grid.len() as f64);
        assert!(report.lambda2.unwrap() <= report.lambda3.unwrap());
    }
}

#[test]
fn fill_adds_interior_mass() {
    let params = GenParams { resolution: 16, rotate: false };
    let shell = generate_shape(&Shape::Sphere { radius: 6.0 }, &params, 0).unwrap();
    let filled = PipelineConfig { fill: true, ..config(16) };
    let (image, report) = embed_grid(&shell, &filled).unwrap();
    assert!(report.node_count > shell.len());
    assert_eq!(image.mass(), report.node_count as f64);
}

fn arb_layout() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>)> {
    (1usize..60).prop_flat_map(|n| {
        (
            prop::collection::vec(-1.0f64..1.0, n),
            prop::collection::vec(-1.0f64..1.0, n),
            prop::collection::vec(0.01f64..10.0, n),
        )
    })
}

fn pixel_of(c: &SpectralCoords, i: usize, dim: usize) -> (usize, usize) {
    (
        bin_index(c.y[i], c.y_range.0, c.y_range.1, dim).unwrap(),
        bin_index(c.x[i], c.x_range.0, c.x_range.1, dim).unwrap(),
    )
}

proptest! {
    #[test]
    fn rasterization_conserves_mass((x, y, v) in arb_layout(), dim in 1usize..50) {
        let coords = spectral_layout(&x, &y).unwrap();
        let raster = rasterize(&coords, &v, dim).unwrap();
        let total: f64 = v.iter().sum();
        prop_assert!((raster.image.mass() - total).abs() <= 1e-9 * total);
        prop_assert!(raster.image.intensities().iter().all(|&p| p >= 0.0));
        prop_assert_eq!(rasterize(&coords, &v, dim).unwrap(), raster);
    }

    #[test]
    fn integer_refinement_never_merges((x, y, _) in arb_layout(), dim in 1usize..20, factor in 2usize..5) {
        let coords = spectral_layout(&x, &y).unwrap();
        for i in 0..x.len() {
            for j in i + 1..x.len() {
                if pixel_of(&coords, i, dim) != pixel_of(&coords, j, dim) {
                    prop_assert_ne!(pixel_of(&coords, i, dim * factor), pixel_of(&coords, j, dim * factor));
                }
            }
        }
    }

    #[test]
    fn ranges_are_exact((x, y, _) in arb_layout()) {
        let c = spectral_layout(&x, &y).unwrap();
        prop_assert_eq!(c.x_range.0, x.iter().copied().fold(f64::INFINITY, f64::min));
        prop_assert_eq!(c.x_range.1, x.iter().copied().fold(f64::NEG_INFINITY, f64::max));
        prop_assert_eq!(c.y_range.0, y.iter().copied().fold(f64::INFINITY, f64::min));
        prop_assert_eq!(c.y_range.1, y.iter().copied().fold(f64::NEG_INFINITY, f64::max));
    }
}
