use std::collections::BTreeSet;

use proptest::prelude::*;
use voxel_spectral::mesh::{parse_off, write_off, Mesh};
use voxel_spectral::voxel::{normalize_mesh, voxelize_surface};

const UNIT_CUBE_OFF: &str = "OFF
8 6 0
0 0 0
1 0 0
1 1 0
0 1 0
0 0 1
1 0 1
1 1 1
0 1 1
4 0 3 2 1
4 4 5 6 7
4 0 1 5 4
4 2 3 7 6
4 1 2 6 5
4 0 4 7 3
";

/// Voxels containing points sampled on a barycentric lattice of every
/// triangle. Independent of the separating-axis code path.
fn sampled_voxels(mesh: &Mesh, resolution: usize, per_side: usize) -> BTreeSet<[u32; 3]> {
    let r = resolution as f64;
    let mut out = BTreeSet::new();
    for f in 0..mesh.face_count() {
        let [a, b, c] = mesh.triangle(f);
        for i in 0..=per_side {
            for j in 0..=per_side - i {
                let (s, t) = (i as f64 / per_side as f64, j as f64 / per_side as f64);
                let p = [0, 1, 2].map(|k| a[k] + s * (b[k] - a[k]) + t * (c[k] - a[k]));
                let cell = p.map(|x| ((x * r).floor() as i64).clamp(0, resolution as i64 - 1) as u32);
                out.insert(cell);
            }
        }
    }
    out
}

fn occupied(mesh: &Mesh, resolution: usize) -> BTreeSet<[u32; 3]> {
    voxelize_surface(mesh, resolution)
        .unwrap()
        .iter()
        .map(|(c, _)| c)
        .collect()
}

#[test]
fn unit_cube_surface_at_resolution_two() {
    let mesh = parse_off(UNIT_CUBE_OFF).unwrap();
    assert_eq!(mesh.face_count(), 12);
    let got = occupied(&mesh, 2);
    // ~1.1e5 samples per triangle
    let oracle = sampled_voxels(&mesh, 2, 460);
    assert!(oracle.is_subset(&got));
    assert_eq!(got.len(), 8);
    assert_eq!(oracle.len(), 8);
}

#[test]
fn plane_on_slab_boundary_marks_both_slabs() {
    let mesh = Mesh {
        vertices: vec![[0.0, 0.0, 0.25], [2.0, 0.0, 0.25], [0.0, 2.0, 0.25]],
        faces: vec![[0, 1, 2]],
    };
    let got = occupied(&mesh, 4);
    let oracle = sampled_voxels(&mesh, 4, 460);
    assert!(oracle.is_subset(&got));
    let zs: BTreeSet<u32> = got.iter().map(|c| c[2]).collect();
    assert_eq!(zs, BTreeSet::from([0, 1]));
    for z in [0, 1] {
        for x in 0..4 {
            for y in 0..4 {
                assert!(got.contains(&[x, y, z]), "missing ({x},{y},{z})");
            }
        }
    }
}

#[test]
fn sampled_points_always_covered() {
    let mesh = normalize_mesh(&Mesh {
        vertices: vec![
            [0.1, 0.2, 0.3],
            [0.9, 0.15, 0.4],
            [0.5, 0.8, 0.05],
            [0.3, 0.4, 0.95],
        ],
        faces: vec![[0, 1, 2], [0, 1, 3], [1, 2, 3], [0, 2, 3]],
    })
    .unwrap();
    for resolution in [3, 7, 16] {
        let got = occupied(&mesh, resolution);
        assert!(sampled_voxels(&mesh, resolution, 300).is_subset(&got));
    }
}

#[test]
fn doubling_resolution_never_loses_voxels() {
    let mesh = normalize_mesh(&parse_off(UNIT_CUBE_OFF).unwrap()).unwrap();
    let mut previous = 0;
    for resolution in [1, 2, 4, 8, 16] {
        let count = occupied(&mesh, resolution).len();
        assert!(count >= previous);
        previous = count;
    }
}

fn arb_mesh() -> impl Strategy<Value = Mesh> {
    (3usize..12).prop_flat_map(|n| {
        (
            prop::collection::vec(prop::array::uniform3(-100.0f64..100.0), n),
            prop::collection::vec(prop::array::uniform3(0..n), 1..10),
        )
            .prop_map(|(vertices, faces)| {
                let faces = faces
                    .into_iter()
                    .filter(|f| f[0] != f[1] && f[1] != f[2] && f[0] != f[2])
                    .collect();
                Mesh { vertices, faces }
            })
    })
}

proptest! {
    #[test]
    fn off_round_trip(mesh in arb_mesh()) {
        prop_assert_eq!(parse_off(&write_off(&mesh)).unwrap(), mesh);
    }

    #[test]
    fn voxelization_ignores_face_order(mesh in arb_mesh(), rot in 0usize..10) {
        prop_assume!(!mesh.faces.is_empty());
        let Ok(mesh) = normalize_mesh(&mesh) else { return Ok(()) };
        let mut shuffled = mesh.clone();
        let k = rot % shuffled.faces.len();
        shuffled.faces.rotate_left(k);
        shuffled.faces.reverse();
        prop_assert_eq!(voxelize_surface(&mesh, 8).unwrap(), voxelize_surface(&shuffled, 8).unwrap());
    }

    #[test]
    fn normalized_mesh_fits_unit_cube(mesh in arb_mesh()) {
        let Ok(out) = normalize_mesh(&mesh) else { return Ok(()) };
        let (lo, hi) = out.bounds().unwrap();
        let sides: Vec<f64> = (0..3).map(|k| hi[k] - lo[k]).collect();
        let longest = sides.iter().copied().fold(0.0, f64::max);
        prop_assert!((longest - 1.0).abs() < 1e-12);
        for k in 0..3 {
            prop_assert!(lo[k] >= -1e-12 && hi[k] <= 1.0 + 1e-12);
            prop_assert!((lo[k] + hi[k] - 1.0).abs() < 1e-12, "not centered on axis {}", k);
        }
    }
}
