use std::f64::consts::PI;

use shellspec::mesh::{
    generate_ellipsoid, generate_icosphere, generate_spheroid, mesh_stats, parse_off, surface_distance, two_copy, write_off,
    MeshError, SurfaceMesh,
};
use shellspec::{Mesh, Mesh32};

const CUBE: &str = "OFF
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

#[test]
fn icosphere_counts_and_convergence() {
    let mut prev_err = f64::INFINITY;
    for s in 0..=4u32 {
        let mesh = generate_icosphere(1.0f64, s).unwrap();
        let st = mesh_stats(&mesh);
        assert_eq!(st.panels, 20 * 4usize.pow(s));
        assert_eq!(st.vertices, 10 * 4usize.pow(s) + 2);
        // Euler characteristic of a sphere.
        assert_eq!(st.vertices as i64 - 3 * st.panels as i64 / 2 + st.panels as i64, 2);
        let err = (4.0 * PI - st.area).abs();
        assert!(err < prev_err);
        prev_err = err;
        assert!(st.volume > 0.0 && st.volume < 4.0 * PI / 3.0);
        let flux = mesh.normal_flux();
        assert!(flux.iter().all(|f| f.abs() < 1e-12), "closed surface has zero normal flux: {flux:?}");
    }
    assert!(prev_err / (4.0 * PI) < 5e-3);
}

#[test]
fn generated_normals_point_outward() {
    for mesh in [
        generate_icosphere(2.0f64, 2).unwrap(),
        generate_ellipsoid([2.0, 1.0, 0.5], 2).unwrap(),
        generate_spheroid(3.0, 1.0, 2).unwrap(),
    ] {
        let c = mesh.center();
        for (x, n) in mesh.centroids().iter().zip(mesh.normals()) {
            let d: f64 = (0..3).map(|k| (x[k] - c[k]) * n[k]).sum();
            assert!(d > 0.0);
        }
    }
}

#[test]
fn ellipsoid_volume_converges() {
    let exact = 4.0 * PI / 3.0 * 2.0 * 1.0 * 0.5;
    let v = generate_ellipsoid([2.0, 1.0, 0.5], 4).unwrap().volume();
    assert!((v - exact).abs() / exact < 5e-3);
    assert!(generate_ellipsoid([1.0, -1.0, 1.0], 1).is_err());
    assert!(generate_icosphere(0.0f64, 1).is_err());
}

#[test]
fn cube_off_is_triangulated_and_measured() {
    let (mesh, repair) = parse_off::<f64>(CUBE).unwrap();
    assert_eq!(mesh.num_panels(), 12);
    assert!((mesh.area() - 6.0).abs() < 1e-14);
    assert!((mesh.volume() - 1.0).abs() < 1e-14);
    assert_eq!(repair.rewound, 0);
    assert!(!repair.flipped);
}

#[test]
fn inward_orientation_is_repaired() {
    // Reverse every face of the cube.
    let text: String = CUBE
        .lines()
        .map(|l| {
            let f: Vec<&str> = l.split_whitespace().collect();
            if f.len() == 5 && f[0] == "4" {
                format!("4 {} {} {} {}\n", f[4], f[3], f[2], f[1])
            } else {
                format!("{l}\n")
            }
        })
        .collect();
    let (mesh, repair) = parse_off::<f64>(&text).unwrap();
    assert!(repair.flipped);
    assert!((mesh.volume() - 1.0).abs() < 1e-14);
}

#[test]
fn mixed_orientation_is_rewound() {
    let text = CUBE.replace("4 0 1 5 4", "4 4 5 1 0");
    let (mesh, repair) = parse_off::<f64>(&text).unwrap();
    assert_eq!(repair.rewound, 2);
    assert!((mesh.volume() - 1.0).abs() < 1e-14);
}

#[test]
fn holes_and_garbage_are_rejected() {
    let hole = CUBE.replace("8 6 0", "8 5 0").replace("4 0 4 7 3\n", "");
    assert!(matches!(parse_off::<f64>(&hole), Err(MeshError::BoundaryEdge(..))));
    assert!(matches!(parse_off::<f64>("OFF\n3 1 0\n0 0 0\n1 0 0\n"), Err(MeshError::Parse { .. })));
    assert!(matches!(parse_off::<f64>("PLY\n"), Err(MeshError::Parse { .. })));
    let bad_index = CUBE.replace("4 0 4 7 3", "4 0 4 7 9");
    assert!(parse_off::<f64>(&bad_index).is_err());
}

#[test]
fn off_round_trip_preserves_geometry() {
    let mesh = generate_ellipsoid([1.5f64, 1.0, 0.7], 2).unwrap();
    let (back, _) = parse_off::<f64>(&write_off(&mesh)).unwrap();
    assert_eq!(back.num_panels(), mesh.num_panels());
    assert!((back.area() - mesh.area()).abs() < 1e-12);
    assert!((back.volume() - mesh.volume()).abs() < 1e-12);
}

#[test]
fn construction_checks_topology() {
    let v: Vec<[f64; 3]> = vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let tet = vec![[0, 2, 1], [0, 1, 3], [1, 2, 3], [0, 3, 2]];
    let mesh = SurfaceMesh::new(v.clone(), tet.clone()).unwrap();
    assert!((mesh.volume() - 1.0 / 6.0).abs() < 1e-15);
    let mut flipped = tet.clone();
    flipped[0] = [0, 1, 2];
    assert!(SurfaceMesh::new(v.clone(), flipped).is_err());
    let mut degenerate = v.clone();
    degenerate[3] = [0.5, 0.5, 0.0];
    assert!(SurfaceMesh::new(degenerate, tet).is_err());
}

#[test]
fn scaling_and_two_copies() {
    let mesh = generate_icosphere(1.0f64, 2).unwrap();
    let t = 0.5f64;
    let small = mesh.scaled(t).unwrap();
    assert!((small.area() - t * t * mesh.area()).abs() < 1e-12);
    assert!((small.volume() - t.powi(3) * mesh.volume()).abs() < 1e-12);

    let pair = two_copy(&mesh, t, [4.0, 0.0, 0.0]).unwrap();
    assert_eq!(pair.num_panels(), 2 * mesh.num_panels());
    assert!((pair.volume() - 2.0 * t.powi(3) * mesh.volume()).abs() < 1e-12);
    assert!(matches!(two_copy(&mesh, t, [0.8, 0.0, 0.0]), Err(MeshError::Overlap { .. })));
    let d = surface_distance(&mesh, &small);
    assert!(d > 0.0);
}

#[test]
fn single_precision_meshes_match() {
    let m64: Mesh = generate_icosphere(1.0, 2).unwrap();
    let m32: Mesh32 = m64.cast();
    assert!((m32.area() as f64 - m64.area()).abs() < 1e-5 * m64.area());
    assert_eq!(m32.num_panels(), m64.num_panels());
}

#[test]
fn content_hash_identifies_meshes() {
    let a = generate_icosphere(1.0f64, 1).unwrap();
    let b = generate_icosphere(1.0f64, 1).unwrap();
    let c = generate_icosphere(1.0f64, 2).unwrap();
    assert_eq!(a.id(), b.id());
    assert_ne!(a.id(), c.id());
}
