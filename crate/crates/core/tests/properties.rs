use faer::c64;
use proptest::prelude::*;
use shellspec::assembly::{assemble_tables, QuadratureOptions, ShellKind, ShellOperator, HermitianOperator};
use shellspec::kernels::{k_a, pauli_dot, phi_a, w_a, PhysicalParams};
use shellspec::mesh::{generate_ellipsoid, generate_icosphere};
use shellspec::quadrature::regular_rule;
use shellspec::report::{to_json, LongTable};
use shellspec::shapes::ShapeSpec;

fn point() -> impl Strategy<Value = [f64; 3]> {
    prop::array::uniform3(-3.0..3.0f64).prop_filter("away from the origin", |x| x.iter().map(|v| v * v).sum::<f64>() > 1e-4)
}

fn rotation(angles: [f64; 3]) -> [[f64; 3]; 3] {
    let (a, b, c) = (angles[0], angles[1], angles[2]);
    let rz = |t: f64| [[t.cos(), -t.sin(), 0.0], [t.sin(), t.cos(), 0.0], [0.0, 0.0, 1.0]];
    let ry = |t: f64| [[t.cos(), 0.0, t.sin()], [0.0, 1.0, 0.0], [-t.sin(), 0.0, t.cos()]];
    let mul = |p: [[f64; 3]; 3], q: [[f64; 3]; 3]| {
        let mut r = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                r[i][j] = (0..3).map(|k| p[i][k] * q[k][j]).sum();
            }
        }
        r
    };
    mul(mul(rz(a), ry(b)), rz(c))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pauli_square_is_the_squared_length(v in prop::array::uniform3(-5.0..5.0f64)) {
        let s = pauli_dot(v);
        let n2: f64 = v.iter().map(|x| x * x).sum();
        for i in 0..2 {
            for j in 0..2 {
                let sq = s[i][0] * s[0][j] + s[i][1] * s[1][j];
                let expect = if i == j { n2 } else { 0.0 };
                prop_assert!((sq - c64::new(expect, 0.0)).norm() < 1e-12 * (1.0 + n2));
            }
        }
    }

    #[test]
    fn kernel_blocks_and_reflection(x in point(), a in -0.99..0.99f64, m in 0.2..3.0f64) {
        let p = PhysicalParams::new(m, a * m).unwrap();
        let phi = phi_a(x, &p).unwrap();
        let k = k_a(x, &p).unwrap();
        let w = w_a(x, &p).unwrap();
        let neg = phi_a([-x[0], -x[1], -x[2]], &p).unwrap().adjoint();
        for r in 0..4 {
            for c in 0..4 {
                let scale = phi.get(r, c).norm().max(1e-300);
                prop_assert!((phi.get(r, c) - neg.get(r, c)).norm() <= 1e-12 * scale.max(k));
            }
        }
        for r in 0..2 {
            prop_assert!((phi.get(r, r).re - (p.a + p.m) * k).abs() <= 1e-12 * k.max(1.0));
            for c in 0..2 {
                prop_assert!((phi.get(r, c + 2) - w.get(r, c)).norm() <= 1e-12 * w.get(r, c).norm().max(1e-300));
            }
        }
    }

    #[test]
    fn kernel_decays_monotonically(r1 in 0.1..4.0f64, dr in 0.01..2.0f64, a in -0.9..0.9f64) {
        let p = PhysicalParams::new(1.0, a).unwrap();
        prop_assert!(k_a([r1 + dr, 0.0, 0.0], &p).unwrap() < k_a([r1, 0.0, 0.0], &p).unwrap());
    }

    #[test]
    fn rules_integrate_random_polynomials(degree in 1usize..=10, seed in prop::array::uniform4(-1.0..1.0f64)) {
        // A random polynomial of total degree `degree` in two barycentrics.
        let rule = regular_rule::<f64>(degree).unwrap();
        let fine = regular_rule::<f64>(10).unwrap().subdivided(1);
        let f = |l: &[f64; 3]| {
            seed[0] + seed[1] * l[0].powi(degree as i32) + seed[2] * l[1].powi((degree / 2) as i32) * l[2].powi((degree - degree / 2) as i32) + if degree >= 2 { seed[3] * l[0] * l[1] } else { 0.0 }
        };
        let q: f64 = rule.points.iter().zip(&rule.weights).map(|(l, w)| w * f(l)).sum();
        let exact: f64 = fine.points.iter().zip(&fine.weights).map(|(l, w)| w * f(l)).sum();
        prop_assert!((q - exact).abs() < 1e-12);
    }

    #[test]
    fn float_output_round_trips(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        let json = to_json(&serde_json::json!({ "x": x })).unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        let back: f64 = v["x"].to_string().parse().unwrap();
        prop_assert!(back == x);
    }

    #[test]
    fn shape_specs_round_trip(ax in prop::array::uniform3(0.1..10.0f64), s in 0u32..=6, r in 0.1..5.0f64) {
        for spec in [
            ShapeSpec::Ellipsoid { axes: ax, subdivisions: s },
            ShapeSpec::Icosphere { radius: r, subdivisions: s },
            ShapeSpec::Spheroid { a: ax[0], b: ax[1], subdivisions: s },
        ] {
            let back: ShapeSpec = spec.to_string().parse().unwrap();
            prop_assert_eq!(back, spec);
        }
    }

    #[test]
    fn long_table_has_one_row_per_leaf(values in prop::collection::vec(-1e3..1e3f64, 1..20)) {
        let mut t = LongTable::default();
        t.push_record("s", 1.0, Some(0.5), &serde_json::json!({ "v": values, "flag": true })).unwrap();
        prop_assert_eq!(t.rows.len(), values.len() + 1);
        prop_assert_eq!(t.to_csv().lines().count(), values.len() + 2);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn mesh_measures_scale(t in 0.2..5.0f64, s in 0u32..3) {
        let mesh = generate_icosphere(1.0f64, s).unwrap();
        let scaled = mesh.scaled(t).unwrap();
        prop_assert!((scaled.area() - t * t * mesh.area()).abs() < 1e-12 * scaled.area());
        prop_assert!((scaled.volume() - t.powi(3) * mesh.volume()).abs() < 1e-12 * scaled.volume());
    }

    /// The discrete spectrum of `C` does not depend on how the surface is placed.
    #[test]
    fn spectrum_is_invariant_under_rigid_motions(angles in prop::array::uniform3(0.0..6.3f64), shift in prop::array::uniform3(-2.0..2.0f64)) {
        let mesh = generate_ellipsoid([1.4f64, 1.0, 0.8], 1).unwrap();
        let rot = rotation(angles);
        let moved_vertices: Vec<[f64; 3]> = mesh.vertices().iter().map(|v| {
            std::array::from_fn(|i| (0..3).map(|k| rot[i][k] * v[k]).sum::<f64>() + shift[i])
        }).collect();
        let moved = shellspec::mesh::SurfaceMesh::new(moved_vertices, mesh.triangles().to_vec()).unwrap();
        let opts = QuadratureOptions::default();
        let eig = |m: &shellspec::Mesh| {
            let t = assemble_tables(m, 0.6, false, &opts);
            let op = ShellOperator::new(&t, ShellKind::C { a: 0.8, m: 1.0 });
            let d = shellspec::assembly::DenseOperator::materialize(&op, t.sqrt_area(), 4, 0.0);
            prop_assert_eq!(op.dim(), 320);
            Ok(shellspec::spectral::weighted_hermitian_eigenvalues(&d).unwrap())
        };
        let (a, b) = (eig(&mesh)?, eig(&moved)?);
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-9, "{} vs {}", x, y);
        }
    }
}
