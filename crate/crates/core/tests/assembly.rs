use faer::c64;
use shellspec::assembly::{
    assemble_c, assemble_dc_da, assemble_k, assemble_tables, assemble_w, evaluate_potential, multiplier, pair_integrals,
    read_dump, write_dump, AssemblyError, DensityVector, DumpHeader, MultiplierKind, PairQuadrature, QuadratureOptions,
};
use shellspec::geometry::{self, Vec3};
use shellspec::mesh::generate_icosphere;
use shellspec::quadrature::{classify_pair, regular_rule, PanelPairClass, DEFAULT_ETA};
use shellspec::{Mesh, Params};

fn sphere(s: u32) -> Mesh {
    generate_icosphere(1.0, s).unwrap()
}

/// `∫∫ e^{−κr}/(4πr)` and `∫∫ e^{−κr}(1+κr)(x−y)/(4πr³)` on fine rules.
fn brute_pair(mesh: &Mesh, i: usize, j: usize, kappa: f64, levels: u32) -> (f64, Vec3<f64>) {
    let rule = regular_rule::<f64>(8).unwrap().subdivided(levels);
    let (pi, pj) = (mesh.panel(i), mesh.panel(j));
    let (ai, aj) = (mesh.areas()[i], mesh.areas()[j]);
    let inner: Vec<_> = rule.map(&pj, aj).collect();
    let (mut s, mut v) = (0.0, [0.0; 3]);
    for (x, wx) in rule.map(&pi, ai) {
        for &(y, wy) in &inner {
            let d = geometry::sub(x, y);
            let r = geometry::norm(d);
            let e = (-kappa * r).exp() / (4.0 * std::f64::consts::PI);
            s += wx * wy * e / r;
            v = geometry::add(v, geometry::scale(d, wx * wy * e * (1.0 + kappa * r) / (r * r * r)));
        }
    }
    (s, v)
}

fn find_pair(mesh: &Mesh, want: impl Fn(PanelPairClass) -> bool) -> (usize, usize, PanelPairClass) {
    for j in 1..mesh.num_panels() {
        let c = classify_pair(mesh, 0, j, DEFAULT_ETA);
        if want(c) {
            return (0, j, c);
        }
    }
    panic!("no such pair");
}

#[test]
fn far_and_near_pairs_match_brute_force() {
    let mesh = sphere(2);
    let quad = PairQuadrature::<f64>::new(&QuadratureOptions::default());
    for kappa in [0.0, 0.8] {
        for (want, levels, tol) in [
            (&(|c| c == PanelPairClass::Far) as &dyn Fn(PanelPairClass) -> bool, 1, 1e-5),
            (&|c| matches!(c, PanelPairClass::Near { .. }), 3, 1e-6),
        ] {
            let (i, j, class) = find_pair(&mesh, want);
            let p = pair_integrals(&mesh, i, j, class, kappa, &quad, false);
            let (s, v) = brute_pair(&mesh, i, j, kappa, levels);
            assert!((p.s - s).abs() < tol * s, "{class:?} κ={kappa}: {} vs {s}", p.s);
            let vn = geometry::norm(v);
            assert!(geometry::norm(geometry::sub(p.v, v)) < tol * vn, "{class:?} κ={kappa}: {:e}", geometry::norm(geometry::sub(p.v, v)) / vn);
        }
    }
}

#[test]
fn touching_pairs_converge_to_graded_reference() {
    // Brute force converges slowly near the shared edge; compare at a loose
    // tolerance that still catches missing singular treatment.
    let mesh = sphere(1);
    let quad = PairQuadrature::<f64>::new(&QuadratureOptions::default());
    let (i, j, class) = find_pair(&mesh, |c| c == PanelPairClass::EdgeAdjacent);
    let p = pair_integrals(&mesh, i, j, class, 0.5, &quad, false);
    let (s, _) = brute_pair(&mesh, i, j, 0.5, 5);
    assert!((p.s - s).abs() < 2e-3 * s, "{} vs {s}", p.s);
}

fn params(a: f64) -> Params {
    Params::new(1.0, a).unwrap()
}

#[test]
fn c_is_the_block_matrix_of_k_and_w() {
    let mesh = sphere(1);
    for a in [-0.6, 0.0, 1.0] {
        let p = params(a);
        let (c, k, w) = (assemble_c(&mesh, &p), assemble_k(&mesh, &p), assemble_w(&mesh, &p));
        let (c, k, w) = (c.frame(), k.frame(), w.frame());
        for i in 0..mesh.num_panels() {
            for j in 0..mesh.num_panels() {
                for r in 0..2 {
                    for s in 0..2 {
                        let kk = k[(2 * i + r, 2 * j + s)];
                        let ww = w[(2 * i + r, 2 * j + s)];
                        assert_eq!(c[(4 * i + r, 4 * j + s)], kk * (a + 1.0));
                        assert_eq!(c[(4 * i + r + 2, 4 * j + s + 2)], kk * (a - 1.0));
                        assert_eq!(c[(4 * i + r, 4 * j + s + 2)], ww);
                        assert_eq!(c[(4 * i + r + 2, 4 * j + s)], ww);
                    }
                }
            }
        }
    }
}

#[test]
fn operators_are_weighted_hermitian() {
    let mesh = sphere(2);
    let c = assemble_c(&mesh, &params(0.3));
    assert!(c.hermiticity_defect() < 1e-12);
    assert!(c.is_finite());
    let n = multiplier(&mesh, MultiplierKind::AlphaN);
    assert!(n.hermiticity_defect() < 1e-14);
}

#[test]
fn symmetrization_residual_is_small() {
    let meshes = [sphere(1), sphere(2)];
    for mesh in &meshes {
        let t = assemble_tables(mesh, 0.0, false, &QuadratureOptions::default());
        let r = t.skew_residual();
        assert!(r.scalar <= 1e-4 && r.pauli <= 1e-4, "{r:?}");
    }
}

#[test]
fn normal_multipliers_square_to_identity() {
    let mesh = sphere(1);
    for kind in [MultiplierKind::AlphaN, MultiplierKind::SigmaN] {
        let f = multiplier(&mesh, kind);
        let m = f.frame();
        let sq = m * m;
        for i in 0..sq.nrows() {
            for j in 0..sq.ncols() {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((sq[(i, j)] - c64::new(expect, 0.0)).norm() < 1e-14);
            }
        }
    }
}

#[test]
fn parameter_derivative_matches_finite_differences() {
    let mesh = sphere(1);
    let a = 0.35;
    let h = 1e-4;
    let d = assemble_dc_da(&mesh, &params(a)).unwrap();
    let (cp, cm) = (assemble_c(&mesh, &params(a + h)), assemble_c(&mesh, &params(a - h)));
    let fd = (cp.frame() - cm.frame()) * faer::Scale(c64::new(0.5 / h, 0.0));
    let diff = (&fd - d.frame()).norm_l2() / d.frame().norm_l2();
    assert!(diff < 1e-5, "relative difference {diff}");
    assert!(matches!(assemble_dc_da(&mesh, &params(1.0)), Err(AssemblyError::Parameter(_))));
}

#[test]
fn single_layer_is_positive_on_the_sphere() {
    let mesh = sphere(2);
    let k = assemble_k(&mesh, &params(1.0));
    let eig = shellspec::spectral::weighted_hermitian_eigenvalues(&k).unwrap();
    assert!(eig.iter().all(|&v| v > 0.0));
    let top = eig.iter().copied().fold(0.0, f64::max);
    assert!(top < 1.0 && top > 0.97, "‖K‖ = {top}");
}

#[test]
fn uniform_shell_potential_matches_newton() {
    // Unit density in the first component at κ = 0: the potential of a
    // uniform spherical shell is 1 inside and 1/|x| outside, and its field
    // vanishes inside and equals x/|x|³ outside.
    let mesh = sphere(3);
    let g = DensityVector::from_fn(mesh.num_panels(), 4, |_, c| c64::new(if c == 0 { 1.0 } else { 0.0 }, 0.0));
    let p = params(1.0);
    let points = [[0.0, 0.0, 0.0], [0.2, -0.3, 0.1], [0.0, 0.0, 2.0], [1.5, 1.0, -0.5]];
    let v = evaluate_potential(&mesh, &g, &points, &p).unwrap();
    for (x, phi) in points.iter().zip(&v) {
        let r = geometry::norm(*x);
        let (pot, field) = if r < 1.0 { (1.0, [0.0; 3]) } else { (1.0 / r, geometry::scale(*x, 1.0 / (r * r * r))) };
        let expect = [
            c64::new(2.0 * pot, 0.0),
            c64::new(0.0, 0.0),
            c64::new(0.0, field[2]),
            c64::new(-field[1], field[0]),
        ];
        for c in 0..4 {
            assert!((phi[c] - expect[c]).norm() < 1e-2, "x = {x:?}, component {c}: {} vs {}", phi[c], expect[c]);
        }
    }
}

#[test]
fn potential_refuses_points_on_the_surface() {
    let mesh = sphere(1);
    let g = DensityVector::zeros(mesh.num_panels(), 4);
    let on = mesh.centroids()[3];
    let err = evaluate_potential(&mesh, &g, &[on], &params(0.0)).unwrap_err();
    assert!(matches!(err, AssemblyError::PointOnSurface { index: 0, .. }));
}

#[test]
fn dump_round_trips() {
    let mesh = sphere(1);
    let p = params(0.25);
    let c = assemble_c(&mesh, &p);
    let header = DumpHeader { panels: 80, components: 4, a: p.a, m: p.m, mesh_hash: shellspec::assembly::mesh_hash64(&mesh.content_hash()) };
    let mut buf = Vec::new();
    write_dump(&mut buf, &c, &header).unwrap();
    assert_eq!(buf.len(), 8 + 5 * 8 + 320 * 320 * 16);
    let (h, m) = read_dump(buf.as_slice()).unwrap();
    assert_eq!(h, header);
    assert_eq!(m, c.entries());
    assert!(read_dump(&buf[..100]).is_err());
}
