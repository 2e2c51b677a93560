use faer::{c64, Mat};
use rand::{Rng, SeedableRng};
use shellspec::assembly::{assemble_k, assemble_tables, assemble_w, DenseOperator, QuadratureOptions, ShellKind, ShellOperator};
use shellspec::mesh::generate_icosphere;
use shellspec::spectral::{
    lambda_omega_bisect, lambda_omega_qep, lambda_omega_qep_op, operator_norm, partial_eig, quadratic_forms,
    reconstruction_error, weighted_hermitian_eig, weighted_hermitian_eigenvalues, KrylovOptions, LambdaMethod, Which,
};
use shellspec::Params;

fn random_weighted(n_panels: usize, d: usize, seed: u64) -> (DenseOperator, Vec<f64>) {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let areas: Vec<f64> = (0..n_panels).map(|_| rng.random_range(0.5..2.0)).collect();
    let n = n_panels * d;
    let h = Mat::<c64>::from_fn(n, n, |_, _| c64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    let h = &h + h.adjoint();
    // Entries of a weighted-self-adjoint operator: M^{-1} H.
    let entries = Mat::from_fn(n, n, |i, j| h[(i, j)] / areas[i / d]);
    (DenseOperator::from_entries(entries.as_ref(), &areas, d), areas)
}

#[test]
fn dense_eigensolve_reconstructs_the_operator() {
    let (op, areas) = random_weighted(12, 2, 7);
    assert!(op.symmetry_residual < 1e-12);
    let rep = weighted_hermitian_eig(&op).unwrap();
    assert!(reconstruction_error(&op, &rep) < 1e-12);
    assert!(rep.max_residual < 1e-12);
    assert!(rep.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
    for (i, u) in rep.eigenvectors.iter().enumerate() {
        for (j, v) in rep.eigenvectors.iter().enumerate().take(i + 1) {
            let ip = u.weighted_inner(v, &areas);
            let expect = if i == j { 1.0 } else { 0.0 };
            assert!((ip - c64::new(expect, 0.0)).norm() < 1e-12);
        }
    }
    let trace: f64 = (0..op.dim()).map(|i| op.frame()[(i, i)].re).sum();
    assert!((rep.eigenvalues.iter().sum::<f64>() - trace).abs() < 1e-10);
}

#[test]
fn eigenvectors_have_a_deterministic_phase() {
    let (op, _) = random_weighted(8, 2, 3);
    let a = weighted_hermitian_eig(&op).unwrap();
    let b = weighted_hermitian_eig(&op).unwrap();
    assert_eq!(a.eigenvectors, b.eigenvectors);
}

#[test]
fn krylov_matches_dense_extremes() {
    let mesh = generate_icosphere(1.0f64, 2).unwrap();
    let tables = assemble_tables(&mesh, 0.6, false, &QuadratureOptions::default());
    let c = ShellOperator::new(&tables, ShellKind::C { a: 0.8, m: 1.0 });
    let dense = shellspec::assembly::dense_from_tables(&tables, ShellKind::C { a: 0.8, m: 1.0 });
    let all = weighted_hermitian_eigenvalues(&dense).unwrap();
    let opts = KrylovOptions { dense_below: 0, ..Default::default() };
    let top = partial_eig(&c, 6, Which::LargestAlgebraic, &opts).unwrap();
    for (k, v) in top.values.iter().enumerate() {
        assert!((v - all[k]).abs() < 1e-8, "top {k}: {v} vs {}", all[k]);
    }
    let bottom = partial_eig(&c, 4, Which::SmallestAlgebraic, &opts).unwrap();
    for (k, v) in bottom.values.iter().enumerate() {
        let expect = all[all.len() - 1 - k];
        assert!((v - expect).abs() < 1e-8, "bottom {k}: {v} vs {expect}");
    }
    assert!(top.residuals.iter().all(|r| *r < 1e-7));
}

#[test]
fn critical_coupling_methods_agree_on_the_sphere() {
    let mesh = generate_icosphere(1.0f64, 1).unwrap();
    let p = Params::new(1.0, 1.0).unwrap();
    let (k, w) = (assemble_k(&mesh, &p), assemble_w(&mesh, &p));
    let q = lambda_omega_qep(&k, &w, 1.0).unwrap();
    let b = lambda_omega_bisect(&k, &w, 1.0).unwrap();
    assert_eq!(q.method, LambdaMethod::Qep);
    assert_eq!(b.method, LambdaMethod::Bisection);
    assert!((q.lambda_omega - b.lambda_omega).abs() < 1e-6 * q.lambda_omega);
    let ball = 4.0 * (1.0 + 1.25f64.sqrt());
    // The 80-panel sphere sits about 3% below the ball value.
    assert!((q.lambda_omega - ball).abs() < 0.03 * ball, "{}", q.lambda_omega);
    assert!(q.bounds.within && q.bounds.above_threshold);
    assert!(q.residual < 1e-8);
    assert!(q.quadratic_form_gap < 1e-8);
    assert!((operator_norm(&k).unwrap() - q.bounds.norm_k).abs() < 1e-10);
}

#[test]
fn critical_coupling_saturates_the_quadratic_form() {
    let mesh = generate_icosphere(1.0f64, 1).unwrap();
    let tables = assemble_tables(&mesh, 0.0, false, &QuadratureOptions::default());
    let (k, w) = (ShellOperator::new(&tables, ShellKind::K), ShellOperator::new(&tables, ShellKind::W));
    let r = lambda_omega_qep_op(&k, &w, tables.sqrt_area(), 1.0, &KrylovOptions::default()).unwrap();
    let f = r.certificate.to_frame(tables.sqrt_area());
    let at = quadratic_forms(&k, &w, 1.0, r.lambda_omega, f.as_ref());
    assert!((at.a_form - 1.0).abs() < 1e-8);
    // Slightly above λ_Ω the form is below one for the same density.
    let above = quadratic_forms(&k, &w, 1.0, 1.01 * r.lambda_omega, f.as_ref());
    assert!(above.a_form < 1.0);
}

#[test]
fn critical_coupling_scales_with_mass() {
    let mesh = generate_icosphere(1.0f64, 1).unwrap();
    let p = Params::new(1.0, 1.0).unwrap();
    let (k, w) = (assemble_k(&mesh, &p), assemble_w(&mesh, &p));
    let small = lambda_omega_qep(&k, &w, 0.1).unwrap().lambda_omega;
    let large = lambda_omega_qep(&k, &w, 3.0).unwrap().lambda_omega;
    assert!(small < large);
    assert!(small > 2.0);
}
