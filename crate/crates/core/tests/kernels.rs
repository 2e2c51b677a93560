use num_complex::Complex64 as C;
use shellspec::kernels::{alpha_dot, dphi_da, k_a, kernel_split, pauli_dot, phi_a, w_a, DiracAlgebra, KernelError, Matrix4, PhysicalParams};

fn close4(a: &Matrix4<f64>, b: &Matrix4<f64>, tol: f64) -> bool {
    (0..4).all(|i| (0..4).all(|j| (a.get(i, j) - b.get(i, j)).norm() <= tol))
}

fn anti(a: &Matrix4<f64>, b: &Matrix4<f64>) -> Matrix4<f64> {
    a.clone() * b.clone() + b.clone() * a.clone()
}

#[test]
fn dirac_matrices_satisfy_the_clifford_relations() {
    let alg = DiracAlgebra::<f64>::new();
    let zero = Matrix4::<f64>::zero();
    let two = alg.i4.scale(C::new(2.0, 0.0));
    for j in 0..3 {
        for k in 0..3 {
            let expect = if j == k { &two } else { &zero };
            assert!(close4(&anti(&alg.alpha[j], &alg.alpha[k]), expect, 0.0));
        }
        assert!(close4(&anti(&alg.alpha[j], &alg.beta), &zero, 0.0));
    }
    assert!(close4(&(alg.beta.clone() * alg.beta.clone()), &alg.i4, 0.0));
}

#[test]
fn pauli_and_alpha_dot_agree_with_the_matrices() {
    let alg = DiracAlgebra::<f64>::new();
    let v = [0.3, -1.2, 0.7];
    let s = pauli_dot(v);
    for r in 0..2 {
        for c in 0..2 {
            let expect: C = (0..3).map(|k| alg.sigma[k].get(r, c) * v[k]).sum();
            assert!((s[r][c] - expect).norm() < 1e-15);
        }
    }
    let a = alpha_dot(v);
    let expect = (0..3).fold(Matrix4::<f64>::zero(), |acc, k| acc + alg.alpha[k].scale(C::new(v[k], 0.0)));
    assert!(close4(&a, &expect, 1e-15));
}

#[test]
fn fundamental_solution_has_the_block_structure() {
    let x = [0.2, -0.4, 0.5];
    for a in [-0.7, 0.0, 0.4, 1.0] {
        let p = PhysicalParams::new(1.0, a).unwrap();
        let phi = phi_a(x, &p).unwrap();
        let k = k_a(x, &p).unwrap();
        let w = w_a(x, &p).unwrap();
        for r in 0..2 {
            for c in 0..2 {
                let diag = if r == c { 1.0 } else { 0.0 };
                assert!((phi.get(r, c) - C::new((a + 1.0) * k * diag, 0.0)).norm() < 1e-14);
                assert!((phi.get(r + 2, c + 2) - C::new((a - 1.0) * k * diag, 0.0)).norm() < 1e-14);
                assert!((phi.get(r, c + 2) - w.get(r, c)).norm() < 1e-14);
                assert!((phi.get(r + 2, c) - w.get(r, c)).norm() < 1e-14);
            }
        }
    }
}

/// `(−iα·∇ + mβ − a) φ = 0` away from the origin, by central differences.
#[test]
fn fundamental_solution_solves_the_dirac_equation() {
    let alg = DiracAlgebra::<f64>::new();
    let p = PhysicalParams::new(1.3, 0.4).unwrap();
    let x = [0.3, 0.5, -0.4];
    let h = 1e-5;
    let mut lhs = (alg.beta.scale(C::new(p.m, 0.0)) - alg.i4.scale(C::new(p.a, 0.0))) * phi_a(x, &p).unwrap();
    for k in 0..3 {
        let (mut xp, mut xm) = (x, x);
        xp[k] += h;
        xm[k] -= h;
        let d = (phi_a(xp, &p).unwrap() - phi_a(xm, &p).unwrap()).scale(C::new(0.5 / h, 0.0));
        lhs = lhs + alg.alpha[k].scale(C::new(0.0, -1.0)) * d;
    }
    let scale = (0..4).map(|i| phi_a(x, &p).unwrap().get(i, i).norm()).fold(0.0, f64::max);
    assert!(close4(&lhs, &Matrix4::zero(), 1e-6 * scale));
}

#[test]
fn parameter_derivative_matches_finite_differences() {
    let x = [0.6, -0.1, 0.35];
    for a in [-0.5, 0.0, 0.3, 0.8] {
        let h = 1e-5;
        let fd = (phi_a(x, &PhysicalParams::new(1.0, a + h).unwrap()).unwrap()
            - phi_a(x, &PhysicalParams::new(1.0, a - h).unwrap()).unwrap())
        .scale(C::new(0.5 / h, 0.0));
        let d = dphi_da(x, &PhysicalParams::new(1.0, a).unwrap()).unwrap();
        assert!(close4(&fd, &d, 1e-7), "a = {a}");
    }
}

#[test]
fn kernel_split_sums_to_the_kernel() {
    let x = [0.1, 0.2, -0.3];
    let p = PhysicalParams::new(1.0, 0.25).unwrap();
    let (w1, w2, w3) = kernel_split(x, &p).unwrap();
    assert!(close4(&(w1 + w2 + w3), &phi_a(x, &p).unwrap(), 1e-12));
}

#[test]
fn kernel_is_hermitian_under_reflection() {
    let x = [0.7, 0.1, -0.2];
    let p = PhysicalParams::new(1.0, -0.6).unwrap();
    let neg = [-x[0], -x[1], -x[2]];
    assert!(close4(&phi_a(x, &p).unwrap().adjoint(), &phi_a(neg, &p).unwrap(), 1e-15));
}

#[test]
fn invalid_inputs_are_rejected() {
    assert!(matches!(PhysicalParams::new(0.0, 0.0), Err(KernelError::Parameter(_))));
    assert!(matches!(PhysicalParams::new(1.0, 1.5), Err(KernelError::Parameter(_))));
    assert!(matches!(PhysicalParams::new(1.0, f64::NAN), Err(KernelError::Parameter(_))));
    let p = PhysicalParams::new(1.0, 0.0).unwrap();
    assert!(matches!(phi_a([0.0; 3], &p), Err(KernelError::SingularPoint)));
    assert!(matches!(dphi_da([1.0, 0.0, 0.0], &PhysicalParams::new(1.0, 1.0).unwrap()), Err(KernelError::Parameter(_))));
    assert_eq!(PhysicalParams::new(2.0, 2.0).unwrap().kappa(), 0.0);
}
