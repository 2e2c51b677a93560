use std::f64::consts::PI;

use shellspec::capacity::{ball_capacity, capacity, equilibrium_density, spheroid_capacity_oracle};
use shellspec::mesh::{generate_ellipsoid, generate_icosphere, generate_spheroid};

#[test]
fn sphere_capacity_converges_to_4pi() {
    let mut prev = f64::INFINITY;
    for s in 1..=2 {
        let r = capacity(&generate_icosphere(1.0f64, s).unwrap()).unwrap();
        let err = (r.cap - 4.0 * PI).abs() / (4.0 * PI);
        assert!(err < prev);
        prev = err;
        assert!(r.residual < 1e-10);
        assert!(r.min_density > 0.95 && r.max_density < 1.06, "{} {}", r.min_density, r.max_density);
        assert!(r.polya_szego_margin >= 0.0);
    }
    assert!(prev < 0.015);
}

#[test]
fn capacity_scales_linearly() {
    let a = capacity(&generate_icosphere(1.0f64, 1).unwrap()).unwrap().cap;
    let b = capacity(&generate_icosphere(2.5f64, 1).unwrap()).unwrap().cap;
    assert!((b - 2.5 * a).abs() < 1e-10 * b);
}

#[test]
fn equilibrium_density_is_a_probability_density_times_capacity() {
    let mesh = generate_ellipsoid([2.0f64, 1.0, 1.0], 2).unwrap();
    let eq = equilibrium_density(&mesh).unwrap();
    let total: f64 = eq.density.iter().zip(mesh.areas()).map(|(d, a)| d * a).sum();
    let cap = capacity(&mesh).unwrap().cap;
    assert!((total - cap).abs() < 1e-10 * cap);
    assert!(eq.density.iter().all(|d| *d > 0.0));
}

#[test]
fn closed_form_oracles() {
    assert!((ball_capacity(4.0 * PI / 3.0) - 4.0 * PI).abs() < 1e-12);
    assert!((spheroid_capacity_oracle(1.0, 1.0) - 4.0 * PI).abs() < 1e-9);
    let c = spheroid_capacity_oracle(2.0, 1.0);
    assert!((c - 4.0 * PI * 3f64.sqrt() / (2.0 + 3f64.sqrt()).ln()).abs() < 1e-12);
    // Domain monotonicity: between the inscribed and circumscribed balls.
    assert!(c > 4.0 * PI && c < 8.0 * PI);
}

#[test]
fn spheroid_capacity_matches_oracle() {
    let r = capacity(&generate_spheroid(2.0f64, 1.0, 2).unwrap()).unwrap();
    let oracle = spheroid_capacity_oracle(2.0, 1.0);
    assert!((r.cap - oracle).abs() / oracle < 0.02, "{} vs {oracle}", r.cap);
}

#[test]
fn polya_szego_holds_on_elongated_shapes() {
    for axes in [[1.5, 1.0, 1.0], [3.0, 1.0, 1.0], [2.0, 1.0, 0.5]] {
        let r = capacity(&generate_ellipsoid(axes, 1).unwrap()).unwrap();
        assert!(r.cap >= ball_capacity(r.volume), "{axes:?}");
    }
}
