use shellspec::geometry::{self, Vec3};
use shellspec::mesh::generate_icosphere;
use shellspec::quadrature::{
    classify_pair, collapsed_rule, gauss_legendre, regular_rule, triangle_static, weak_singular_self, PanelPairClass,
    QuadratureError, DEFAULT_ETA,
};

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// Average of `λ₁^i λ₂^j` over a triangle.
fn monomial_mean(i: u32, j: u32) -> f64 {
    2.0 * factorial(i) * factorial(j) / factorial(i + j + 2)
}

#[test]
fn symmetric_rules_integrate_their_degree() {
    for degree in 1..=10 {
        let rule = regular_rule::<f64>(degree).unwrap();
        let wsum: f64 = rule.weights.iter().sum();
        assert!((wsum - 1.0).abs() < 1e-14, "degree {degree}: weights sum to {wsum}");
        for i in 0..=degree as u32 {
            for j in 0..=(degree as u32 - i) {
                let q: f64 = rule.points.iter().zip(&rule.weights).map(|(l, w)| w * l[0].powi(i as i32) * l[1].powi(j as i32)).sum();
                let exact = monomial_mean(i, j);
                assert!((q - exact).abs() < 1e-13, "degree {degree}, monomial ({i},{j}): {q} vs {exact}");
            }
        }
    }
}

#[test]
fn unsupported_degree_is_rejected() {
    assert_eq!(regular_rule::<f64>(11).unwrap_err(), QuadratureError::UnsupportedDegree(11));
    assert_eq!(regular_rule::<f64>(0).unwrap_err(), QuadratureError::UnsupportedDegree(0));
}

#[test]
fn subdivided_rule_keeps_moments() {
    let rule = regular_rule::<f64>(4).unwrap().subdivided(2);
    assert_eq!(rule.len(), 16 * regular_rule::<f64>(4).unwrap().len());
    let q: f64 = rule.points.iter().zip(&rule.weights).map(|(l, w)| w * l[0].powi(3) * l[2]).sum();
    assert!((q - monomial_mean(3, 1)).abs() < 1e-14);
}

#[test]
fn gauss_legendre_is_exact_to_degree_2n_minus_1() {
    for n in 1..12 {
        let (x, w) = gauss_legendre::<f64>(n);
        for k in 0..2 * n {
            let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k as i32)).sum();
            assert!((q - 1.0 / (k as f64 + 1.0)).abs() < 1e-14, "n={n} k={k}");
        }
    }
}

#[test]
fn collapsed_rule_integrates_polynomials() {
    let rule = collapsed_rule::<f64>(6);
    let q: f64 = rule.points.iter().zip(&rule.weights).map(|(l, w)| w * l[0] * l[1].powi(2)).sum();
    assert!((q - monomial_mean(1, 2)).abs() < 1e-13);
}

const TRI: [Vec3<f64>; 3] = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.3, 0.8, 0.0]];

fn brute_static(x: Vec3<f64>, levels: u32) -> (f64, Vec3<f64>) {
    let rule = regular_rule::<f64>(8).unwrap().subdivided(levels);
    let area = 0.5 * geometry::norm(geometry::cross(geometry::sub(TRI[1], TRI[0]), geometry::sub(TRI[2], TRI[0])));
    let (mut p, mut f) = (0.0, [0.0; 3]);
    for (y, w) in rule.map(&TRI, area) {
        let d = geometry::sub(x, y);
        let r = geometry::norm(d);
        p += w / r;
        f = geometry::add(f, geometry::scale(d, w / (r * r * r)));
    }
    (p, f)
}

#[test]
fn closed_form_panel_potential_matches_brute_force() {
    let n = [0.0, 0.0, 1.0];
    for x in [[0.4, 0.3, 0.5], [2.0, -1.0, 0.3], [0.5, 0.2, -0.2], [-0.5, 1.5, 0.0]] {
        let st = triangle_static(&TRI, n, x);
        let (p, f) = brute_static(x, 4);
        assert!((st.potential - p).abs() < 1e-7 * p, "potential at {x:?}: {} vs {p}", st.potential);
        for k in 0..3 {
            assert!((st.field[k] - f[k]).abs() < 1e-6 * geometry::norm(f), "field[{k}] at {x:?}");
        }
    }
}

#[test]
fn in_plane_potential_is_continuous_across_the_plane() {
    let n = [0.0, 0.0, 1.0];
    let x = [0.4, 0.3, 0.0];
    let on = triangle_static(&TRI, n, x).potential;
    let above = triangle_static(&TRI, n, [0.4, 0.3, 1e-9]).potential;
    assert!((on - above).abs() < 1e-7);
    // Normal field is ±2π on either side, a jump of 4π.
    let up = triangle_static(&TRI, n, [0.4, 0.3, 1e-6]).field[2];
    let down = triangle_static(&TRI, n, [0.4, 0.3, -1e-6]).field[2];
    assert!((up - down - 4.0 * std::f64::consts::PI).abs() < 1e-4, "{up} {down}");
    assert!((up + down).abs() < 1e-9);
}

#[test]
fn self_panel_double_integral_matches_semi_analytic_oracle() {
    // Outer integral of the closed-form inner potential on a fine rule.
    let n = [0.0, 0.0, 1.0];
    let area = 0.5 * geometry::norm(geometry::cross(geometry::sub(TRI[1], TRI[0]), geometry::sub(TRI[2], TRI[0])));
    let rule = regular_rule::<f64>(10).unwrap().subdivided(5);
    let oracle: f64 = rule.map(&TRI, area).map(|(x, w)| w * triangle_static(&TRI, n, x).potential).sum();
    let duffy: f64 = weak_singular_self(&TRI, |r: f64| 1.0 / r, 12);
    assert!((duffy - oracle).abs() < 1e-6 * oracle, "{duffy} vs {oracle}");
    // A smooth kernel gives area² for k = 1.
    let ones: f64 = weak_singular_self(&TRI, |_r: f64| 1.0, 8);
    assert!((ones - area * area).abs() < 1e-13);
}

#[test]
fn pair_classes_are_symmetric_and_complete() {
    let mesh = generate_icosphere(1.0f64, 1).unwrap();
    let n = mesh.num_panels();
    for i in 0..n {
        let mut edges = 0;
        for j in 0..n {
            let c = classify_pair(&mesh, i, j, DEFAULT_ETA);
            assert_eq!(c, classify_pair(&mesh, j, i, DEFAULT_ETA));
            if c == PanelPairClass::EdgeAdjacent {
                edges += 1;
            }
            if i == j {
                assert_eq!(c, PanelPairClass::Identical);
            }
        }
        assert_eq!(edges, 3);
    }
}
