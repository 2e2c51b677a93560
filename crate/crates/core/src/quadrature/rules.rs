use super::QuadratureError;
use crate::geometry::{self, Vec3};
use crate::scalar::Real;

/// Quadrature rule on a triangle in barycentric coordinates, weights
/// normalized to the triangle's area (they sum to 1).
#[derive(Clone, Debug)]
pub struct TriangleRule<T> {
    pub degree: usize,
    pub points: Vec<[T; 3]>,
    pub weights: Vec<T>,
}

impl<T: Real> TriangleRule<T> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Physical nodes and area-scaled weights on triangle `v` with area `area`.
    pub fn map(&self, v: &[Vec3<T>; 3], area: T) -> impl Iterator<Item = (Vec3<T>, T)> + '_ {
        let v = *v;
        self.points
            .iter()
            .zip(&self.weights)
            .map(move |(l, w)| (geometry::barycentric(&v, *l), *w * area))
    }

    /// The rule repeated on the 4^levels congruent children of uniform
    /// midpoint subdivision.
    pub fn subdivided(&self, levels: u32) -> TriangleRule<T> {
        let mut cells: Vec<[[T; 3]; 3]> = vec![[
            [T::one(), T::zero(), T::zero()],
            [T::zero(), T::one(), T::zero()],
            [T::zero(), T::zero(), T::one()],
        ]];
        let half = T::lit(0.5);
        for _ in 0..levels {
            let mut next = Vec::with_capacity(cells.len() * 4);
            for c in &cells {
                let m = |a: [T; 3], b: [T; 3]| [(a[0] + b[0]) * half, (a[1] + b[1]) * half, (a[2] + b[2]) * half];
                let (ab, bc, ca) = (m(c[0], c[1]), m(c[1], c[2]), m(c[2], c[0]));
                next.push([c[0], ab, ca]);
                next.push([ab, c[1], bc]);
                next.push([ca, bc, c[2]]);
                next.push([ab, bc, ca]);
            }
            cells = next;
        }
        let scale = T::one() / T::lit(cells.len() as f64);
        let mut points = Vec::with_capacity(cells.len() * self.len());
        let mut weights = Vec::with_capacity(cells.len() * self.len());
        for c in &cells {
            for (l, w) in self.points.iter().zip(&self.weights) {
                let mut p = [T::zero(); 3];
                for k in 0..3 {
                    p[k] = l[0] * c[0][k] + l[1] * c[1][k] + l[2] * c[2][k];
                }
                points.push(p);
                weights.push(*w * scale);
            }
        }
        TriangleRule { degree: self.degree, points, weights }
    }
}

/// Gauss–Legendre nodes and weights on [0, 1].
pub fn gauss_legendre<T: Real>(n: usize) -> (Vec<T>, Vec<T>) {
    let (x, w) = gauss_legendre_f64(n);
    (x.into_iter().map(T::lit).collect(), w.into_iter().map(T::lit).collect())
}

fn gauss_legendre_f64(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "Gauss–Legendre needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        // Newton iteration on P_n from the Chebyshev-like initial guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pm) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = 0.5 * (1.0 - x);
        nodes[n - 1 - i] = 0.5 * (1.0 + x);
        weights[i] = 0.5 * w;
        weights[n - 1 - i] = 0.5 * w;
    }
    (nodes, weights)
}

/// Symmetric, positive rule exact for polynomials of total degree `degree`.
pub fn regular_rule<T: Real>(degree: usize) -> Result<TriangleRule<T>, QuadratureError> {
    let (points, weights, exact) = match degree {
        1 => (vec![[1.0 / 3.0; 3]], vec![1.0], 1),
        2 => orbits(&[], &[(1.0 / 6.0, 1.0 / 3.0)], &[]).with_degree(2),
        3 | 4 => orbits(
            &[],
            &[(0.445948490915965, 0.223381589678011), (0.091576213509771, 0.109951743655322)],
            &[],
        )
        .with_degree(4),
        5 => {
            let r = 15f64.sqrt();
            orbits(
                &[0.225],
                &[((6.0 - r) / 21.0, (155.0 - r) / 1200.0), ((6.0 + r) / 21.0, (155.0 + r) / 1200.0)],
                &[],
            )
            .with_degree(5)
        }
        6 => orbits(
            &[],
            &[(0.249286745170910, 0.116786275726379), (0.063089014491502, 0.050844906370207)],
            &[(0.053145049844817, 0.310352451033784, 0.082851075618374)],
        )
        .with_degree(6),
        7 | 8 => orbits(
            &[0.144315607677787],
            &[
                (0.459292588292723, 0.095091634267285),
                (0.170569307751760, 0.103217370534718),
                (0.050547228317031, 0.032458497623198),
            ],
            &[(0.008394777409958, 0.263112829634638, 0.027230314174435)],
        )
        .with_degree(8),
        9 | 10 => symmetric_conical(6),
        _ => return Err(QuadratureError::UnsupportedDegree(degree)),
    };
    Ok(TriangleRule {
        degree: exact,
        points: points.into_iter().map(|p| p.map(T::lit)).collect(),
        weights: weights.into_iter().map(T::lit).collect(),
    })
}

type RawRule = (Vec<[f64; 3]>, Vec<f64>);

trait WithDegree {
    fn with_degree(self, d: usize) -> (Vec<[f64; 3]>, Vec<f64>, usize);
}

impl WithDegree for RawRule {
    fn with_degree(self, d: usize) -> (Vec<[f64; 3]>, Vec<f64>, usize) {
        (self.0, self.1, d)
    }
}

/// Expands S3 orbits: centroid weights, `(a, w)` for the 3-point orbit of
/// `(a, a, 1-2a)`, and `(a, b, w)` for the 6-point orbit of `(a, b, 1-a-b)`.
fn orbits(centroid: &[f64], two_equal: &[(f64, f64)], general: &[(f64, f64, f64)]) -> RawRule {
    let mut p = Vec::new();
    let mut w = Vec::new();
    for &wc in centroid {
        p.push([1.0 / 3.0; 3]);
        w.push(wc);
    }
    for &(a, wa) in two_equal {
        let c = 1.0 - 2.0 * a;
        for q in [[a, a, c], [a, c, a], [c, a, a]] {
            p.push(q);
            w.push(wa);
        }
    }
    for &(a, b, wab) in general {
        let c = 1.0 - a - b;
        for q in [[a, b, c], [a, c, b], [b, a, c], [b, c, a], [c, a, b], [c, b, a]] {
            p.push(q);
            w.push(wab);
        }
    }
    (p, w)
}

/// Collapsed Gauss product rule symmetrized over the six vertex permutations;
/// exact to degree `2q - 2` with all weights positive.
fn symmetric_conical(q: usize) -> (Vec<[f64; 3]>, Vec<f64>, usize) {
    let (x, w) = gauss_legendre_f64(q);
    let mut p = Vec::with_capacity(6 * q * q);
    let mut wt = Vec::with_capacity(6 * q * q);
    for i in 0..q {
        for j in 0..q {
            let (u, v) = (x[i], x[j]);
            let (l1, l2) = (u * (1.0 - v), u * v);
            let l0 = 1.0 - l1 - l2;
            let weight = 2.0 * w[i] * w[j] * u / 6.0;
            for perm in [[l0, l1, l2], [l0, l2, l1], [l1, l0, l2], [l1, l2, l0], [l2, l0, l1], [l2, l1, l0]] {
                p.push(perm);
                wt.push(weight);
            }
        }
    }
    (p, wt, 2 * q - 2)
}

/// Collapsed (Duffy) Gauss product rule with `q × q` points; not symmetric,
/// used where a corner of the reference triangle carries a singularity.
pub fn collapsed_rule<T: Real>(q: usize) -> TriangleRule<T> {
    let (x, w) = gauss_legendre_f64(q);
    let mut points = Vec::with_capacity(q * q);
    let mut weights = Vec::with_capacity(q * q);
    for i in 0..q {
        for j in 0..q {
            let (u, v) = (x[i], x[j]);
            points.push([1.0 - u, u * (1.0 - v), u * v].map(T::lit));
            weights.push(T::lit(2.0 * w[i] * w[j] * u));
        }
    }
    TriangleRule { degree: 2 * q - 2, points, weights }
}
