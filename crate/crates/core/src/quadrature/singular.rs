//! Singular and nearly singular panel integrals.

use std::ops::{Add, Mul};

use num_complex::Complex;
use num_traits::Zero;

use super::analytic::polygon_static;
use super::rules::{gauss_legendre, TriangleRule};
use crate::geometry::{self, Vec3};
use crate::kernels::{pauli_dot, PhysicalParams};
use crate::scalar::Real;

/// In-plane orthonormal basis `(e1, e2)` of a triangle with unit normal `n`.
fn plane_basis<T: Real>(v: &[Vec3<T>; 3], n: Vec3<T>) -> (Vec3<T>, Vec3<T>) {
    let e1 = geometry::normalize(geometry::sub(v[1], v[0]));
    (e1, geometry::cross(n, e1))
}

/// `∫_P ∫_P k(|x−y|) dσ(x) dσ(y)` for a kernel with at most a `1/r`
/// singularity.
///
/// Uses relative coordinates `z = x − y`: the measure of `{y ∈ P : y + z ∈ P}`
/// is `area·(1 − Σ max(0, ∇λ_i·z))²`, supported on the hexagon `P − P`. Each of
/// the six triangles of the hexagon with a corner at `z = 0` is mapped by a
/// collapsed (Duffy) transform, which cancels the `1/r` factor, and integrated
/// with a `q × q` Gauss product rule.
pub fn weak_singular_self<T, V, F>(panel: &[Vec3<T>; 3], kernel: F, q: usize) -> V
where
    T: Real,
    V: Zero + Add<Output = V> + Mul<T, Output = V>,
    F: Fn(T) -> V,
{
    let e01 = geometry::sub(panel[1], panel[0]);
    let e02 = geometry::sub(panel[2], panel[0]);
    let nvec = geometry::cross(e01, e02);
    let twice_area = geometry::norm(nvec);
    let area = twice_area * T::lit(0.5);
    let n = geometry::scale(nvec, T::one() / twice_area);
    let (b1, b2) = plane_basis(panel, n);
    let to2 = |p: Vec3<T>| [geometry::dot(p, b1), geometry::dot(p, b2)];

    // Barycentric gradients in the plane.
    let grads: [[T; 2]; 3] = std::array::from_fn(|i| {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        let g = geometry::scale(geometry::cross(n, geometry::sub(panel[k], panel[j])), T::one() / twice_area);
        to2(g)
    });
    let mut hexagon: Vec<[T; 2]> = Vec::with_capacity(6);
    for a in 0..3 {
        for b in 0..3 {
            if a != b {
                hexagon.push(to2(geometry::sub(panel[a], panel[b])));
            }
        }
    }
    hexagon.sort_by(|p, r| p[1].atan2(p[0]).partial_cmp(&r[1].atan2(r[0])).expect("finite angles"));

    let (x, w) = gauss_legendre::<T>(q);
    let overlap = |z: [T; 2]| {
        let s: T = grads.iter().map(|g| (g[0] * z[0] + g[1] * z[1]).max(T::zero())).sum();
        let f = (T::one() - s).max(T::zero());
        area * f * f
    };
    let mut total = V::zero();
    for k in 0..6 {
        let p = hexagon[k];
        let r = hexagon[(k + 1) % 6];
        let jac = (p[0] * r[1] - p[1] * r[0]).abs();
        for (vj, wv) in x.iter().zip(&w) {
            let d = [p[0] + (r[0] - p[0]) * *vj, p[1] + (r[1] - p[1]) * *vj];
            let dlen = (d[0] * d[0] + d[1] * d[1]).sqrt();
            for (ui, wu) in x.iter().zip(&w) {
                let z = [d[0] * *ui, d[1] * *ui];
                let weight = *wu * *wv * *ui * jac * overlap(z);
                total = total + kernel(*ui * dlen) * weight;
            }
        }
    }
    total
}

/// Principal value at the centroid of a flat convex polygon of the Pauli
/// kernel `w^a(x) = e^{−κ|x|}(1+κ|x|)/(4π|x|³) iσ·x`, as a 2×2 matrix.
///
/// The static part `iσ·x/(4π|x|³)` is integrated in closed form (its normal
/// component vanishes in the principal-value sense and its in-plane part is a
/// sum of edge logarithms, zero for centrally symmetric panels). The bounded
/// remainder is integrated over triangles fanned from the centroid.
pub fn pv_self_contribution<T: Real>(
    polygon: &[Vec3<T>],
    normal: Vec3<T>,
    params: &PhysicalParams<T>,
    q: usize,
) -> [[Complex<T>; 2]; 2] {
    let (_, vector) = centroid_self_integrals(polygon, normal, params.kappa(), q);
    let i = Complex::new(T::zero(), T::one());
    let m = pauli_dot(vector);
    [[i * m[0][0], i * m[0][1]], [i * m[1][0], i * m[1][1]]]
}

/// Area centroid of a flat polygon.
pub fn polygon_centroid<T: Real>(polygon: &[Vec3<T>]) -> Vec3<T> {
    let mut centroid = [T::zero(); 3];
    let mut area = T::zero();
    for k in 1..polygon.len() - 1 {
        let tri = [polygon[0], polygon[k], polygon[k + 1]];
        let a = geometry::norm(geometry::cross(geometry::sub(tri[1], tri[0]), geometry::sub(tri[2], tri[0]))) * T::lit(0.5);
        let c = geometry::scale(geometry::add(geometry::add(tri[0], tri[1]), tri[2]), T::one() / T::lit(3.0));
        centroid = geometry::add(centroid, geometry::scale(c, a));
        area = area + a;
    }
    geometry::scale(centroid, T::one() / area)
}

/// `∫ e^{−κr}/(4πr)` and the principal value `∫ e^{−κr}(1+κr)(x_c−y)/(4πr³)`
/// over a flat convex polygon, evaluated at its own centroid `x_c`.
pub fn centroid_self_integrals<T: Real>(polygon: &[Vec3<T>], normal: Vec3<T>, kappa: T, q: usize) -> (T, Vec3<T>) {
    let nv = polygon.len();
    let xc = polygon_centroid(polygon);
    let four_pi = T::lit(4.0) * T::PI();
    let st = polygon_static(polygon, normal, xc);
    let mut potential = st.potential / four_pi;
    let mut vector = geometry::scale(st.field, T::one() / four_pi);
    // The normal part of the static field at a point of the plane is the
    // principal value zero.
    let hn = geometry::dot(vector, normal);
    vector = geometry::sub(vector, geometry::scale(normal, hn));

    if kappa > T::zero() {
        let (x, w) = gauss_legendre::<T>(q);
        for k in 0..nv {
            let p = geometry::sub(polygon[k], xc);
            let r = geometry::sub(polygon[(k + 1) % nv], xc);
            let jac = geometry::norm(geometry::cross(p, r));
            for (vj, wv) in x.iter().zip(&w) {
                let d = geometry::add(p, geometry::scale(geometry::sub(r, p), *vj));
                let dlen = geometry::norm(d);
                for (ui, wu) in x.iter().zip(&w) {
                    // y − x_c = u·d, the kernel argument x_c − y = −u·d and the
                    // area element is u·jac du dv.
                    let u = kappa * *ui * dlen;
                    potential = potential + bounded_potential_factor(u) * jac * *wu * *wv / (four_pi * dlen);
                    let coef = -bounded_field_factor(u) * jac * *wu * *wv / (four_pi * *ui * dlen * dlen * dlen);
                    vector = geometry::add(vector, geometry::scale(d, coef));
                }
            }
        }
    }
    (potential, vector)
}

/// `e^{−u}(1+u) − 1`, accurate for small `u`.
#[inline]
pub fn bounded_field_factor<T: Real>(u: T) -> T {
    if u < T::lit(1e-2) {
        let u2 = u * u;
        u2 * (T::lit(-0.5) + u * (T::lit(1.0 / 3.0) + u * (T::lit(-0.125) + u * T::lit(1.0 / 30.0))))
    } else {
        (-u).exp() * (T::one() + u) - T::one()
    }
}

/// `(e^{−u} − 1)`, accurate for small `u`.
#[inline]
pub fn bounded_potential_factor<T: Real>(u: T) -> T {
    (-u).exp_m1()
}

/// Outer rule on a triangle `(A, B, C)` graded toward the edge `AB` and its
/// endpoints, in barycentric coordinates of `(A, B, C)`.
///
/// The collapsed map `x = (1−t)[(1−s)A + sB] + tC` is graded geometrically in
/// `t` toward the edge and in `s` toward both endpoints, more finely for the
/// cells closest to the edge.
pub fn edge_graded_rule<T: Real>(levels: u32, ratio: f64, n: usize) -> TriangleRule<T> {
    let (gx, gw) = gauss_legendre::<f64>(n);
    let t_breaks: Vec<f64> = std::iter::once(0.0).chain((0..=levels).rev().map(|k| ratio.powi(k as i32))).collect();
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for c in 0..t_breaks.len() - 1 {
        let (t0, t1) = (t_breaks[c], t_breaks[c + 1]);
        // Cells near the edge need the endpoint grading down to their own scale.
        let depth = (levels as usize + 1 - c).min(levels as usize);
        let mut s_breaks = vec![0.0];
        for j in (1..=depth).rev() {
            s_breaks.push(ratio.powi(j as i32));
        }
        for j in 1..=depth {
            s_breaks.push(1.0 - ratio.powi(j as i32));
        }
        s_breaks.push(1.0);
        for sc in 0..s_breaks.len() - 1 {
            let (s0, s1) = (s_breaks[sc], s_breaks[sc + 1]);
            for (xt, wt) in gx.iter().zip(&gw) {
                let t = t0 + (t1 - t0) * xt;
                for (xs, ws) in gx.iter().zip(&gw) {
                    let s = s0 + (s1 - s0) * xs;
                    points.push([(1.0 - t) * (1.0 - s), (1.0 - t) * s, t].map(T::lit));
                    weights.push(T::lit(2.0 * (1.0 - t) * wt * ws * (t1 - t0) * (s1 - s0)));
                }
            }
        }
    }
    TriangleRule { degree: 2 * n - 1, points, weights }
}

/// Outer rule on a triangle `(A, B, C)` graded toward the vertex `A`, in
/// barycentric coordinates of `(A, B, C)`.
pub fn vertex_graded_rule<T: Real>(levels: u32, ratio: f64, n_radial: usize, n_angular: usize) -> TriangleRule<T> {
    let (rx, rw) = gauss_legendre::<f64>(n_radial);
    let (ax, aw) = gauss_legendre::<f64>(n_angular);
    let t_breaks: Vec<f64> = std::iter::once(0.0).chain((0..=levels).rev().map(|k| ratio.powi(k as i32))).collect();
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for c in 0..t_breaks.len() - 1 {
        let (t0, t1) = (t_breaks[c], t_breaks[c + 1]);
        for (xt, wt) in rx.iter().zip(&rw) {
            let t = t0 + (t1 - t0) * xt;
            for (xs, ws) in ax.iter().zip(&aw) {
                points.push([1.0 - t, t * (1.0 - xs), t * xs].map(T::lit));
                weights.push(T::lit(2.0 * t * wt * ws * (t1 - t0)));
            }
        }
    }
    TriangleRule { degree: 2 * n_radial - 1, points, weights }
}
