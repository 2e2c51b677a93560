//! Closed-form potentials of a uniform density on a flat convex polygon.

use crate::geometry::{self, Vec3};
use crate::scalar::Real;

/// `potential = ∫ 1/|x−y| dy` and `field = ∫ (x−y)/|x−y|³ dy` over a flat polygon.
///
/// On the polygon's own plane the normal part of `field` is the principal
/// value, which is zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StaticIntegrals<T> {
    pub potential: T,
    pub field: Vec3<T>,
}

/// `ln((R⁺ + s⁺)/(R⁻ + s⁻))` written to avoid cancellation on either side of
/// the foot point.
#[inline]
fn edge_log<T: Real>(s_minus: T, s_plus: T, r_minus: T, r_plus: T, r0_sq: T) -> T {
    let zero = T::zero();
    if s_plus + s_minus >= zero {
        let num = if s_plus >= zero { r_plus + s_plus } else { r0_sq / (r_plus - s_plus) };
        let den = if s_minus >= zero { r_minus + s_minus } else { r0_sq / (r_minus - s_minus) };
        (num / den).ln()
    } else {
        // (R⁺+s⁺)/(R⁻+s⁻) = (R⁻−s⁻)/(R⁺−s⁺)
        let num = if s_minus <= zero { r_minus - s_minus } else { r0_sq / (r_minus + s_minus) };
        let den = if s_plus <= zero { r_plus - s_plus } else { r0_sq / (r_plus + s_plus) };
        (num / den).ln()
    }
}

/// Potential and field at `x` of the unit density on the convex polygon
/// `vertices` (counter-clockwise about `normal`).
pub fn polygon_static<T: Real>(vertices: &[Vec3<T>], normal: Vec3<T>, x: Vec3<T>) -> StaticIntegrals<T> {
    let zero = T::zero();
    let h = geometry::dot(geometry::sub(x, vertices[0]), normal);
    let habs = h.abs();
    let rho = geometry::sub(x, geometry::scale(normal, h));
    let mut potential = zero;
    let mut in_plane = [zero; 3];
    let mut solid = zero;
    let nv = vertices.len();
    for k in 0..nv {
        let pa = vertices[k];
        let pb = vertices[(k + 1) % nv];
        let edge = geometry::sub(pb, pa);
        let len = geometry::norm(edge);
        let s_hat = geometry::scale(edge, T::one() / len);
        let m_hat = geometry::cross(s_hat, normal);
        let da = geometry::sub(pa, rho);
        let s_minus = geometry::dot(da, s_hat);
        let s_plus = s_minus + len;
        let t0 = geometry::dot(da, m_hat);
        let r0_sq = t0 * t0 + h * h;
        let r_minus = (s_minus * s_minus + r0_sq).sqrt();
        let r_plus = (s_plus * s_plus + r0_sq).sqrt();
        let scale_sq = len * len;
        if r0_sq <= T::epsilon() * T::epsilon() * scale_sq {
            // x lies on the edge's line inside the plane: the edge contributes
            // no angle and no potential term, and the log term is finite only
            // off the segment.
            if s_minus * s_plus > zero {
                let f = (s_plus.abs() / s_minus.abs()).ln();
                let f = if s_plus > zero { f } else { -f };
                in_plane = geometry::add(in_plane, geometry::scale(m_hat, f));
            }
            continue;
        }
        let f = edge_log(s_minus, s_plus, r_minus, r_plus, r0_sq);
        potential = potential + t0 * f;
        in_plane = geometry::add(in_plane, geometry::scale(m_hat, f));
        let beta = (t0 * s_plus / (r0_sq + habs * r_plus)).atan() - (t0 * s_minus / (r0_sq + habs * r_minus)).atan();
        solid = solid + beta;
    }
    potential = potential - habs * solid;
    let sign = if h > zero {
        T::one()
    } else if h < zero {
        -T::one()
    } else {
        zero
    };
    let field = geometry::add(in_plane, geometry::scale(normal, sign * solid));
    StaticIntegrals { potential, field }
}

/// [`polygon_static`] for a triangle, with the normal taken from its winding.
#[inline]
pub fn triangle_static<T: Real>(v: &[Vec3<T>; 3], normal: Vec3<T>, x: Vec3<T>) -> StaticIntegrals<T> {
    polygon_static(v, normal, x)
}
