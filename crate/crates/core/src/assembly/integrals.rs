//! Galerkin double integrals over panel pairs.

use crate::geometry::{self, Vec3};
use crate::mesh::SurfaceMesh;
use crate::quadrature::{
    bounded_field_factor, bounded_potential_factor, edge_graded_rule, regular_rule, triangle_static,
    vertex_graded_rule, weak_singular_self, PanelPairClass, TriangleRule,
};
use crate::scalar::Real;

/// Double integrals over `P_i × P_j` (outer `x ∈ P_i`, inner `y ∈ P_j`), each
/// including the factor `1/(4π)`:
///
/// * `s = ∫∫ e^{−κr}/r`
/// * `v = ∫∫ e^{−κr}(1 + κr)(x − y)/r³`
/// * `e = ∫∫ e^{−κr}`
/// * `f = ∫∫ e^{−κr}(x − y)/r`
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PairIntegrals<T> {
    pub s: T,
    pub v: Vec3<T>,
    pub e: T,
    pub f: Vec3<T>,
}

impl<T: Real> PairIntegrals<T> {
    fn zero() -> Self {
        Self { s: T::zero(), v: [T::zero(); 3], e: T::zero(), f: [T::zero(); 3] }
    }

    fn scaled(self, c: T) -> Self {
        Self { s: self.s * c, v: geometry::scale(self.v, c), e: self.e * c, f: geometry::scale(self.f, c) }
    }

    fn add(self, o: Self) -> Self {
        Self { s: self.s + o.s, v: geometry::add(self.v, o.v), e: self.e + o.e, f: geometry::add(self.f, o.f) }
    }
}

/// Quadrature configuration shared by every pair of one assembly.
#[derive(Clone, Debug)]
pub struct PairQuadrature<T> {
    pub(crate) far: TriangleRule<T>,
    pub(crate) near: Vec<TriangleRule<T>>,
    pub(crate) inner: TriangleRule<T>,
    pub(crate) bounded: TriangleRule<T>,
    pub(crate) edge: TriangleRule<T>,
    pub(crate) vertex: TriangleRule<T>,
    pub(crate) self_order: usize,
}

/// Tunable quadrature parameters.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct QuadratureOptions {
    /// Near/far threshold in units of the larger panel diameter.
    pub eta: f64,
    /// Degree of the tensor rule for far pairs.
    pub far_degree: usize,
    /// Degree of the outer rule for near pairs, applied after subdivision.
    pub near_degree: usize,
    /// Geometric grading levels toward shared edges and vertices.
    pub grading_levels: u32,
    /// Gauss order per direction in the self-panel transform.
    pub self_order: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self { eta: 2.0, far_degree: 5, near_degree: 7, grading_levels: 7, self_order: 10 }
    }
}

impl<T: Real> PairQuadrature<T> {
    pub fn new(opts: &QuadratureOptions) -> Self {
        let far = regular_rule(opts.far_degree).expect("valid far degree");
        let near_base: TriangleRule<T> = regular_rule(opts.near_degree).expect("valid near degree");
        let near = (1..=3).map(|l| near_base.subdivided(l)).collect();
        let inner = regular_rule(5).expect("degree 5 exists");
        let bounded = inner.subdivided(1);
        Self {
            far,
            near,
            inner,
            bounded,
            edge: edge_graded_rule(opts.grading_levels, 0.15, 4),
            vertex: vertex_graded_rule(opts.grading_levels, 0.15, 4, 8),
            self_order: opts.self_order,
        }
    }
}

/// Accumulates the full kernels between two point sets.
#[inline]
fn tensor<T: Real>(
    xs: &[(Vec3<T>, T)],
    ys: &[(Vec3<T>, T)],
    kappa: T,
    with_derivative: bool,
) -> PairIntegrals<T> {
    let mut acc = PairIntegrals::zero();
    for &(x, wx) in xs {
        for &(y, wy) in ys {
            let d = geometry::sub(x, y);
            let r = geometry::norm(d);
            let w = wx * wy;
            let ex = (-kappa * r).exp();
            let inv = T::one() / r;
            acc.s = acc.s + w * ex * inv;
            let cv = w * ex * (T::one() + kappa * r) * inv * inv * inv;
            acc.v = geometry::add(acc.v, geometry::scale(d, cv));
            if with_derivative {
                acc.e = acc.e + w * ex;
                acc.f = geometry::add(acc.f, geometry::scale(d, w * ex * inv));
            }
        }
    }
    acc
}

/// Accumulates the bounded remainders `(e^{−κr} − 1)/r` and
/// `(e^{−κr}(1+κr) − 1)(x−y)/r³` plus the derivative kernels.
#[inline]
fn tensor_remainder<T: Real>(
    xs: &[(Vec3<T>, T)],
    ys: &[(Vec3<T>, T)],
    kappa: T,
    with_derivative: bool,
) -> PairIntegrals<T> {
    let mut acc = PairIntegrals::zero();
    for &(x, wx) in xs {
        for &(y, wy) in ys {
            let d = geometry::sub(x, y);
            let r = geometry::norm(d);
            let w = wx * wy;
            if r > T::zero() {
                let u = kappa * r;
                let inv = T::one() / r;
                acc.s = acc.s + w * bounded_potential_factor(u) * inv;
                acc.v = geometry::add(acc.v, geometry::scale(d, w * bounded_field_factor(u) * inv * inv * inv));
                if with_derivative {
                    let ex = (-u).exp();
                    acc.e = acc.e + w * ex;
                    acc.f = geometry::add(acc.f, geometry::scale(d, w * ex * inv));
                }
            } else if with_derivative {
                acc.e = acc.e + w;
            }
        }
    }
    acc
}

fn points<T: Real>(rule: &TriangleRule<T>, v: &[Vec3<T>; 3], area: T) -> Vec<(Vec3<T>, T)> {
    rule.map(v, area).collect()
}

/// Static part `(∫∫ 1/r, ∫∫ (x−y)/r³)` with the inner integral in closed form
/// and the given outer points on `P_i`.
fn static_part<T: Real>(outer: &[(Vec3<T>, T)], pj: &[Vec3<T>; 3], nj: Vec3<T>) -> (T, Vec3<T>) {
    let mut s = T::zero();
    let mut v = [T::zero(); 3];
    for &(x, w) in outer {
        let st = triangle_static(pj, nj, x);
        s = s + w * st.potential;
        v = geometry::add(v, geometry::scale(st.field, w));
    }
    (s, v)
}

/// Rotates the vertices of panel `i` so the vertices it shares with panel `j`
/// come first.
fn shared_first(ti: [usize; 3], tj: [usize; 3]) -> [usize; 3] {
    let shared: Vec<bool> = ti.iter().map(|v| tj.contains(v)).collect();
    for rot in 0..3 {
        let idx = [rot, (rot + 1) % 3, (rot + 2) % 3];
        let count = shared.iter().filter(|&&b| b).count();
        let ok = match count {
            2 => shared[idx[0]] && shared[idx[1]],
            1 => shared[idx[0]],
            _ => true,
        };
        if ok {
            return idx;
        }
    }
    [0, 1, 2]
}

/// Integrals over `P_i × P_j` for the given pair class.
pub fn pair_integrals<T: Real>(
    mesh: &SurfaceMesh<T>,
    i: usize,
    j: usize,
    class: PanelPairClass,
    kappa: T,
    quad: &PairQuadrature<T>,
    with_derivative: bool,
) -> PairIntegrals<T> {
    let four_pi = T::lit(4.0) * T::PI();
    let (pi, pj) = (mesh.panel(i), mesh.panel(j));
    let (ai, aj) = (mesh.areas()[i], mesh.areas()[j]);
    let nj = mesh.normals()[j];
    let result = match class {
        PanelPairClass::Far => tensor(&points(&quad.far, &pi, ai), &points(&quad.far, &pj, aj), kappa, with_derivative),
        PanelPairClass::Identical => {
            let s = weak_singular_self(&pi, |r: T| (-kappa * r).exp() / r, quad.self_order);
            let e = if with_derivative {
                weak_singular_self(&pi, |r: T| (-kappa * r).exp(), quad.self_order)
            } else {
                T::zero()
            };
            // Odd kernels integrate to zero over a panel paired with itself.
            PairIntegrals { s, v: [T::zero(); 3], e, f: [T::zero(); 3] }
        }
        PanelPairClass::Near { levels } => {
            let outer = points(&quad.near[(levels as usize).clamp(1, 3) - 1], &pi, ai);
            let (s, v) = static_part(&outer, &pj, nj);
            let mut acc = PairIntegrals { s, v, e: T::zero(), f: [T::zero(); 3] };
            if kappa > T::zero() {
                let outer = points(&quad.bounded, &pi, ai);
                let inner = points(&quad.inner, &pj, aj);
                acc = acc.add(tensor_remainder(&outer, &inner, kappa, with_derivative));
            }
            acc
        }
        PanelPairClass::EdgeAdjacent | PanelPairClass::VertexAdjacent => {
            let (ti, tj) = (mesh.triangles()[i], mesh.triangles()[j]);
            let order = shared_first(ti, tj);
            let ordered = [pi[order[0]], pi[order[1]], pi[order[2]]];
            let rule = if class == PanelPairClass::EdgeAdjacent { &quad.edge } else { &quad.vertex };
            let (s, v) = static_part(&points(rule, &ordered, ai), &pj, nj);
            let mut acc = PairIntegrals { s, v, e: T::zero(), f: [T::zero(); 3] };
            if kappa > T::zero() {
                let outer = points(&quad.bounded, &pi, ai);
                let inner = points(&quad.bounded, &pj, aj);
                acc = acc.add(tensor_remainder(&outer, &inner, kappa, with_derivative));
            }
            acc
        }
    };
    result.scaled(T::one() / four_pi)
}
