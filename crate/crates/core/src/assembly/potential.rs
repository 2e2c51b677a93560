//! Layer potentials `Φ^a(g)(x) = ∫ φ^a(x − y) g(y) dσ(y)` of panel-constant
//! densities, off the surface and at panel centroids.

use faer::c64;
use rayon::prelude::*;

use super::operators::DensityVector;
use super::AssemblyError;
use crate::geometry::{self, Vec3};
use crate::kernels::{pauli_dot, PhysicalParams};
use crate::mesh::SurfaceMesh;
use crate::quadrature::{
    bounded_field_factor, bounded_potential_factor, centroid_self_integrals, regular_rule, triangle_static,
    TriangleRule,
};
use crate::scalar::Real;

/// Points closer to a panel than this fraction of its diameter are refused.
pub const MIN_RELATIVE_DISTANCE: f64 = 0.1;

/// Far-field threshold in panel diameters for the plain tensor rule.
const FAR_RATIO: f64 = 4.0;

struct PanelRules {
    far: TriangleRule<f64>,
    near: TriangleRule<f64>,
}

impl PanelRules {
    fn new() -> Self {
        let base: TriangleRule<f64> = regular_rule(7).expect("degree 7 exists");
        Self { near: base.subdivided(2), far: base }
    }
}

/// `(∫ e^{−κr}/(4πr), ∫ e^{−κr}(1+κr)(x−y)/(4πr³))` over panel `j` at `x`.
fn panel_integrals<T: Real>(mesh: &SurfaceMesh<T>, j: usize, x: Vec3<f64>, kappa: f64, rules: &PanelRules) -> (f64, Vec3<f64>) {
    let v: [Vec3<f64>; 3] = mesh.panel(j).map(geometry::cast3);
    let area = mesh.areas()[j].to_f64_lossy();
    let diam = mesh.panel_diameter(j).to_f64_lossy();
    let d = geometry::point_triangle_distance(x, &v);
    let four_pi = 4.0 * std::f64::consts::PI;
    if d >= FAR_RATIO * diam {
        let mut s = 0.0;
        let mut f = [0.0; 3];
        for (y, w) in rules.far.map(&v, area) {
            let diff = geometry::sub(x, y);
            let r = geometry::norm(diff);
            let e = (-kappa * r).exp();
            s += w * e / r;
            f = geometry::add(f, geometry::scale(diff, w * e * (1.0 + kappa * r) / (r * r * r)));
        }
        return (s / four_pi, geometry::scale(f, 1.0 / four_pi));
    }
    let n = geometry::cast3(mesh.normals()[j]);
    let st = triangle_static(&v, n, x);
    let (mut s, mut f) = (st.potential, st.field);
    if kappa > 0.0 {
        for (y, w) in rules.near.map(&v, area) {
            let diff = geometry::sub(x, y);
            let r = geometry::norm(diff);
            s += w * bounded_potential_factor(kappa * r) / r;
            f = geometry::add(f, geometry::scale(diff, w * bounded_field_factor(kappa * r) / (r * r * r)));
        }
    }
    (s / four_pi, geometry::scale(f, 1.0 / four_pi))
}

/// Applies `[[(a+m)S, iσ·V], [iσ·V, (a−m)S]]` to one 4-spinor.
fn apply_block(s: f64, v: Vec3<f64>, a: f64, m: f64, g: [c64; 4]) -> [c64; 4] {
    let p = pauli_dot(v);
    let i = c64::new(0.0, 1.0);
    let w = |x0: c64, x1: c64| (i * (p[0][0] * x0 + p[0][1] * x1), i * (p[1][0] * x0 + p[1][1] * x1));
    let (t0, t1) = w(g[2], g[3]);
    let (b0, b1) = w(g[0], g[1]);
    [g[0] * (s * (a + m)) + t0, g[1] * (s * (a + m)) + t1, b0 + g[2] * (s * (a - m)), b1 + g[3] * (s * (a - m))]
}

fn spinor(g: &DensityVector, j: usize) -> [c64; 4] {
    std::array::from_fn(|c| g.get(j, c))
}

/// `Φ^a(g)` at off-surface points.
///
/// Points closer than [`MIN_RELATIVE_DISTANCE`] panel diameters to any panel
/// are refused rather than evaluated inaccurately.
pub fn evaluate_potential<T: Real>(
    mesh: &SurfaceMesh<T>,
    g: &DensityVector,
    points: &[Vec3<f64>],
    p: &PhysicalParams<f64>,
) -> Result<Vec<[c64; 4]>, AssemblyError> {
    check_density(mesh, g)?;
    for (k, x) in points.iter().enumerate() {
        for j in 0..mesh.num_panels() {
            let v: [Vec3<f64>; 3] = mesh.panel(j).map(geometry::cast3);
            let d = geometry::point_triangle_distance(*x, &v);
            let required = MIN_RELATIVE_DISTANCE * mesh.panel_diameter(j).to_f64_lossy();
            if !(d >= required) {
                return Err(AssemblyError::PointOnSurface { index: k, distance: d, required });
            }
        }
    }
    Ok(potential_unchecked(mesh, g, points, p))
}

/// `Φ^a(g)` without the distance check; near-surface values are only as
/// accurate as the near-panel rule allows.
pub(crate) fn potential_unchecked<T: Real>(
    mesh: &SurfaceMesh<T>,
    g: &DensityVector,
    points: &[Vec3<f64>],
    p: &PhysicalParams<f64>,
) -> Vec<[c64; 4]> {
    let rules = PanelRules::new();
    let kappa = p.kappa();
    points
        .par_iter()
        .map(|x| {
            let mut acc = [c64::new(0.0, 0.0); 4];
            for j in 0..mesh.num_panels() {
                let (s, v) = panel_integrals(mesh, j, *x, kappa, &rules);
                let y = apply_block(s, v, p.a, p.m, spinor(g, j));
                for c in 0..4 {
                    acc[c] += y[c];
                }
            }
            acc
        })
        .collect()
}

/// Principal-value `C_σ^a g` evaluated at the centroids of `panels`
/// (collocation rather than Galerkin averaging).
pub fn principal_value_at_centroids<T: Real>(
    mesh: &SurfaceMesh<T>,
    g: &DensityVector,
    panels: &[usize],
    p: &PhysicalParams<f64>,
) -> Result<Vec<[c64; 4]>, AssemblyError> {
    check_density(mesh, g)?;
    let rules = PanelRules::new();
    let kappa = p.kappa();
    let mut out = Vec::with_capacity(panels.len());
    for &i in panels {
        if i >= mesh.num_panels() {
            return Err(AssemblyError::Parameter(format!("panel index {i} out of range")));
        }
        let x = geometry::cast3(mesh.centroids()[i]);
        let mut acc = [c64::new(0.0, 0.0); 4];
        for j in 0..mesh.num_panels() {
            let (s, v) = if j == i {
                let poly: Vec<Vec3<f64>> = mesh.panel(i).iter().map(|q| geometry::cast3(*q)).collect();
                centroid_self_integrals(&poly, geometry::cast3(mesh.normals()[i]), kappa, 12)
            } else {
                panel_integrals(mesh, j, x, kappa, &rules)
            };
            let y = apply_block(s, v, p.a, p.m, spinor(g, j));
            for c in 0..4 {
                acc[c] += y[c];
            }
        }
        out.push(acc);
    }
    Ok(out)
}

fn check_density<T: Real>(mesh: &SurfaceMesh<T>, g: &DensityVector) -> Result<(), AssemblyError> {
    if g.components != 4 || g.values.len() != 4 * mesh.num_panels() {
        return Err(AssemblyError::Parameter(format!(
            "density has {} values with {} components, expected 4-spinors on {} panels",
            g.values.len(),
            g.components,
            mesh.num_panels()
        )));
    }
    if !g.is_finite() {
        return Err(AssemblyError::NonFinite);
    }
    Ok(())
}
