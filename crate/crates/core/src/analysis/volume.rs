//! Optional check that the derivative quadratic form on the boundary equals
//! the squared norm of the potential over space.

use std::f64::consts::PI;

use faer::c64;
use serde::Serialize;

use super::AnalysisError;
use crate::assembly::{assemble_tables, potential_unchecked, DensityVector, QuadratureOptions, ShellKind, ShellOperator, HermitianOperator};
use crate::geometry::{self, Vec3};
use crate::kernels::PhysicalParams;
use crate::mesh::SurfaceMesh;
use crate::quadrature::gauss_legendre;
use crate::scalar::Real;

#[derive(Clone, Debug)]
pub struct VolumeOptions {
    /// Initial outer radius, relative to the mesh's bounding radius.
    pub radius: f64,
    pub angular_points: usize,
    pub radial_order: usize,
    /// Subintervals across the shell containing the surface.
    pub surface_subintervals: usize,
    /// Largest accepted tail bound relative to the volume form; the radius
    /// grows by half until it is met.
    pub tail_tol: f64,
    pub max_growth: usize,
}

impl Default for VolumeOptions {
    fn default() -> Self {
        Self { radius: 8.0, angular_points: 302, radial_order: 8, surface_subintervals: 8, tail_tol: 1e-3, max_growth: 6 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VolumeDerivativeCheck {
    pub a: f64,
    pub m: f64,
    /// `⟨(∂_aC) g, g⟩`.
    pub boundary_form: f64,
    /// `∫ |Φ(g)|²` over the ball of radius `radius`.
    pub volume_form: f64,
    /// Bound on the integral outside the ball from exponential decay.
    pub tail_bound: f64,
    pub radius: f64,
    pub relative_gap: f64,
    pub evaluation_points: usize,
}

/// Nearly uniform points on the unit sphere (golden-angle spiral).
pub fn fibonacci_sphere(n: usize) -> Vec<Vec3<f64>> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden * i as f64;
            [r * phi.cos(), r * phi.sin(), z]
        })
        .collect()
}

fn radial_rule(breaks: &[f64], order: usize) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre::<f64>(order);
    let mut out = Vec::new();
    for b in breaks.windows(2) {
        let h = b[1] - b[0];
        for (xi, wi) in x.iter().zip(&w) {
            out.push((b[0] + h * xi, h * wi));
        }
    }
    out
}

/// Compares `⟨(∂_aC) g, g⟩` with `∫_{R³∖∂Ω} |Φ^a(g)|²` computed on
/// concentric spherical shells, for a 4-spinor density `g`.
pub fn volume_derivative_check<T: Real>(
    mesh: &SurfaceMesh<T>,
    m: f64,
    a: f64,
    g: &DensityVector,
    opts: &VolumeOptions,
) -> Result<VolumeDerivativeCheck, AnalysisError> {
    let p = PhysicalParams::new(m, a)?;
    if p.a.abs() >= p.m {
        return Err(AnalysisError::Input(format!("volume identity needs |a| < m, got a = {a}")));
    }
    if g.components != 4 || g.panels() != mesh.num_panels() {
        return Err(AnalysisError::Input("density must be a 4-spinor field on the mesh".into()));
    }
    let kappa = p.kappa();
    let tables = assemble_tables(mesh, kappa, true, &QuadratureOptions::default());
    let d = ShellOperator::new(&tables, ShellKind::DcDa { a: p.a, m: p.m });
    let frame = g.to_frame(tables.sqrt_area());
    let dg = d.apply(frame.as_ref());
    let boundary_form: f64 = (0..frame.nrows()).map(|i| (frame[(i, 0)].conj() * dg[(i, 0)]).re).sum();

    let center = geometry::cast3::<T, f64>(mesh.center());
    let radii: Vec<f64> = mesh.vertices().iter().map(|v| geometry::dist(geometry::cast3::<T, f64>(*v), center)).collect();
    let inner = radii.iter().copied().fold(f64::INFINITY, f64::min) * 0.9;
    let outer = radii.iter().copied().fold(0.0, f64::max) * 1.1;
    let dirs = fibonacci_sphere(opts.angular_points);
    let sq = |v: &[c64; 4]| v.iter().map(|z| z.norm_sqr()).sum::<f64>();
    let shell = |r: f64| -> Vec<f64> {
        let pts: Vec<Vec3<f64>> = dirs.iter().map(|u| geometry::add(center, geometry::scale(*u, r))).collect();
        potential_unchecked(mesh, g, &pts, &p).iter().map(sq).collect()
    };
    let dw = 4.0 * PI / dirs.len() as f64;

    let mut breaks = vec![0.0, inner];
    for k in 1..=opts.surface_subintervals {
        breaks.push(inner + (outer - inner) * k as f64 / opts.surface_subintervals as f64);
    }
    let mut radius = opts.radius * outer / 1.1;
    let mut r = 2.0 * outer;
    while r < radius {
        breaks.push(r);
        r *= 2.0;
    }
    breaks.push(radius);
    let mut volume = 0.0;
    let mut points = 0;
    for (ri, wi) in radial_rule(&breaks, opts.radial_order) {
        volume += wi * ri * ri * dw * shell(ri).iter().sum::<f64>();
        points += dirs.len();
    }
    // Tail: |Φ|² ≤ max_{|x|=R}|Φ|² · (R/r)² e^{−2κ(r−R)} outside the ball.
    let tail_at = |radius: f64| {
        let edge = shell(radius).into_iter().fold(0.0, f64::max);
        4.0 * PI * edge * radius * radius / (2.0 * kappa)
    };
    let mut tail = tail_at(radius);
    let mut growth = 0;
    while tail > opts.tail_tol * volume.abs().max(f64::MIN_POSITIVE) && growth < opts.max_growth && volume > 0.0 {
        let next = radius * 1.5;
        for (ri, wi) in radial_rule(&[radius, next], opts.radial_order) {
            volume += wi * ri * ri * dw * shell(ri).iter().sum::<f64>();
            points += dirs.len();
        }
        radius = next;
        tail = tail_at(radius);
        growth += 1;
    }
    let scale = boundary_form.abs().max(volume.abs());
    let relative_gap = if scale == 0.0 { 0.0 } else { (boundary_form - volume).abs() / scale };
    Ok(VolumeDerivativeCheck {
        a: p.a,
        m: p.m,
        boundary_form,
        volume_form: volume,
        tail_bound: tail,
        radius,
        relative_gap,
        evaluation_points: points,
    })
}
