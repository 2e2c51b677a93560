//! Newtonian capacity from the unit-potential single-layer equation.

use faer::linalg::solvers::Solve;
use faer::{Mat, Side};
use serde::Serialize;
use thiserror::Error;

use crate::assembly::{assemble_tables, PanelTables, QuadratureOptions};
use crate::mesh::SurfaceMesh;
use crate::scalar::Real;

/// Condition numbers above this are reported as ill-conditioning.
pub const CONDITION_LIMIT: f64 = 1e12;

#[derive(Debug, Error)]
pub enum CapacityError {
    #[error("single-layer matrix is ill-conditioned (estimate {estimate:.3e})")]
    IllConditioned { estimate: f64 },
    #[error("single-layer matrix is not positive definite")]
    NotPositive,
    #[error("tables were assembled at κ = {0}, the capacity needs κ = 0")]
    WrongDecay(f64),
}

/// Solution of `K ψ = 1` with its diagnostics.
#[derive(Clone, Debug, Serialize)]
pub struct EquilibriumDensity {
    /// Panel values of `ψ`.
    pub density: Vec<f64>,
    /// `‖Kψ − 1‖_σ / ‖1‖_σ` of the Galerkin system.
    pub residual: f64,
    pub condition_estimate: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CapacityReport {
    pub cap: f64,
    #[serde(skip)]
    pub equilibrium_density: Vec<f64>,
    pub area: f64,
    pub volume: f64,
    pub area_over_cap: f64,
    /// `2(6π²)^{1/3} Vol^{1/3}`, the capacity of the ball of equal volume.
    pub polya_szego_rhs: f64,
    pub polya_szego_margin: f64,
    pub min_density: f64,
    pub max_density: f64,
    pub residual: f64,
    pub condition_estimate: f64,
}

/// Capacity of the ball with the given volume.
pub fn ball_capacity(volume: f64) -> f64 {
    2.0 * (6.0 * std::f64::consts::PI.powi(2)).cbrt() * volume.cbrt()
}

/// Capacity of the prolate spheroid with semi-axes `(a, b, b)`, `a ≥ b`:
/// `4π·a e / atanh(e)` with eccentricity `e = √(1 − b²/a²)`.
pub fn spheroid_capacity_oracle(a_axis: f64, b_axis: f64) -> f64 {
    assert!(a_axis >= b_axis && b_axis > 0.0, "need a ≥ b > 0");
    let e = (1.0 - (b_axis / a_axis).powi(2)).max(0.0).sqrt();
    let ratio = if e < 1e-4 { 1.0 - e * e / 3.0 } else { e / e.atanh() };
    4.0 * std::f64::consts::PI * a_axis * ratio
}

/// Solves the Galerkin system of `K_Ω ψ = 1` with `K` at zero decay.
pub fn equilibrium_density_from(tables: &PanelTables) -> Result<EquilibriumDensity, CapacityError> {
    if tables.kappa() != 0.0 {
        return Err(CapacityError::WrongDecay(tables.kappa()));
    }
    let s = tables.scalar_frame();
    let sa = tables.sqrt_area();
    let n = sa.len();
    let llt = s.llt(Side::Lower).map_err(|_| CapacityError::NotPositive)?;
    let rhs = Mat::from_fn(n, 1, |i, _| sa[i]);
    let y = llt.solve(&rhs);
    let sy = s * &y;
    let area: f64 = sa.iter().map(|x| x * x).sum();
    let residual = (0..n).map(|i| (sy[(i, 0)] - sa[i]).powi(2)).sum::<f64>().sqrt() / area.sqrt();

    // Extreme eigenvalues by power and inverse iteration.
    let mut v = Mat::from_fn(n, 1, |i, _| 1.0 + (i % 5) as f64 * 0.01);
    let mut top = 0.0;
    for _ in 0..60 {
        let w = s * &v;
        top = w.norm_l2() / v.norm_l2();
        v = &w * faer::Scale(1.0 / w.norm_l2());
    }
    let mut u = Mat::from_fn(n, 1, |i, _| if i % 2 == 0 { 1.0 } else { -1.0 } + (i % 3) as f64 * 0.1);
    let mut inv_top = 0.0;
    for _ in 0..60 {
        let w = llt.solve(&u);
        inv_top = w.norm_l2() / u.norm_l2();
        u = &w * faer::Scale(1.0 / w.norm_l2());
    }
    let condition_estimate = top * inv_top;
    if !(condition_estimate <= CONDITION_LIMIT) {
        return Err(CapacityError::IllConditioned { estimate: condition_estimate });
    }
    let density = (0..n).map(|i| y[(i, 0)] / sa[i]).collect();
    Ok(EquilibriumDensity { density, residual, condition_estimate })
}

/// Equilibrium density `ψ` with `K_Ω ψ = 1` on the surface.
pub fn equilibrium_density<T: Real>(mesh: &SurfaceMesh<T>) -> Result<EquilibriumDensity, CapacityError> {
    equilibrium_density_from(&assemble_tables(mesh, 0.0, false, &QuadratureOptions::default()))
}

/// Capacity report from precomputed zero-decay tables.
pub fn capacity_from<T: Real>(mesh: &SurfaceMesh<T>, tables: &PanelTables) -> Result<CapacityReport, CapacityError> {
    let eq = equilibrium_density_from(tables)?;
    let areas: Vec<f64> = mesh.areas().iter().map(|a| a.to_f64_lossy()).collect();
    let cap: f64 = areas.iter().zip(&eq.density).map(|(a, p)| a * p).sum();
    let area: f64 = areas.iter().sum();
    let volume = mesh.volume().to_f64_lossy();
    let rhs = ball_capacity(volume);
    Ok(CapacityReport {
        cap,
        area,
        volume,
        area_over_cap: area / cap,
        polya_szego_rhs: rhs,
        polya_szego_margin: cap - rhs,
        min_density: eq.density.iter().copied().fold(f64::INFINITY, f64::min),
        max_density: eq.density.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        residual: eq.residual,
        condition_estimate: eq.condition_estimate,
        equilibrium_density: eq.density,
    })
}

/// Capacity as the total equilibrium charge at unit potential.
pub fn capacity<T: Real>(mesh: &SurfaceMesh<T>) -> Result<CapacityReport, CapacityError> {
    capacity_from(mesh, &assemble_tables(mesh, 0.0, false, &QuadratureOptions::default()))
}
