//! Isoperimetric-type bounds for `λ_Ω` in terms of area, capacity and
//! volume.

use std::f64::consts::PI;

use serde::Serialize;

use super::AnalysisError;
use crate::assembly::{assemble_tables, QuadratureOptions, ShellKind, ShellOperator};
use crate::capacity::capacity_from;
use crate::mesh::SurfaceMesh;
use crate::scalar::Real;
use crate::spectral::{lambda_omega_bisect_op, lambda_omega_qep_op, KrylovOptions};

/// Upper and lower coupling bounds in terms of `x = Area/Cap`:
/// `4(±m x + √(m² x² + 1/4))`.
pub fn coupling_bounds(m: f64, area_over_cap: f64) -> (f64, f64) {
    let mx = m * area_over_cap;
    let root = (mx * mx + 0.25).sqrt();
    (4.0 * (mx + root), 4.0 * (-mx + root))
}

/// `m·Area/Cap > 1/(4√2)`.
pub fn constraint_holds(m: f64, area_over_cap: f64) -> bool {
    m * area_over_cap > 1.0 / (4.0 * 2f64.sqrt())
}

/// The constraint relaxed by the operator norm of `W`:
/// `m·Area/Cap > (1 − 1/(4‖W‖²)) / (4√(2 − 1/(4‖W‖²)))`.
pub fn weakened_constraint_holds(m: f64, area_over_cap: f64, norm_w: f64) -> bool {
    let q = 1.0 / (4.0 * norm_w * norm_w);
    m * area_over_cap > (1.0 - q) / (4.0 * (2.0 - q).sqrt())
}

/// Lower bound for `λ_Ω·Cap` with the capacity term replaced by its
/// equal-volume ball value: `4(m·Area + √(m²Area² + 6^{2/3}π^{4/3}Vol^{2/3}))`.
pub fn volume_bound(m: f64, area: f64, volume: f64) -> f64 {
    let c = 6f64.powf(2.0 / 3.0) * PI.powf(4.0 / 3.0) * volume.powf(2.0 / 3.0);
    4.0 * (m * area + (m * m * area * area + c).sqrt())
}

#[derive(Clone, Debug, Serialize)]
pub struct ShapeReport {
    pub shape: String,
    pub mesh_id: String,
    pub panels: usize,
    pub m: f64,
    pub area: f64,
    pub volume: f64,
    pub capacity: f64,
    pub area_over_cap: f64,
    pub norm_k: f64,
    pub norm_w: f64,
    /// `‖K‖ − Area/Cap`, nonnegative up to discretization error.
    pub norm_k_gap: f64,
    pub lambda_omega: f64,
    pub lambda_omega_bisection: Option<f64>,
    pub bisection_error: Option<String>,
    /// Relative gap between the two methods.
    pub method_gap: Option<f64>,
    pub sup_bound: f64,
    pub inf_bound: f64,
    /// `λ_Ω − rhs_sup`.
    pub sup_margin: f64,
    /// `rhs_inf − 4/λ_Ω`.
    pub inf_margin: f64,
    /// `λ_Ω·Cap − volume bound`.
    pub volume_margin: f64,
    /// `Cap − Cap(ball of equal volume)`.
    pub polya_szego_margin: f64,
    pub constraint_ok: bool,
    pub weakened_constraint_ok: bool,
    pub capacity_residual: f64,
    pub lambda_residual: f64,
}

/// All isoperimetric quantities for one mesh. `shape` is a label carried
/// into the report.
pub fn isoperimetric_report<T: Real>(mesh: &SurfaceMesh<T>, m: f64, shape: &str) -> Result<ShapeReport, AnalysisError> {
    if !(m > 0.0) || !m.is_finite() {
        return Err(AnalysisError::Input(format!("mass must be positive, got {m}")));
    }
    let tables = assemble_tables(mesh, 0.0, false, &QuadratureOptions::default());
    let cap = capacity_from(mesh, &tables)?;
    let k = ShellOperator::new(&tables, ShellKind::K);
    let w = ShellOperator::new(&tables, ShellKind::W);
    let opts = KrylovOptions::default();
    let qep = lambda_omega_qep_op(&k, &w, tables.sqrt_area(), m, &opts)?;
    let (bisection, bisection_error) = match lambda_omega_bisect_op(&k, &w, tables.sqrt_area(), m, &opts) {
        Ok(r) => (Some(r.lambda_omega), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let lambda = qep.lambda_omega;
    let x = cap.area_over_cap;
    let (sup, inf) = coupling_bounds(m, x);
    let norm_w = qep.bounds.norm_w;
    Ok(ShapeReport {
        shape: shape.to_string(),
        mesh_id: mesh.id(),
        panels: mesh.num_panels(),
        m,
        area: cap.area,
        volume: cap.volume,
        capacity: cap.cap,
        area_over_cap: x,
        norm_k: qep.bounds.norm_k,
        norm_w,
        norm_k_gap: qep.bounds.norm_k - x,
        lambda_omega: lambda,
        lambda_omega_bisection: bisection,
        bisection_error,
        method_gap: bisection.map(|b| (b - lambda).abs() / lambda),
        sup_bound: sup,
        inf_bound: inf,
        sup_margin: lambda - sup,
        inf_margin: inf - 4.0 / lambda,
        volume_margin: lambda * cap.cap - volume_bound(m, cap.area, cap.volume),
        polya_szego_margin: cap.polya_szego_margin,
        constraint_ok: constraint_holds(m, x),
        weakened_constraint_ok: weakened_constraint_holds(m, x, norm_w),
        capacity_residual: cap.residual,
        lambda_residual: qep.residual,
    })
}
