//! Coupling constants `λ = −1/c` of the shell operator, their `λ ↦ −4/λ`
//! symmetry, and the endpoint characterization of `λ_Ω`.

use faer::{c64, Mat, MatRef};
use serde::Serialize;

use super::{analysis_krylov, AnalysisError};
use crate::assembly::{
    assemble_tables, HermitianOperator, Multiplier, MultiplierKind, PanelTables, QuadratureOptions, ShellKind,
    ShellOperator,
};
use crate::geometry;
use crate::kernels::PhysicalParams;
use crate::mesh::SurfaceMesh;
use crate::scalar::Real;
use crate::spectral::{lambda_omega_qep_op, partial_eig, KrylovOptions, Which};

/// Certificate that `−1/(4c)` lies in the spectrum.
#[derive(Clone, Debug, Serialize)]
pub struct PartnerCheck {
    pub eigenvalue: f64,
    /// `−1/(4c)`.
    pub target: f64,
    /// Rayleigh quotient of `(α·N) g`.
    pub rayleigh: f64,
    /// `‖C h − target·h‖ / ‖h‖` for `h = (α·N) g`; bounds the distance from
    /// `target` to the spectrum.
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct AccumulationDiagnostic {
    pub dimension: usize,
    /// Median of `|c² − 1/4|` over the full spectrum.
    pub median_distance: f64,
    /// Fraction of eigenvalues with `|λ² − 4| < 0.4` (`λ = −1/c`).
    pub fraction_near: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CouplingSet {
    pub a: f64,
    pub m: f64,
    pub mesh_id: String,
    /// Tracked eigenvalues, largest `|c|` first.
    pub eigenvalues: Vec<f64>,
    /// `−1/c` for each tracked eigenvalue.
    pub lambdas: Vec<f64>,
    pub partners: Vec<PartnerCheck>,
    /// Per λ: `|λ' − (−4/λ)|` with `λ' = −1/rayleigh` of the partner.
    pub symmetry_residuals: Vec<f64>,
    /// Largest partner residual.
    pub max_residual: f64,
    /// Only computed when the full spectrum is affordable.
    pub accumulation: Option<AccumulationDiagnostic>,
}

/// Full spectra are only computed up to this dimension.
pub const FULL_SPECTRUM_LIMIT: usize = 2048;

fn weighted_normals<T: Real>(mesh: &SurfaceMesh<T>) -> Vec<[f64; 3]> {
    mesh.normals().iter().map(|n| geometry::cast3(*n)).collect()
}

fn col_dot(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> c64 {
    (0..a.nrows()).map(|r| a[(r, 0)].conj() * b[(r, 0)]).sum()
}

/// Partner checks for frame eigenvectors `g` with eigenvalues `c`.
fn partner_checks(op: &dyn HermitianOperator, alpha_n: &Multiplier, values: &[f64], g: MatRef<'_, c64>) -> Vec<PartnerCheck> {
    let h = alpha_n.apply(g);
    let ch = op.apply(h.as_ref());
    values
        .iter()
        .enumerate()
        .map(|(j, &c)| {
            let (hj, chj) = (h.col(j).as_mat(), ch.col(j).as_mat());
            let nn = col_dot(hj, hj).re;
            let rayleigh = col_dot(hj, chj).re / nn;
            let target = -1.0 / (4.0 * c);
            let r = Mat::from_fn(hj.nrows(), 1, |i, _| chj[(i, 0)] - hj[(i, 0)] * target);
            PartnerCheck { eigenvalue: c, target, rayleigh, residual: r.norm_l2() / nn.sqrt() }
        })
        .collect()
}

/// Coupling set from precomputed tables at `κ = √(m² − a²)`.
pub fn coupling_set_from<T: Real>(
    mesh: &SurfaceMesh<T>,
    tables: &PanelTables,
    m: f64,
    a: f64,
    tracked: usize,
) -> Result<CouplingSet, AnalysisError> {
    let p = PhysicalParams::new(m, a)?;
    let op = ShellOperator::new(tables, ShellKind::C { a: p.a, m: p.m });
    let alpha_n = Multiplier::new(&weighted_normals(mesh), MultiplierKind::AlphaN);
    let dim = op.dim();
    let opts = analysis_krylov();
    let (values, vectors, accumulation) = if dim <= FULL_SPECTRUM_LIMIT {
        let e = partial_eig(&op, dim, Which::LargestMagnitude, &KrylovOptions { dense_below: dim, ..opts })?;
        let acc = accumulation(&e.values);
        let k = tracked.min(dim);
        let v = e.vectors.as_ref().subcols(0, k).to_owned();
        (e.values[..k].to_vec(), v, Some(acc))
    } else {
        let e = partial_eig(&op, tracked, Which::LargestMagnitude, &opts)?;
        (e.values, e.vectors, None)
    };
    let partners = partner_checks(&op, &alpha_n, &values, vectors.as_ref());
    let lambdas: Vec<f64> = values.iter().map(|c| -1.0 / c).collect();
    let symmetry_residuals = lambdas
        .iter()
        .zip(&partners)
        .map(|(l, p)| (-1.0 / p.rayleigh - (-4.0 / l)).abs())
        .collect();
    let max_residual = partners.iter().fold(0.0f64, |s, p| s.max(p.residual));
    Ok(CouplingSet {
        a: p.a,
        m: p.m,
        mesh_id: tables.mesh_id().to_string(),
        eigenvalues: values,
        lambdas,
        partners,
        symmetry_residuals,
        max_residual,
        accumulation,
    })
}

fn accumulation(values: &[f64]) -> AccumulationDiagnostic {
    let mut d: Vec<f64> = values.iter().map(|c| (c * c - 0.25).abs()).collect();
    d.sort_by(f64::total_cmp);
    let near = values
        .iter()
        .filter(|&&c| c != 0.0 && ((1.0 / (c * c)) - 4.0).abs() < 0.4)
        .count();
    AccumulationDiagnostic {
        dimension: values.len(),
        median_distance: d[d.len() / 2],
        fraction_near: near as f64 / values.len() as f64,
    }
}

/// The `λ_j(a) = −1/c_j(a)` for the `tracked` largest `|c_j|`, with
/// certificates of the `c ↦ −1/(4c)` spectral symmetry.
pub fn coupling_set<T: Real>(mesh: &SurfaceMesh<T>, m: f64, a: f64, tracked: usize) -> Result<CouplingSet, AnalysisError> {
    let p = PhysicalParams::new(m, a)?;
    if p.a.abs() >= p.m {
        return Err(AnalysisError::Input(format!("coupling set needs |a| < m, got a = {a}")));
    }
    let tables = assemble_tables(mesh, p.kappa(), false, &QuadratureOptions::default());
    coupling_set_from(mesh, &tables, m, a, tracked)
}

#[derive(Clone, Debug, Serialize)]
pub struct EndpointCoupling {
    pub m: f64,
    pub mesh_id: String,
    /// `sup{−1/c : c ∈ spec(C^m)}`, attained at the partner `−1/(4 c_max)`
    /// of the largest eigenvalue, hence equal to `4 c_max(C^m)`.
    pub lambda_m_sup: f64,
    /// `inf{−1/c : c ∈ spec(C^{−m})} = 4 c_min(C^{−m})`.
    pub lambda_minus_m_inf: f64,
    pub lambda_omega: f64,
    pub equals_lambda_omega: bool,
    /// `max(|λ_m^s − λ_Ω|, |λ_{−m}^i + λ_Ω|) / λ_Ω`.
    pub residual: f64,
    /// `4/λ_Ω`, the smallest `|λ|` with a nontrivial kernel.
    pub inf_abs_lambda: f64,
    /// Partner residual certifying `−1/(4 c_max)` in `spec(C^m)`.
    pub partner_residual: f64,
    /// Largest gap between the `compared` largest eigenvalues of `C^m` and
    /// the negated smallest of `C^{−m}`, in sorted order.
    pub mirror_residual: f64,
    pub compared: usize,
}

/// Relative tolerance for declaring `λ_m^s = λ_Ω`.
pub const ENDPOINT_TOL: f64 = 1e-6;

/// Endpoint couplings at `a = ±m` and their relation to `λ_Ω`.
pub fn endpoint_coupling<T: Real>(mesh: &SurfaceMesh<T>, m: f64, compared: usize) -> Result<EndpointCoupling, AnalysisError> {
    let tables = assemble_tables(mesh, 0.0, false, &QuadratureOptions::default());
    let plus = ShellOperator::new(&tables, ShellKind::C { a: m, m });
    let minus = ShellOperator::new(&tables, ShellKind::C { a: -m, m });
    let opts = analysis_krylov();
    let k = compared.max(1).min(plus.dim());
    let top = partial_eig(&plus, k, Which::LargestAlgebraic, &opts)?;
    let bottom_minus = partial_eig(&minus, k, Which::SmallestAlgebraic, &opts)?;

    let alpha_n = Multiplier::new(&weighted_normals(mesh), MultiplierKind::AlphaN);
    let c_max = top.values[0];
    let partner = partner_checks(&plus, &alpha_n, &top.values[..1], top.vectors.as_ref().subcols(0, 1));
    let lambda_m_sup = 4.0 * c_max;
    let lambda_minus_m_inf = 4.0 * bottom_minus.values[0];

    let kop = ShellOperator::new(&tables, ShellKind::K);
    let wop = ShellOperator::new(&tables, ShellKind::W);
    let lo = lambda_omega_qep_op(&kop, &wop, tables.sqrt_area(), m, &KrylovOptions::default())?;
    let lambda_omega = lo.lambda_omega;
    let residual = (lambda_m_sup - lambda_omega).abs().max((lambda_minus_m_inf + lambda_omega).abs()) / lambda_omega;

    // spec(C^m) = −spec(C^{−m}), compared at the isolated end where the
    // eigensolves converge quickly.
    let mirror = (0..k).fold(0.0f64, |s, i| s.max((top.values[i] + bottom_minus.values[i]).abs()));
    Ok(EndpointCoupling {
        m,
        mesh_id: tables.mesh_id().to_string(),
        lambda_m_sup,
        lambda_minus_m_inf,
        lambda_omega,
        equals_lambda_omega: residual <= ENDPOINT_TOL,
        residual,
        inf_abs_lambda: 4.0 / lambda_omega,
        partner_residual: partner[0].residual,
        mirror_residual: mirror,
        compared: k,
    })
}

