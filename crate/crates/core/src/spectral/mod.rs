//! Weighted-Hermitian eigensolves, operator norms and the critical coupling
//! `λ_Ω`.

mod krylov;
mod qep;

use faer::{c64, Mat};
use serde::Serialize;
use thiserror::Error;

pub use krylov::{partial_eig, partial_eig_from, ritz_residuals, KrylovOptions, PartialEigen, Which};
pub(crate) use krylov::{eigh, materialize};
pub use qep::{
    lambda_omega_bisect, lambda_omega_bisect_op, lambda_omega_qep, lambda_omega_qep_op, quadratic_forms, BoundsCheck,
    LambdaMethod, LambdaOmegaResult, QuadraticForms, QEP_DENSE_LIMIT,
};

use crate::assembly::{cgemm, DenseOperator, DensityVector, HermitianOperator};

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("operator has non-finite entries")]
    NonFinite,
    #[error("eigensolver failed: {0}")]
    Convergence(String),
    #[error("no real eigenvalue above 2 (largest real candidate {largest:?})")]
    NoRealEigenvalue { largest: Option<f64> },
    #[error("λ_Ω = {value} outside the bracket [{lower}, {upper}]")]
    BracketViolation { value: f64, lower: f64, upper: f64 },
    #[error("‖T_λ‖ − 1 does not change sign on [{lower}, {upper}] (values {f_lower}, {f_upper})")]
    BracketFailure { lower: f64, upper: f64, f_lower: f64, f_upper: f64 },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

/// Full spectrum of a weighted-Hermitian operator.
#[derive(Clone, Debug, Serialize)]
pub struct SpectralReport {
    /// Descending.
    pub eigenvalues: Vec<f64>,
    /// Weighted-orthonormal eigenvectors, parallel to `eigenvalues`.
    #[serde(skip)]
    pub eigenvectors: Vec<DensityVector>,
    pub a: Option<f64>,
    pub m: Option<f64>,
    pub mesh_id: Option<String>,
    /// `‖A v − λ v‖_σ` per pair.
    pub residuals: Vec<f64>,
    pub max_residual: f64,
}

/// Applies the deterministic phase convention: the first component whose
/// modulus exceeds `1e-8` of the column maximum is made positive real.
pub(crate) fn fix_phase(v: &mut Mat<c64>) {
    for c in 0..v.ncols() {
        let max = (0..v.nrows()).fold(0.0f64, |m, r| m.max(v[(r, c)].norm()));
        if max == 0.0 {
            continue;
        }
        if let Some(r) = (0..v.nrows()).find(|&r| v[(r, c)].norm() > 1e-8 * max) {
            let z = v[(r, c)];
            let phase = z.conj() / z.norm();
            for rr in 0..v.nrows() {
                v[(rr, c)] *= phase;
            }
        }
    }
}

/// Full eigen-decomposition in the weight-square-root frame.
pub fn weighted_hermitian_eig(op: &DenseOperator) -> Result<SpectralReport, SpectralError> {
    if !op.is_finite() {
        return Err(SpectralError::NonFinite);
    }
    let n = op.dim();
    let (vals, vecs) = eigh(op.frame().as_ref())?;
    let mut v = Mat::from_fn(n, n, |r, c| vecs[(r, n - 1 - c)]);
    let eigenvalues: Vec<f64> = vals.iter().rev().copied().collect();
    fix_phase(&mut v);
    let av = cgemm(op.frame().as_ref(), v.as_ref());
    let residuals: Vec<f64> = (0..n)
        .map(|c| (0..n).map(|r| (av[(r, c)] - v[(r, c)] * eigenvalues[c]).norm_sqr()).sum::<f64>().sqrt())
        .collect();
    let sa = op.sqrt_area();
    let eigenvectors = (0..n)
        .map(|c| DensityVector::from_frame(v.as_ref().subcols(c, 1), op.components(), &sa))
        .collect();
    Ok(SpectralReport {
        max_residual: residuals.iter().fold(0.0, |a, b| a.max(*b)),
        eigenvalues,
        eigenvectors,
        a: op.meta.a,
        m: op.meta.m,
        mesh_id: op.meta.mesh_id.clone(),
        residuals,
    })
}

/// Eigenvalues only, descending.
pub fn weighted_hermitian_eigenvalues(op: &DenseOperator) -> Result<Vec<f64>, SpectralError> {
    if !op.is_finite() {
        return Err(SpectralError::NonFinite);
    }
    let vals = op
        .frame()
        .self_adjoint_eigenvalues(faer::Side::Lower)
        .map_err(|e| SpectralError::Convergence(format!("{e:?}")))?;
    Ok(vals.into_iter().rev().collect())
}

/// Frobenius norm of `Â − V Λ V^*` relative to that of `Â`.
pub fn reconstruction_error(op: &DenseOperator, report: &SpectralReport) -> f64 {
    let n = op.dim();
    let sa = op.sqrt_area();
    let mut v = Mat::<c64>::zeros(n, report.eigenvectors.len());
    for (c, e) in report.eigenvectors.iter().enumerate() {
        let col = e.to_frame(&sa);
        for r in 0..n {
            v[(r, c)] = col[(r, 0)];
        }
    }
    let vl = Mat::from_fn(n, v.ncols(), |r, c| v[(r, c)] * report.eigenvalues[c]);
    let rec = cgemm(vl.as_ref(), v.adjoint());
    let diff = op.frame() - &rec;
    diff.norm_l2() / op.frame().norm_l2().max(f64::MIN_POSITIVE)
}

/// `max |λ|` of a dense weighted-Hermitian operator.
pub fn operator_norm(op: &DenseOperator) -> Result<f64, SpectralError> {
    let vals = weighted_hermitian_eigenvalues(op)?;
    Ok(vals.iter().fold(0.0f64, |a, v| a.max(v.abs())))
}

/// `max |λ|` of an operator given by its action.
pub fn operator_norm_of(op: &dyn HermitianOperator, opts: &KrylovOptions) -> Result<f64, SpectralError> {
    let e = partial_eig(op, 1, Which::LargestMagnitude, opts)?;
    Ok(e.values[0].abs())
}
