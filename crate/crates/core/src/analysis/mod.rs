//! Numerical experiments built on the assembled operators: identity
//! residuals, jump relations, eigencurves, coupling sets, isoperimetric
//! margins and the split-domain experiment.

mod coupling;
mod curves;
mod identities;
mod iso;
mod jump;
mod split;
mod volume;

use thiserror::Error;

pub use coupling::{
    coupling_set, coupling_set_from, endpoint_coupling, AccumulationDiagnostic, CouplingSet, EndpointCoupling, PartnerCheck,
    ENDPOINT_TOL, FULL_SPECTRUM_LIMIT,
};
pub use curves::{eigencurves, symmetric_grid, CurveOptions, CurvePoint, Eigencurve, EigencurveSet};
pub use iso::{
    constraint_holds, coupling_bounds, isoperimetric_report, volume_bound, weakened_constraint_holds, ShapeReport,
};
pub use jump::{jump_ladder, jump_residuals, test_density, JumpLadder, JumpRow, PROBE_DIRECTIONS};
pub use identities::{
    identity_ladder, identity_suite, restricted_norm, smooth_basis, sphere_checks, IdentityLadder, IdentityOptions, IdentityRow,
    SphereChecks,
};
pub use split::{split_experiment, SplitRow, SplitTable};
pub use volume::{fibonacci_sphere, volume_derivative_check, VolumeDerivativeCheck, VolumeOptions};

use crate::assembly::AssemblyError;
use crate::capacity::CapacityError;
use crate::kernels::KernelError;
use crate::mesh::MeshError;
use crate::spectral::{KrylovOptions, SpectralError};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Capacity(#[from] CapacityError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error("invalid input: {0}")]
    Input(String),
}

/// Observed convergence orders `log(e_k/e_{k+1}) / log(h_k/h_{k+1})`.
pub fn observed_orders(h: &[f64], err: &[f64]) -> Vec<f64> {
    h.windows(2)
        .zip(err.windows(2))
        .map(|(h, e)| (e[0] / e[1]).ln() / (h[0] / h[1]).ln())
        .collect()
}

/// Eigensolver settings for analysis runs: dense below dimension 2048, and
/// a residual tolerance that leaves eigenvalues accurate to ~1e-16.
pub(crate) fn analysis_krylov() -> KrylovOptions {
    KrylovOptions { dense_below: 2048, tol: 1e-8, ..KrylovOptions::default() }
}
