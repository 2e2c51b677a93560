//! Panel-constant Galerkin discretization of `C_σ^a`, its blocks `K^a` and
//! `W^a`, the derivative `∂_a C_σ^a`, and the normal multipliers.

mod dump;
mod integrals;
mod operators;
mod potential;
mod tables;

use thiserror::Error;

pub use dump::{mesh_hash64, read_dump, write_dump, DumpHeader};
pub use integrals::{pair_integrals, PairIntegrals, PairQuadrature, QuadratureOptions};
pub use operators::{
    DenseOperator, DensityVector, HermitianOperator, LinearCombination, Multiplier, MultiplierKind, OperatorMeta,
    Product, ShellKind, ShellOperator,
};
pub(crate) use operators::cgemm;
pub use potential::{evaluate_potential, principal_value_at_centroids, MIN_RELATIVE_DISTANCE};
pub(crate) use potential::potential_unchecked;
pub use tables::{assemble_tables, PanelTables, SkewResidual};

use crate::kernels::PhysicalParams;
use crate::mesh::SurfaceMesh;
use crate::scalar::Real;

#[derive(Debug, Error)]
pub enum AssemblyError {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("point {index} lies {distance:.3e} from the surface, closer than the allowed {required:.3e}")]
    PointOnSurface { index: usize, distance: f64, required: f64 },
    #[error("non-finite input")]
    NonFinite,
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

/// Bound on the operator norm of the skew part dropped from an operator of
/// the given kind.
pub fn kind_residual(tables: &PanelTables, kind: ShellKind) -> f64 {
    let r = tables.skew_residual();
    match kind {
        ShellKind::Scalar | ShellKind::K => r.scalar,
        ShellKind::W => r.pauli,
        ShellKind::C { a, m } => (a.abs() + m) * r.scalar + r.pauli,
        ShellKind::DcDa { a, m } => {
            let kappa = tables.kappa();
            (a.abs() * (a.abs() + m) / kappa) * r.derivative_scalar + r.scalar + a.abs() * r.derivative_pauli
        }
    }
}

/// Dense matrix of a shell operator built from precomputed tables.
pub fn dense_from_tables(tables: &PanelTables, kind: ShellKind) -> DenseOperator {
    let op = ShellOperator::new(tables, kind);
    let d = op.components();
    let mut dense = DenseOperator::materialize(&op, tables.sqrt_area(), d, kind_residual(tables, kind));
    let (a, m) = match kind {
        ShellKind::C { a, m } | ShellKind::DcDa { a, m } => (Some(a), Some(m)),
        _ => (None, None),
    };
    dense.meta = OperatorMeta { a, m, mesh_id: Some(tables.mesh_id().to_string()) };
    dense
}

fn tables_for<T: Real>(mesh: &SurfaceMesh<T>, p: &PhysicalParams<f64>, derivative: bool) -> PanelTables {
    assemble_tables(mesh, p.kappa(), derivative, &QuadratureOptions::default())
}

/// Galerkin matrix of `C_σ^a` on 4-spinors.
pub fn assemble_c<T: Real>(mesh: &SurfaceMesh<T>, p: &PhysicalParams<f64>) -> DenseOperator {
    dense_from_tables(&tables_for(mesh, p, false), ShellKind::C { a: p.a, m: p.m })
}

/// Galerkin matrix of the single layer `K^a` on 2-spinors.
pub fn assemble_k<T: Real>(mesh: &SurfaceMesh<T>, p: &PhysicalParams<f64>) -> DenseOperator {
    dense_from_tables(&tables_for(mesh, p, false), ShellKind::K)
}

/// Galerkin matrix of the Pauli operator `W^a` on 2-spinors.
pub fn assemble_w<T: Real>(mesh: &SurfaceMesh<T>, p: &PhysicalParams<f64>) -> DenseOperator {
    dense_from_tables(&tables_for(mesh, p, false), ShellKind::W)
}

/// Galerkin matrix of `∂_a C_σ^a`; requires `|a| < m`.
pub fn assemble_dc_da<T: Real>(mesh: &SurfaceMesh<T>, p: &PhysicalParams<f64>) -> Result<DenseOperator, AssemblyError> {
    if p.a.abs() >= p.m {
        return Err(AssemblyError::Parameter(format!("the a-derivative needs |a| < m, got a = {}, m = {}", p.a, p.m)));
    }
    Ok(dense_from_tables(&tables_for(mesh, p, true), ShellKind::DcDa { a: p.a, m: p.m }))
}

/// `α·N` (4-spinors) or `σ·N` (2-spinors) as a dense operator.
pub fn multiplier<T: Real>(mesh: &SurfaceMesh<T>, kind: MultiplierKind) -> DenseOperator {
    let normals: Vec<[f64; 3]> = mesh.normals().iter().map(|n| crate::geometry::cast3(*n)).collect();
    let sqrt_area: Vec<f64> = mesh.areas().iter().map(|a| a.to_f64_lossy().sqrt()).collect();
    let op = Multiplier::new(&normals, kind);
    let d = match kind {
        MultiplierKind::AlphaN => 4,
        MultiplierKind::SigmaN => 2,
    };
    DenseOperator::materialize(&op, &sqrt_area, d, 0.0)
}
