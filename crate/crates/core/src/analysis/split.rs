//! Norm of the single layer on two far-apart scaled copies of a domain.

use serde::Serialize;

use super::{analysis_krylov, AnalysisError};
use crate::assembly::{assemble_tables, QuadratureOptions, ShellKind, ShellOperator};
use crate::geometry::{self, Vec3};
use crate::mesh::{surface_distance, two_copy, SurfaceMesh};
use crate::scalar::Real;
use crate::spectral::{partial_eig, Which};

#[derive(Clone, Debug, Serialize)]
pub struct SplitRow {
    pub z: f64,
    /// Distance between the two copies.
    pub distance: f64,
    pub area: f64,
    pub volume: f64,
    /// `‖K‖` on the union.
    pub norm_k_split: f64,
    /// `|‖K_{t,z}‖ − t‖K‖|`.
    pub deviation: f64,
    /// `Area_{t,z} / (2π·distance)`.
    pub bound: f64,
    pub within_bound: bool,
    /// `‖K_{t,z}‖ < ‖K‖`.
    pub below_original: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SplitTable {
    pub mesh_id: String,
    pub t: f64,
    pub direction: [f64; 3],
    pub norm_k: f64,
    pub volume: f64,
    pub rows: Vec<SplitRow>,
}

fn norm_k<T: Real>(mesh: &SurfaceMesh<T>) -> Result<f64, AnalysisError> {
    let tables = assemble_tables(mesh, 0.0, false, &QuadratureOptions::default());
    let op = ShellOperator::new(&tables, ShellKind::Scalar);
    Ok(partial_eig(&op, 1, Which::LargestAlgebraic, &analysis_krylov())?.values[0])
}

fn translated<T: Real>(mesh: &SurfaceMesh<T>, z: Vec3<T>) -> Result<SurfaceMesh<T>, AnalysisError> {
    let v = mesh.vertices().iter().map(|p| geometry::add(*p, z)).collect();
    Ok(SurfaceMesh::new(v, mesh.triangles().to_vec())?)
}

/// Compares `‖K‖` on `t·Ω ∪ (t·Ω + z)` with `t‖K_Ω‖` for translations of
/// the given magnitudes along the x axis.
pub fn split_experiment<T: Real>(mesh: &SurfaceMesh<T>, t: f64, z_magnitudes: &[f64]) -> Result<SplitTable, AnalysisError> {
    let direction = [1.0, 0.0, 0.0];
    let base = norm_k(mesh)?;
    let scaled = mesh.scaled(T::lit(t))?;
    let mut rows = Vec::with_capacity(z_magnitudes.len());
    for &zm in z_magnitudes {
        let z: Vec3<T> = [T::lit(zm), T::zero(), T::zero()];
        let union = two_copy(mesh, T::lit(t), z)?;
        let distance = surface_distance(&scaled, &translated(&scaled, z)?).to_f64_lossy();
        let area = union.area().to_f64_lossy();
        let nk = norm_k(&union)?;
        let deviation = (nk - t * base).abs();
        let bound = area / (2.0 * std::f64::consts::PI * distance);
        rows.push(SplitRow {
            z: zm,
            distance,
            area,
            volume: union.volume().to_f64_lossy(),
            norm_k_split: nk,
            deviation,
            bound,
            within_bound: deviation <= bound,
            below_original: nk < base,
        });
    }
    Ok(SplitTable { mesh_id: mesh.id(), t, direction, norm_k: base, volume: mesh.volume().to_f64_lossy(), rows })
}
