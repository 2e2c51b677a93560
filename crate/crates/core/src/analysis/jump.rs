//! Boundary limits of the Dirac potential: comparing `Φ(x ± εN)` against
//! the principal value plus or minus half the normal multiplier.

use faer::c64;
use serde::Serialize;

use super::{observed_orders, AnalysisError};
use crate::assembly::{evaluate_potential, principal_value_at_centroids, DensityVector};
use crate::geometry::{self, Vec3};
use crate::kernels::{pauli_dot, PhysicalParams};
use crate::mesh::SurfaceMesh;
use crate::scalar::Real;

/// Directions from the mesh center selecting the probe panels. Generic on
/// purpose, so no probe sits on a symmetry plane of the test shapes.
pub const PROBE_DIRECTIONS: [[f64; 3]; 6] = [
    [1.0, 2.0, 3.0],
    [-2.0, 1.0, 0.5],
    [0.3, -1.0, -2.0],
    [-1.0, -1.0, 1.0],
    [2.0, -0.4, 0.7],
    [-0.6, 0.9, -1.5],
];

/// Smooth 4-spinor test density, polynomial in the scaled coordinates.
pub fn test_density(u: [f64; 3]) -> [c64; 4] {
    [
        c64::new(1.0 + 0.5 * u[0], 0.0),
        c64::new(0.3 * u[1], -0.2 * u[2]),
        c64::new(0.4 * u[0] * u[2], 0.1),
        c64::new(0.2, 0.1 * u[1] - 0.3 * u[0] * u[0]),
    ]
}

#[derive(Clone, Debug, Serialize)]
pub struct JumpRow {
    pub panels: usize,
    pub h: f64,
    pub epsilon: f64,
    pub probes: usize,
    /// `max |Φ(x_c + εN) − (C g + (i/2)(α·N) g)(x_c)| / max |g|`.
    pub exterior_residual: f64,
    /// `max |Φ(x_c − εN) − (C g − (i/2)(α·N) g)(x_c)| / max |g|`.
    pub interior_residual: f64,
    /// Exterior residual against the opposite sign assignment.
    pub swapped_exterior_residual: f64,
    /// Interior residual against the opposite sign assignment.
    pub swapped_interior_residual: f64,
}

fn nearest_panels<T: Real>(mesh: &SurfaceMesh<T>) -> Vec<usize> {
    let c = geometry::cast3::<T, f64>(mesh.center());
    let mut out: Vec<usize> = PROBE_DIRECTIONS
        .iter()
        .map(|d| {
            let d = geometry::normalize(*d);
            (0..mesh.num_panels())
                .max_by(|&i, &j| {
                    let score = |k: usize| {
                        let x = geometry::sub(geometry::cast3::<T, f64>(mesh.centroids()[k]), c);
                        geometry::dot(x, d) / geometry::norm(x)
                    };
                    score(i).total_cmp(&score(j))
                })
                .expect("mesh has panels")
        })
        .collect();
    out.dedup();
    out
}

fn dist4(a: &[c64; 4], b: &[c64; 4]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

/// Jump residuals on one mesh at offset `epsilon`.
pub fn jump_residuals<T: Real>(
    mesh: &SurfaceMesh<T>,
    m: f64,
    a: f64,
    epsilon: f64,
) -> Result<JumpRow, AnalysisError> {
    let p = PhysicalParams::new(m, a)?;
    let c = geometry::cast3::<T, f64>(mesh.center());
    let r = mesh.bounding_radius(mesh.center()).to_f64_lossy();
    let n = mesh.num_panels();
    let mut g = DensityVector::zeros(n, 4);
    for i in 0..n {
        let x = geometry::cast3::<T, f64>(mesh.centroids()[i]);
        let u = geometry::scale(geometry::sub(x, c), 1.0 / r);
        let v = test_density(u);
        g.values[4 * i..4 * i + 4].copy_from_slice(&v);
    }
    let g_max = (0..n)
        .map(|i| g.values[4 * i..4 * i + 4].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .fold(0.0, f64::max);

    let probes = nearest_panels(mesh);
    let pv = principal_value_at_centroids(mesh, &g, &probes, &p)?;
    let mut outside: Vec<Vec3<f64>> = Vec::new();
    let mut inside: Vec<Vec3<f64>> = Vec::new();
    let mut half_jump: Vec<[c64; 4]> = Vec::new();
    for &i in &probes {
        let x = geometry::cast3::<T, f64>(mesh.centroids()[i]);
        let nrm = geometry::cast3::<T, f64>(mesh.normals()[i]);
        outside.push(geometry::add(x, geometry::scale(nrm, epsilon)));
        inside.push(geometry::sub(x, geometry::scale(nrm, epsilon)));
        let s = pauli_dot(nrm);
        let gi = &g.values[4 * i..4 * i + 4];
        let top = [s[0][0] * gi[2] + s[0][1] * gi[3], s[1][0] * gi[2] + s[1][1] * gi[3]];
        let bot = [s[0][0] * gi[0] + s[0][1] * gi[1], s[1][0] * gi[0] + s[1][1] * gi[1]];
        let ih = c64::new(0.0, 0.5);
        half_jump.push([ih * top[0], ih * top[1], ih * bot[0], ih * bot[1]]);
    }
    let phi_out = evaluate_potential(mesh, &g, &outside, &p)?;
    let phi_in = evaluate_potential(mesh, &g, &inside, &p)?;

    let shifted = |k: usize, sign: f64| -> [c64; 4] { std::array::from_fn(|j| pv[k][j] + half_jump[k][j] * sign) };
    let mut row = JumpRow {
        panels: n,
        h: mesh.max_edge().to_f64_lossy(),
        epsilon,
        probes: probes.len(),
        exterior_residual: 0.0,
        interior_residual: 0.0,
        swapped_exterior_residual: 0.0,
        swapped_interior_residual: 0.0,
    };
    for k in 0..probes.len() {
        row.exterior_residual = row.exterior_residual.max(dist4(&phi_out[k], &shifted(k, 1.0)) / g_max);
        row.interior_residual = row.interior_residual.max(dist4(&phi_in[k], &shifted(k, -1.0)) / g_max);
        row.swapped_exterior_residual = row.swapped_exterior_residual.max(dist4(&phi_out[k], &shifted(k, -1.0)) / g_max);
        row.swapped_interior_residual = row.swapped_interior_residual.max(dist4(&phi_in[k], &shifted(k, 1.0)) / g_max);
    }
    Ok(row)
}

#[derive(Clone, Debug, Serialize)]
pub struct JumpLadder {
    pub rows: Vec<JumpRow>,
    /// Observed orders in `h` of the exterior and interior residuals.
    pub orders: Vec<[f64; 2]>,
    /// Both residuals decrease at every step.
    pub converging: bool,
}

/// Jump residuals along paired `(mesh, ε)` levels.
pub fn jump_ladder<T: Real>(
    levels: &[(&SurfaceMesh<T>, f64)],
    m: f64,
    a: f64,
) -> Result<JumpLadder, AnalysisError> {
    let rows = levels
        .iter()
        .map(|(mesh, eps)| jump_residuals(*mesh, m, a, *eps))
        .collect::<Result<Vec<_>, _>>()?;
    let h: Vec<f64> = rows.iter().map(|r| r.h).collect();
    let ext: Vec<f64> = rows.iter().map(|r| r.exterior_residual).collect();
    let int: Vec<f64> = rows.iter().map(|r| r.interior_residual).collect();
    let (oe, oi) = (observed_orders(&h, &ext), observed_orders(&h, &int));
    let orders = oe.into_iter().zip(oi).map(|(a, b)| [a, b]).collect();
    let converging = rows.len() > 1
        && ext.windows(2).all(|w| w[1] < w[0])
        && int.windows(2).all(|w| w[1] < w[0]);
    Ok(JumpLadder { rows, orders, converging })
}
