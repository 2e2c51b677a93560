//! Triangle quadrature: symmetric regular rules, closed-form static panel
//! potentials, singular self-panel integrals and pair classification.

mod analytic;
mod rules;
mod singular;

use serde::Serialize;
use thiserror::Error;

use crate::geometry;
use crate::mesh::SurfaceMesh;
use crate::scalar::Real;

pub use analytic::{polygon_static, triangle_static, StaticIntegrals};
pub use rules::{collapsed_rule, gauss_legendre, regular_rule, TriangleRule};
pub use singular::{
    bounded_field_factor, bounded_potential_factor, centroid_self_integrals, edge_graded_rule, polygon_centroid,
    pv_self_contribution, vertex_graded_rule, weak_singular_self,
};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum QuadratureError {
    #[error("no symmetric triangle rule for degree {0} (supported: 1..=10)")]
    UnsupportedDegree(usize),
}

/// How a pair of panels is integrated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PanelPairClass {
    Identical,
    EdgeAdjacent,
    VertexAdjacent,
    /// Disjoint but closer than `η·diam`; `levels` rounds of 4-way subdivision.
    Near { levels: u32 },
    Far,
}

/// Default proximity factor separating near from far pairs.
pub const DEFAULT_ETA: f64 = 2.0;

/// Classifies a panel pair by shared vertices and centroid distance relative
/// to the larger panel diameter. Symmetric in `(i, j)`.
pub fn classify_pair<T: Real>(mesh: &SurfaceMesh<T>, i: usize, j: usize, eta: T) -> PanelPairClass {
    if i == j {
        return PanelPairClass::Identical;
    }
    let (ti, tj) = (mesh.triangles()[i], mesh.triangles()[j]);
    let shared = ti.iter().filter(|v| tj.contains(v)).count();
    match shared {
        3 => return PanelPairClass::Identical,
        2 => return PanelPairClass::EdgeAdjacent,
        1 => return PanelPairClass::VertexAdjacent,
        _ => {}
    }
    let diam = mesh.panel_diameter(i).max(mesh.panel_diameter(j));
    let d = geometry::dist(mesh.centroids()[i], mesh.centroids()[j]);
    let threshold = eta * diam;
    if d >= threshold {
        return PanelPairClass::Far;
    }
    let deficit = (threshold / d).log2().ceil().to_f64_lossy();
    PanelPairClass::Near { levels: deficit.clamp(1.0, 3.0) as u32 }
}
