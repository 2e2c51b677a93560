//! Boundary-element toolkit for the shell-interaction operators of the free
//! Dirac operator on closed surfaces.
//!
//! Geometry, quadrature and kernels are generic over the floating-point type
//! (`f32` or `f64`); the assembled operators and everything built on them use
//! `f64`.

pub mod analysis;
pub mod assembly;
pub mod capacity;
pub mod error;
pub mod geometry;
pub mod kernels;
pub mod mesh;
pub mod quadrature;
pub mod report;
pub mod scalar;
pub mod shapes;
pub mod spectral;

pub use error::Error;
pub use scalar::Real;

pub type Mesh = mesh::SurfaceMesh<f64>;
pub type Mesh32 = mesh::SurfaceMesh<f32>;
pub type Params = kernels::PhysicalParams<f64>;
pub type Params32 = kernels::PhysicalParams<f32>;
