//! Crate-wide error with module-qualified messages.

use thiserror::Error;

use crate::analysis::AnalysisError;
use crate::assembly::AssemblyError;
use crate::capacity::CapacityError;
use crate::kernels::KernelError;
use crate::mesh::MeshError;
use crate::quadrature::QuadratureError;
use crate::shapes::ShapeError;
use crate::spectral::SpectralError;

#[derive(Debug, Error)]
pub enum Error {
    #[error("mesh: {0}")]
    Mesh(#[from] MeshError),
    #[error("shape: {0}")]
    Shape(#[from] ShapeError),
    #[error("quadrature: {0}")]
    Quadrature(#[from] QuadratureError),
    #[error("kernels: {0}")]
    Kernel(#[from] KernelError),
    #[error("assembly: {0}")]
    Assembly(#[from] AssemblyError),
    #[error("spectral: {0}")]
    Spectral(#[from] SpectralError),
    #[error("capacity: {0}")]
    Capacity(#[from] CapacityError),
    #[error("analysis: {0}")]
    Analysis(AnalysisError),
}

impl From<AnalysisError> for Error {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::Kernel(e) => Self::Kernel(e),
            AnalysisError::Assembly(e) => Self::Assembly(e),
            AnalysisError::Spectral(e) => Self::Spectral(e),
            AnalysisError::Capacity(e) => Self::Capacity(e),
            AnalysisError::Mesh(e) => Self::Mesh(e),
            e @ AnalysisError::Input(_) => Self::Analysis(e),
        }
    }
}

impl Error {
    /// Whether the failure is numerical (a solver or conditioning problem)
    /// rather than invalid input.
    pub fn is_numerical(&self) -> bool {
        match self {
            Self::Spectral(SpectralError::Dimension(_)) => false,
            Self::Spectral(_) | Self::Capacity(_) => true,
            Self::Assembly(AssemblyError::NonFinite) => true,
            _ => false,
        }
    }
}
