//! PCA and robust kernel PCA as difference-of-convex programs.
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`). Concrete
//! `f64` aliases are exported at the crate root for the common case.

pub mod bench;
pub mod dcfw;
pub mod error;
pub mod kernel;
pub mod linalg;
pub mod pca;
pub mod rng;
pub mod robust;
mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub use dcfw::{SpectralFunction, Subgradient};
pub use kernel::{KernelMatrix, KernelOperator, KernelSpec, NystromKernel, OosProjector};
pub use linalg::{CompactEig, CompactSvd, DataMatrix};
pub use pca::{FormulationId, SolverConfig, SolverReport, StoppingRule, Termination};
pub use robust::RobustConfig;

pub type DataMatrix64 = DataMatrix<f64>;
pub type DataMatrix32 = DataMatrix<f32>;
pub type CompactSvd64 = CompactSvd<f64>;
pub type CompactEig64 = CompactEig<f64>;
pub type SpectralFunction64 = SpectralFunction<f64>;
pub type SolverConfig64 = SolverConfig<f64>;
pub type SolverConfig32 = SolverConfig<f32>;
pub type SolverReport64 = SolverReport<f64>;
pub type SolverReport32 = SolverReport<f32>;
pub type RobustConfig64 = RobustConfig<f64>;
pub type KernelMatrix64 = KernelMatrix<f64>;
pub type OosProjector64 = OosProjector<f64>;
