//! Contact torus model, spinor conventions and the Fourier blocks of the
//! Dirac family.

pub mod block;
pub mod chain;
pub mod clifford;
pub mod geometry;
pub mod identities;
pub mod splitting;
pub mod toy;

use thiserror::Error;

pub use block::{
    assemble_block, block_spectrum, cutoff_for_window, hf_slope, BlockId, EigenPair, FourierBlockOperator, Spin,
};
pub use chain::{BlockChain, ChainEigenPair, SymTridiag};
pub use clifford::CliffordFrame;
pub use geometry::{ContactTorusGeometry, OMEGA_MAX, OMEGA_MIN, PERIOD};
pub use identities::{commutator_residual, weitzenbock_residual};
pub use splitting::{beta_ratio_from_slope, pointwise_density, splitting_projectors, PointDensity, WeightedMode};
pub use toy::{ToyCrossing, ToyCrossingFamily};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("conformal factor {0} outside [9/10, 10/9]")]
    ConformalFactor(f64),
    #[error("{0} must be finite")]
    NonFinite(&'static str),
    #[error("z-mode cutoff {0} cannot carry the k±2 coupling (need K >= 2)")]
    CutoffTooSmall(usize),
    #[error("coupling r = {0} must be a finite non-negative number")]
    NegativeCoupling(f64),
    #[error("Hermitian eigensolver did not converge on a {0}x{0} block")]
    EigensolverDiverged(usize),
    #[error("eigenpair residual {residual:e} (relative) too large at eigenvalue {value}")]
    EigenResidual { value: f64, residual: f64 },
    #[error("vector length {found} does not match block dimension {expected}")]
    ShapeMismatch { expected: usize, found: usize },
}
