//! Spectral flow laboratory for the Dirac family `D_r = D_{A₀ − i r a}` on a
//! contact 3-torus.
//!
//! * [`model`]: geometry, spinor conventions, Fourier blocks and identities.
//! * [`spectral`]: window spectra, eigenvalue configurations, branch tracking
//!   and spectral flow.
//! * [`displacement`]: `Φ`, `Ψ`, the Ψ-displacement and `η̇`.
//! * [`heat`]: the Mehler model kernel and heat-trace checks.

// NaN inputs must fail the `!(x > 0.0)` style guards.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod checks;
pub mod displacement;
pub mod exec;
pub mod fit;
pub mod heat;
pub mod model;
pub mod quadrature;
pub mod spectral;

pub use exec::Execution;
pub use model::ModelError;
