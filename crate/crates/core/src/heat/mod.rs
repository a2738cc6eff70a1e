//! Mehler heat kernel of the model operator and spectral heat traces.

pub mod mehler;
pub mod operator;
pub mod trace;

use thiserror::Error;

use crate::quadrature::QuadratureError;
use crate::spectral::SpectralError;

pub use mehler::{
    coincident_closed_form, flat_kernel, initial_condition_residual, k_matrix, kappa, l2_kernel_bound_check,
    semigroup_check, L2KernelCheck, MehlerParams, Point, SemigroupCheck,
};
pub use operator::{model_l_apply, pde_convergence, pde_residual, Grid3, PdeResidual};
pub use trace::{
    heat_spectrum, heat_trace_pointwise, heat_trace_window, l2_heat_bound_check, sample_trace, trace_leading,
    trace_leading_residual, HeatTraceSample, L2HeatCheck, TraceResidual,
};

#[derive(Debug, Error)]
pub enum HeatError {
    #[error("invalid kernel parameters r = {r}, t = {t}, Ω = {omega}")]
    Params { r: f64, t: f64, omega: f64 },
    #[error("grid: {0}")]
    Grid(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}
