//! Spectra over many blocks, eigenvalue configurations, branches and
//! spectral flow.

pub mod branches;
pub mod config;
pub mod family;
pub mod flow;
pub mod window;

use thiserror::Error;

use crate::model::ModelError;

pub use branches::{track_branches, Branch, BranchSet};
pub use config::{
    build_configuration, build_configuration_scaled, build_family_configuration, window_half_width, ConfigEntry,
    ConfigPoint, EigenConfiguration, RGrid,
};
pub use family::{HermitianFamily, SectorKey, TorusFamily, SLOPE_BOUND, ZERO_TOL};
pub use flow::{
    count_flow, spectral_flow_counting, spectral_flow_from_zero, spectral_flow_tracking, track_flow, CountingBackend,
    FlowMethod, SpectralFlowReport, TrackingOptions,
};
pub use window::{
    bergman_density, bergman_sum, count_in_interval, dim_v, integrated_bergman, spectrum_in_window, split_norms,
    weighted_density, Spectrum, SpectrumEntry, WindowOptions, DEFAULT_BLOCK_BUDGET,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("window needs {needed} blocks, over the budget of {budget}")]
    BlockBudget { needed: usize, budget: usize },
    #[error("requested |λ| ≤ {requested} exceeds the certified window {window}")]
    WindowExceeded { requested: f64, window: f64 },
    #[error("eigenvectors were not retained for this spectrum")]
    MissingVectors,
    #[error("branch moved {movement} near r = {r}, more than the admissible {allowed}")]
    GridTooCoarse { r: f64, movement: f64, allowed: f64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
}
