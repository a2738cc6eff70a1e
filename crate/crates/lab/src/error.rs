use std::io;
use std::path::PathBuf;

use sflow_core::displacement::DisplacementError;
use sflow_core::heat::HeatError;
use sflow_core::spectral::SpectralError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("config error: {0}")]
    Config(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("resource guard: {0}")]
    Resource(String),
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error("i/o error on {}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
}

impl LabError {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        LabError::Io { path: path.into(), source }
    }

    /// Process exit status: 1 invariant/numerical, 2 configuration, 3 resources.
    pub fn exit_code(&self) -> u8 {
        match self {
            LabError::Invariant(_) | LabError::Numeric(_) => 1,
            LabError::Config(_) => 2,
            LabError::Resource(_) | LabError::Io { .. } => 3,
        }
    }
}

impl From<SpectralError> for LabError {
    fn from(e: SpectralError) -> Self {
        match e {
            SpectralError::BlockBudget { .. } => LabError::Resource(e.to_string()),
            SpectralError::Precondition(_) | SpectralError::WindowExceeded { .. } => LabError::Config(e.to_string()),
            _ => LabError::Numeric(e.to_string()),
        }
    }
}

impl From<DisplacementError> for LabError {
    fn from(e: DisplacementError) -> Self {
        match e {
            DisplacementError::Spectral(s) => s.into(),
            DisplacementError::Precondition(_) => LabError::Config(e.to_string()),
            _ => LabError::Numeric(e.to_string()),
        }
    }
}

impl From<HeatError> for LabError {
    fn from(e: HeatError) -> Self {
        match e {
            HeatError::Spectral(s) => s.into(),
            HeatError::Precondition(_) | HeatError::Params { .. } | HeatError::Grid(_) => {
                LabError::Config(e.to_string())
            }
            _ => LabError::Numeric(e.to_string()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn budget_maps_to_resource_exit() {
        let e: LabError = SpectralError::BlockBudget { needed: 10, budget: 1 }.into();
        assert_eq!(e.exit_code(), 3);
        let e: LabError = DisplacementError::Precondition("x".into()).into();
        assert_eq!(e.exit_code(), 2);
        assert_eq!(LabError::Invariant("flows differ".into()).exit_code(), 1);
    }
}
