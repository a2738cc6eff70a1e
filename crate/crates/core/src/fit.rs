//! Fitted constants of the asymptotic estimates and their persisted baseline.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FitError {
    #[error("baseline I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("baseline format: {0}")]
    Format(#[from] serde_json::Error),
}

/// Values `c(p)` of one constant over a parameter sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedSeries {
    pub name: String,
    pub samples: Vec<(f64, f64)>,
}

impl FittedSeries {
    pub fn new(name: impl Into<String>) -> Self {
        Self { name: name.into(), samples: Vec::new() }
    }

    pub fn push(&mut self, param: f64, constant: f64) {
        self.samples.push((param, constant));
    }

    pub fn max(&self) -> f64 {
        self.samples.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.samples.iter().map(|s| s.1).fold(f64::INFINITY, f64::min)
    }

    fn well_formed(&self) -> bool {
        !self.samples.is_empty() && self.samples.iter().all(|s| s.1.is_finite() && s.1 >= 0.0)
    }

    /// `max / min`; infinite when some sample is zero.
    pub fn spread(&self) -> f64 {
        self.max() / self.min()
    }

    /// All samples positive and within a factor of each other.
    pub fn stable_within(&self, factor: f64) -> bool {
        self.well_formed() && self.min() > 0.0 && self.spread() <= factor
    }

    /// No sample exceeds `factor` times the first one: the constant does not grow.
    pub fn bounded_by_first(&self, factor: f64) -> bool {
        self.well_formed() && self.samples.iter().all(|s| s.1 <= factor * self.samples[0].1)
    }

    /// Samples in sweep order, for the "monotonically improving" checks.
    pub fn non_increasing(&self) -> bool {
        self.samples.windows(2).all(|w| w[1].1 <= w[0].1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BaselineOutcome {
    Match,
    /// Lower than recorded.
    Improved,
    /// Higher than recorded: the fitted constant grew.
    Regressed,
    Missing,
}

/// Named fitted constants (smaller is better) with a relative tolerance,
/// plus the ids of checks recorded as failing. Stored as sorted JSON.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Baseline {
    pub rel_tol: f64,
    pub constants: BTreeMap<String, f64>,
    #[serde(default)]
    pub known_failures: BTreeSet<u8>,
}

impl Baseline {
    pub fn new(rel_tol: f64) -> Self {
        Self { rel_tol, constants: BTreeMap::new(), known_failures: BTreeSet::new() }
    }

    pub fn load(path: &Path) -> Result<Self, FitError> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }

    /// Writes through a temporary file and a rename.
    pub fn save(&self, path: &Path) -> Result<(), FitError> {
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        let tmp = path.with_extension("json.tmp");
        let mut f = fs::File::create(&tmp)?;
        f.write_all(serde_json::to_string_pretty(self)?.as_bytes())?;
        f.write_all(b"\n")?;
        f.sync_all()?;
        fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn check(&self, name: &str, value: f64) -> BaselineOutcome {
        match self.constants.get(name) {
            None => BaselineOutcome::Missing,
            Some(&b) if (value - b).abs() <= self.rel_tol * b.abs().max(value.abs()) => BaselineOutcome::Match,
            Some(&b) if value < b => BaselineOutcome::Improved,
            Some(_) => BaselineOutcome::Regressed,
        }
    }

    pub fn record(&mut self, name: &str, value: f64) {
        self.constants.insert(name.to_string(), value);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stability_rules() {
        let mut s = FittedSeries::new("c");
        for (p, c) in [(20.0, 1.0), (40.0, 1.8), (60.0, 0.7)] {
            s.push(p, c);
        }
        assert!(!s.stable_within(2.0));
        assert!(s.stable_within(2.6));
        assert!(s.bounded_by_first(2.0));
        assert!(!s.non_increasing());
        s.push(80.0, f64::NAN);
        assert!(!s.bounded_by_first(10.0));
    }

    #[test]
    fn baseline_roundtrip() {
        let dir = std::env::temp_dir().join(format!("sflow-fit-{}", std::process::id()));
        let path = dir.join("b.json");
        let mut b = Baseline::new(1e-6);
        b.record("slope.c", 3.25);
        b.save(&path).unwrap();
        let back = Baseline::load(&path).unwrap();
        assert_eq!(back, b);
        assert_eq!(back.check("slope.c", 3.25 * (1.0 + 1e-8)), BaselineOutcome::Match);
        assert_eq!(back.check("slope.c", 3.3), BaselineOutcome::Regressed);
        assert_eq!(back.check("slope.c", 3.0), BaselineOutcome::Improved);
        assert_eq!(back.check("slope.c", f64::NAN), BaselineOutcome::Regressed);
        assert_eq!(back.check("other", 1.0), BaselineOutcome::Missing);
        fs::remove_dir_all(dir).unwrap();
    }
}
