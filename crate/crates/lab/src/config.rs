//! Experiment configuration: a JSON document with every field optional.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sflow_core::checks::Plan;
use sflow_core::displacement::TimeProfile;
use sflow_core::model::{ContactTorusGeometry, OMEGA_MAX, OMEGA_MIN};
use sflow_core::spectral::{window_half_width, DEFAULT_BLOCK_BUDGET};

use crate::LabError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Spectrum,
    Flow,
    Displacement,
    Heat,
    Sweep,
    Verify,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Spectrum => "spectrum",
            Experiment::Flow => "flow",
            Experiment::Displacement => "displacement",
            Experiment::Heat => "heat",
            Experiment::Sweep => "sweep",
            Experiment::Verify => "verify",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    /// Must match the subcommand when present.
    pub experiment: Option<Experiment>,
    pub geometry: GeometryConfig,
    pub r: RangeConfig,
    pub window: WindowRule,
    pub profile: ProfileConfig,
    pub tolerances: Tolerances,
    pub heat: HeatConfig,
    pub verify: VerifyConfig,
    pub workers: Option<usize>,
    pub cache_dir: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeometryConfig {
    pub omega: f64,
    pub cz: f64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        GeometryConfig { omega: 1.0, cz: 0.0 }
    }
}

/// `r` values: either an explicit list or `start, start + step, …, ≤ end`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RangeConfig {
    pub start: f64,
    pub end: f64,
    pub step: f64,
    pub values: Option<Vec<f64>>,
}

impl Default for RangeConfig {
    fn default() -> Self {
        RangeConfig { start: 20.0, end: 40.0, step: 10.0, values: None }
    }
}

impl RangeConfig {
    pub fn points(&self) -> Vec<f64> {
        if let Some(v) = &self.values {
            return v.clone();
        }
        let n = ((self.end - self.start) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|i| self.start + self.step * i as f64).collect()
    }
}

/// Eigenvalue window `|λ| ≤ scale·√r` or a fixed `|λ| ≤ Λ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum WindowRule {
    Scale(f64),
    Fixed(f64),
}

impl Default for WindowRule {
    fn default() -> Self {
        WindowRule::Scale(1.0 / 3.0)
    }
}

impl WindowRule {
    pub fn half_width(self, r: f64) -> f64 {
        match self {
            WindowRule::Scale(s) => window_half_width(r, s),
            WindowRule::Fixed(l) => l,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProfileConfig {
    pub coeff: f64,
    pub window_scale: f64,
    pub r_start: f64,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        let p = TimeProfile::default();
        ProfileConfig { coeff: p.coeff, window_scale: p.window_scale, r_start: p.r_start }
    }
}

impl ProfileConfig {
    pub fn to_profile(self) -> TimeProfile {
        TimeProfile {
            coeff: self.coeff,
            window_scale: self.window_scale,
            r_start: self.r_start,
            ..TimeProfile::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Grid step of the displacement integrals.
    pub displacement_step: f64,
    /// Largest step of the tracking flow method.
    pub tracking_step: f64,
    /// Eigenvalue guard `|λ| ≤ guard` resolved by the flow methods.
    pub flow_guard: f64,
    /// Largest number of Fourier blocks one window solve may touch.
    pub block_budget: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { displacement_step: 0.05, tracking_step: 0.25, flow_guard: 1.0, block_budget: DEFAULT_BLOCK_BUDGET }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HeatConfig {
    /// Sample points `q = (0, 0, π i / points)`.
    pub points: usize,
}

impl Default for HeatConfig {
    fn default() -> Self {
        HeatConfig { points: 8 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlanSize {
    Quick,
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    pub plan: PlanSize,
    pub checks: Vec<u8>,
}

/// Checks whose pass/fail is an invariant of the code rather than a fit.
pub const INVARIANT_CHECKS: [u8; 6] = [1, 2, 4, 5, 7, 9];

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { plan: PlanSize::Quick, checks: INVARIANT_CHECKS.to_vec() }
    }
}

impl VerifyConfig {
    pub fn plan(&self) -> Plan {
        match self.plan {
            PlanSize::Quick => Plan::quick(),
            PlanSize::Full => Plan::full(),
        }
    }
}

fn field_err(field: &str, msg: impl std::fmt::Display) -> LabError {
    LabError::Config(format!("field `{field}`: {msg}"))
}

fn positive(field: &str, v: f64) -> Result<(), LabError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(field_err(field, format!("must be a positive finite number, got {v}")))
    }
}

const MAX_POINTS: usize = 10_000;

impl Config {
    pub fn from_str(text: &str, origin: &str) -> Result<Self, LabError> {
        serde_json::from_str(text).map_err(|e| LabError::Config(format!("{origin}:{}:{}: {e}", e.line(), e.column())))
    }

    pub fn load(path: &Path) -> Result<Self, LabError> {
        let text =
            fs::read_to_string(path).map_err(|e| LabError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_str(&text, &path.display().to_string())
    }

    pub fn geometry(&self) -> Result<ContactTorusGeometry, LabError> {
        ContactTorusGeometry::new(self.geometry.omega, self.geometry.cz).map_err(|e| field_err("geometry", e))
    }

    /// Semantic checks shared by all experiments, then the experiment's own.
    pub fn validate(&self, exp: Experiment) -> Result<(), LabError> {
        if let Some(e) = self.experiment {
            if e != exp {
                return Err(field_err("experiment", format!("is `{}` but the command is `{}`", e.name(), exp.name())));
            }
        }
        if !(OMEGA_MIN..=OMEGA_MAX).contains(&self.geometry.omega) {
            return Err(field_err("geometry.omega", format!("{} outside [9/10, 10/9]", self.geometry.omega)));
        }
        if !self.geometry.cz.is_finite() {
            return Err(field_err("geometry.cz", "must be finite"));
        }
        match &self.r.values {
            Some(v) => {
                if v.len() > MAX_POINTS {
                    return Err(field_err("r.values", format!("more than {MAX_POINTS} values")));
                }
                if let Some(bad) = v.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
                    return Err(field_err("r.values", format!("{bad} is not a finite non-negative number")));
                }
                if v.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(field_err("r.values", "must be strictly increasing"));
                }
            }
            None => {
                positive("r.step", self.r.step)?;
                if !(self.r.start.is_finite() && self.r.start >= 0.0) {
                    return Err(field_err("r.start", format!("must be finite and non-negative, got {}", self.r.start)));
                }
                if !(self.r.end.is_finite() && self.r.end >= self.r.start) {
                    return Err(field_err("r.end", format!("must be finite and at least r.start, got {}", self.r.end)));
                }
                if (self.r.end - self.r.start) / self.r.step > MAX_POINTS as f64 {
                    return Err(field_err("r.step", format!("more than {MAX_POINTS} points")));
                }
            }
        }
        match self.window {
            WindowRule::Scale(s) => positive("window.scale", s)?,
            WindowRule::Fixed(l) => positive("window.fixed", l)?,
        }
        positive("profile.coeff", self.profile.coeff)?;
        positive("profile.window_scale", self.profile.window_scale)?;
        positive("profile.r_start", self.profile.r_start)?;
        self.profile.to_profile().validate().map_err(|e| field_err("profile", e))?;
        positive("tolerances.displacement_step", self.tolerances.displacement_step)?;
        positive("tolerances.tracking_step", self.tolerances.tracking_step)?;
        positive("tolerances.flow_guard", self.tolerances.flow_guard)?;
        if self.tolerances.block_budget == 0 {
            return Err(field_err("tolerances.block_budget", "must be positive"));
        }
        if !(1..=256).contains(&self.heat.points) {
            return Err(field_err("heat.points", format!("must lie in 1..=256, got {}", self.heat.points)));
        }
        if let Some(bad) = self.verify.checks.iter().find(|c| !(1..=10).contains(*c)) {
            return Err(field_err("verify.checks", format!("unknown check {bad}")));
        }
        if matches!(self.workers, Some(n) if n > 1024) {
            return Err(field_err("workers", "at most 1024"));
        }
        self.validate_experiment(exp)
    }

    fn validate_experiment(&self, exp: Experiment) -> Result<(), LabError> {
        let pts = self.r.points();
        let profile = self.profile.to_profile();
        match exp {
            Experiment::Flow | Experiment::Displacement if pts.is_empty() => {
                Err(field_err("r", format!("{} needs at least one r value", exp.name())))
            }
            Experiment::Displacement | Experiment::Sweep => {
                let lo = profile.r_start.max(2.0 * profile.r_min);
                let check = if exp == Experiment::Displacement { &pts[pts.len() - 1..] } else { &pts[..] };
                match check.iter().find(|&&r| r <= lo) {
                    Some(r) => Err(field_err("r", format!("r̄ = {r} must exceed {lo} (profile.r_start and 2·r_min)"))),
                    None => Ok(()),
                }
            }
            Experiment::Heat => match pts.iter().find(|&&r| !(r >= profile.r_min && r * profile.t(r) >= 50.0)) {
                Some(r) => Err(field_err("r", format!("r = {r} gives r·t(r) below 50"))),
                None => Ok(()),
            },
            _ => Ok(()),
        }
    }

    /// The fields that determine numerical results, with experiment filled in.
    pub fn canonical(&self, exp: Experiment) -> serde_json::Value {
        let mut c = self.clone();
        c.experiment = Some(exp);
        c.workers = None;
        c.cache_dir = None;
        c.out_dir = None;
        serde_json::to_value(&c).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        let c = Config::from_str("{}", "inline").unwrap();
        assert_eq!(c, Config::default());
        assert_eq!(c.r.points(), vec![20.0, 30.0, 40.0]);
        c.validate(Experiment::Sweep).unwrap();
    }

    #[test]
    fn unknown_fields_report_position() {
        let e = Config::from_str("{\n  \"r\": {\"start\": 1, \"stp\": 2}\n}", "cfg.json").unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("cfg.json:2:") && msg.contains("stp"), "{msg}");
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn semantic_errors_name_the_field() {
        let mut c = Config::default();
        c.r.step = -1.0;
        assert!(c.validate(Experiment::Spectrum).unwrap_err().to_string().contains("r.step"));
        let mut c = Config::default();
        c.geometry.omega = 2.0;
        assert!(c.validate(Experiment::Flow).unwrap_err().to_string().contains("geometry.omega"));
        let c = Config { experiment: Some(Experiment::Heat), ..Config::default() };
        assert!(c.validate(Experiment::Flow).unwrap_err().to_string().contains("experiment"));
    }

    #[test]
    fn window_rules_parse() {
        let c = Config::from_str(r#"{"window": {"fixed": 1.5}}"#, "x").unwrap();
        assert_eq!(c.window.half_width(100.0), 1.5);
        let c = Config::from_str(r#"{"window": {"scale": 0.5}}"#, "x").unwrap();
        assert_eq!(c.window.half_width(16.0), 2.0);
    }

    #[test]
    fn explicit_values_may_be_empty() {
        let c = Config::from_str(r#"{"r": {"values": []}}"#, "x").unwrap();
        assert!(c.r.points().is_empty());
        c.validate(Experiment::Sweep).unwrap();
        assert!(c.validate(Experiment::Flow).is_err());
    }

    #[test]
    fn canonical_form_ignores_locations() {
        let a = Config { out_dir: Some("a".into()), workers: Some(3), ..Config::default() };
        assert_eq!(a.canonical(Experiment::Flow), Config::default().canonical(Experiment::Flow));
    }
}
