//! Ψ-displacement of the eigenvalue configuration, the asymmetry term η̇ and
//! the residuals comparing them with the spectral flow.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::Execution;
use crate::model::ContactTorusGeometry;
use crate::quadrature::{self, QuadratureError};
use crate::spectral::{
    build_configuration_scaled, ConfigPoint, EigenConfiguration, RGrid, SectorKey, SpectralError, Spectrum,
    SLOPE_BOUND, ZERO_TOL,
};

#[derive(Debug, Error)]
pub enum DisplacementError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

/// Heat time `t(r) = coeff · log r / r` and the eigenvalue window `|λ| < scale·√r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeProfile {
    pub r_min: f64,
    pub coeff: f64,
    pub window_scale: f64,
    /// First `r` of every displacement integral.
    pub r_start: f64,
}

impl Default for TimeProfile {
    fn default() -> Self {
        Self { r_min: 3.0, coeff: 20.0, window_scale: 1.0 / 3.0, r_start: 13.0 }
    }
}

impl TimeProfile {
    pub fn validate(&self) -> Result<(), DisplacementError> {
        let ok = self.r_min >= 3.0
            && self.coeff > 0.0
            && self.window_scale > 0.0
            && self.r_start >= self.r_min
            && [self.r_min, self.coeff, self.window_scale, self.r_start].iter().all(|v| v.is_finite());
        if !ok {
            return Err(DisplacementError::Precondition(format!("invalid time profile {self:?}")));
        }
        if self.coeff * self.r_start.ln() < 50.0 {
            return Err(DisplacementError::Precondition(format!(
                "r_start = {} gives r·t(r) = {:.3} < 50",
                self.r_start,
                self.coeff * self.r_start.ln()
            )));
        }
        Ok(())
    }

    /// Meaningful for `r ≥ r_min`.
    pub fn t(&self, r: f64) -> f64 {
        self.coeff * r.ln() / r
    }

    pub fn dt(&self, r: f64) -> f64 {
        self.coeff * (1.0 - r.ln()) / (r * r)
    }

    pub fn window(&self, r: f64) -> f64 {
        self.window_scale * r.sqrt()
    }

    fn check_r(&self, r: f64) -> Result<(), DisplacementError> {
        if r >= self.r_min && r.is_finite() {
            Ok(())
        } else {
            Err(DisplacementError::Precondition(format!("r = {r} below r_min = {}", self.r_min)))
        }
    }
}

/// `∫₀^λ e^{−u² t} du`.
pub fn phi(lambda: f64, t: f64) -> f64 {
    let mag = 0.5 * (PI / t).sqrt() * libm::erf(lambda.abs() * t.sqrt());
    if lambda < 0.0 {
        -mag
    } else {
        mag
    }
}

/// `1 / Φ(w)` computed without cancellation.
fn phi_inverse(w: f64, t: f64) -> f64 {
    2.0 * (t / PI).sqrt() / libm::erf(w * t.sqrt())
}

/// `Φ_r(λ) / (2 Φ_r(window))`, valued in `[−½, ½]` on the window.
pub fn psi(lambda: f64, r: f64, profile: &TimeProfile) -> Result<f64, DisplacementError> {
    profile.check_r(r)?;
    let w = profile.window(r);
    if lambda.abs() > w * (1.0 + 4.0 * f64::EPSILON) {
        return Err(DisplacementError::Precondition(format!("|λ| = {} exceeds window {w}", lambda.abs())));
    }
    let t = profile.t(r);
    Ok(0.5 * phi(lambda, t) * phi_inverse(w, t))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhiInverseCheck {
    pub r: f64,
    pub t: f64,
    pub inverse: f64,
    /// `|Φ⁻¹ − (4/π)^{1/2} t^{1/2}|`
    pub lhs: f64,
    /// `6 r^{−1/2} e^{−rt/9}`
    pub rhs: f64,
    pub pass: bool,
}

/// Two-sided estimate of `Φ_r(√r/3)⁻¹` for `rt ≥ 50`, `0 < t < 1`.
pub fn phi_inverse_bound_check(r: f64, t: f64) -> Result<PhiInverseCheck, DisplacementError> {
    if !(r >= 1.0 && t > 0.0 && t < 1.0 && r * t >= 50.0) {
        return Err(DisplacementError::Precondition(format!("(r, t) = ({r}, {t}) outside rt ≥ 50, 0 < t < 1")));
    }
    let x = (r * t).sqrt() / 3.0;
    let lead = 2.0 * (t / PI).sqrt();
    let inverse = lead / libm::erf(x);
    let lhs = lead * libm::erfc(x) / libm::erf(x);
    let rhs = 6.0 / r.sqrt() * (-r * t / 9.0).exp();
    let pass = lhs <= rhs && inverse >= 0.1 * t.sqrt() && inverse <= 10.0 * t.sqrt();
    Ok(PhiInverseCheck { r, t, inverse, lhs, rhs, pass })
}

/// Per-point sums entering the three displacement integrands.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegrandSample {
    pub r: f64,
    pub breve: f64,
    pub dot: f64,
    pub ddot: f64,
    pub count: usize,
}

/// `dΨ_r(λ_j)/dr` summed over the window at one `r`, split in three parts.
pub fn integrand(point: &ConfigPoint, profile: &TimeProfile) -> IntegrandSample {
    let r = point.r;
    let t = profile.t(r);
    let dt = profile.dt(r);
    let w = profile.window(r);
    let inv = phi_inverse(w, t);
    let edge = (-w * w * t).exp();
    let (mut s1, mut s2, mut s3) = (0.0, 0.0, 0.0);
    let mut count = 0;
    for e in point.entries.iter().filter(|e| e.lambda.abs() < w) {
        let m = e.multiplicity as f64;
        let g = (-e.lambda * e.lambda * t).exp();
        s1 += m * e.slope * g;
        s2 += m * e.lambda * g;
        s3 += m * phi(e.lambda, t);
        count += e.multiplicity;
    }
    IntegrandSample {
        r,
        breve: 0.5 * inv * s1,
        dot: 0.25 * inv * dt / t * s2,
        ddot: -inv * inv / 12.0 * (r.powf(-0.5) + r.sqrt() * dt / t) * edge * s3,
        count,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisplacementBreakdown {
    pub r_bar: f64,
    pub breve: f64,
    pub dot: f64,
    pub ddot: f64,
    pub total: f64,
    pub grid_start: f64,
    pub grid_points: usize,
    pub max_step: f64,
    /// Richardson estimate plus the window-entry allowance.
    pub error_estimate: f64,
    /// Some interval let more than one eigenvalue enter or leave a sector's window.
    pub coarse: bool,
    pub samples: Vec<IntegrandSample>,
}

/// Window entries/exits per interval, and whether any was unresolved.
fn entry_events(a: &ConfigPoint, b: &ConfigPoint) -> (usize, bool) {
    let span = |p: &ConfigPoint| {
        let mut m: BTreeMap<SectorKey, (usize, usize, usize)> = BTreeMap::new();
        for e in &p.entries {
            let s = m.entry(e.sector).or_insert((e.rank, e.rank, e.multiplicity));
            s.0 = s.0.min(e.rank);
            s.1 = s.1.max(e.rank);
        }
        m
    };
    let (sa, sb) = (span(a), span(b));
    let mut events = 0;
    let mut coarse = false;
    let keys: std::collections::BTreeSet<_> = sa.keys().chain(sb.keys()).copied().collect();
    for k in keys {
        match (sa.get(&k), sb.get(&k)) {
            (Some(x), Some(y)) => {
                let d0 = x.0.abs_diff(y.0);
                let d1 = x.1.abs_diff(y.1);
                coarse |= d0 > 1 || d1 > 1;
                events += (d0 + d1) * x.2;
            }
            (Some(x), None) | (None, Some(x)) => {
                let n = x.1 - x.0 + 1;
                coarse |= n > 1;
                events += n * x.2;
            }
            (None, None) => {}
        }
    }
    (events, coarse)
}

/// Bound on one eigenvalue's contribution to the integrands at the window edge.
fn edge_jump(r: f64, profile: &TimeProfile) -> f64 {
    let t = profile.t(r);
    let dt = profile.dt(r);
    let w = profile.window(r);
    let inv = phi_inverse(w, t);
    let edge = (-w * w * t).exp();
    edge * (0.5 * inv * SLOPE_BOUND
        + 0.25 * inv * (dt / t).abs() * w
        + 0.5 * inv / 6.0 * (r.powf(-0.5) + r.sqrt() * (dt / t).abs()))
}

/// Integrates the three integrands over a sampled configuration.
pub fn displacement_from_points(
    points: &[ConfigPoint],
    r_bar: f64,
    profile: &TimeProfile,
) -> Result<DisplacementBreakdown, DisplacementError> {
    profile.validate()?;
    if points.len() < 2 {
        return Err(DisplacementError::Precondition("need at least two grid points".into()));
    }
    if points[0].r < profile.r_start {
        return Err(DisplacementError::Precondition(format!(
            "grid starts at {} below r_start = {}",
            points[0].r, profile.r_start
        )));
    }
    let samples: Vec<IntegrandSample> = points.iter().map(|p| integrand(p, profile)).collect();
    let x: Vec<f64> = samples.iter().map(|s| s.r).collect();
    let parts = [
        quadrature::trapezoid_richardson(&x, &samples.iter().map(|s| s.breve).collect::<Vec<_>>())?,
        quadrature::trapezoid_richardson(&x, &samples.iter().map(|s| s.dot).collect::<Vec<_>>())?,
        quadrature::trapezoid_richardson(&x, &samples.iter().map(|s| s.ddot).collect::<Vec<_>>())?,
    ];
    let mut allowance = 0.0;
    let mut coarse = false;
    let mut max_step: f64 = 0.0;
    for w in points.windows(2) {
        let (events, c) = entry_events(&w[0], &w[1]);
        coarse |= c;
        let h = w[1].r - w[0].r;
        max_step = max_step.max(h);
        allowance += events as f64 * h * edge_jump(w[0].r, profile).max(edge_jump(w[1].r, profile));
    }
    let (breve, dot, ddot) = (parts[0].value, parts[1].value, parts[2].value);
    let mut error_estimate = parts.iter().map(|p| p.error).sum::<f64>() + allowance;
    if coarse {
        error_estimate *= 10.0;
    }
    Ok(DisplacementBreakdown {
        r_bar,
        breve,
        dot,
        ddot,
        total: breve + dot + ddot,
        grid_start: x[0],
        grid_points: x.len(),
        max_step,
        error_estimate,
        coarse,
        samples,
    })
}

pub fn displacement_from_configuration(
    config: &EigenConfiguration,
    profile: &TimeProfile,
) -> Result<DisplacementBreakdown, DisplacementError> {
    displacement_from_points(&config.points, config.r_bar, profile)
}

/// Builds the torus configuration on `grid` and integrates it.
pub fn displacement(
    geom: &ContactTorusGeometry,
    r_bar: f64,
    profile: &TimeProfile,
    grid: &RGrid,
    exec: Execution,
) -> Result<DisplacementBreakdown, DisplacementError> {
    profile.validate()?;
    if !(r_bar >= 2.0 * profile.r_min) {
        return Err(DisplacementError::Precondition(format!("r_bar = {r_bar} below 2·r_min")));
    }
    let config = build_configuration_scaled(geom, r_bar, grid, profile.window_scale, exec)?;
    displacement_from_configuration(&config, profile)
}

/// Default grid for [`displacement`]: uniform from `r_start` to `r_bar`.
pub fn default_grid(r_bar: f64, profile: &TimeProfile, step: f64) -> RGrid {
    RGrid::Uniform { start: profile.r_start, end: r_bar, step }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EtaDotReport {
    pub r_bar: f64,
    pub value: f64,
    pub positive: usize,
    pub negative: usize,
    /// `(λ, multiplicity, signed contribution)`
    pub contributions: Vec<(f64, usize, f64)>,
    /// `|(4c/π)^{1/2} r̄^{−1/2}(log r̄)^{1/2} − (4/π)^{1/2} t(r̄)^{1/2}|`
    pub prefactor_consistency: f64,
}

/// Small-eigenvalue asymmetry from `(λ, multiplicity)` pairs at `r̄`.
pub fn eta_dot(values: &[(f64, usize)], r_bar: f64, profile: &TimeProfile) -> Result<EtaDotReport, DisplacementError> {
    profile.check_r(r_bar)?;
    let t = profile.t(r_bar);
    let w = profile.window(r_bar);
    let pre = (4.0 * profile.coeff / PI).sqrt() * r_bar.powf(-0.5) * r_bar.ln().sqrt();
    let consistency = (pre - 2.0 * (t / PI).sqrt()).abs();
    let pw = phi(w, t);
    let mut plus = Vec::new();
    let mut minus = Vec::new();
    let mut contributions = Vec::new();
    for &(l, m) in values {
        if l == 0.0 || l.abs() >= w || m == 0 {
            continue;
        }
        // Φ(w) − Φ(|λ|) is the integral from λ to the window edge for either sign.
        let term = m as f64 * (pw - phi(l.abs(), t));
        if l > 0.0 {
            plus.push(term);
        } else {
            minus.push(term);
        }
        contributions.push((l, m, if l > 0.0 { pre * term } else { -pre * term }));
    }
    // Canonical order makes the two sums bitwise equal for symmetric input.
    let sum = |v: &mut Vec<f64>| {
        v.sort_by(f64::total_cmp);
        v.iter().sum::<f64>()
    };
    let positive = values.iter().filter(|(l, _)| *l > 0.0 && *l < w).map(|p| p.1).sum();
    let negative = values.iter().filter(|(l, _)| *l < 0.0 && *l > -w).map(|p| p.1).sum();
    let value = pre * (sum(&mut plus) - sum(&mut minus));
    Ok(EtaDotReport { r_bar, value, positive, negative, contributions, prefactor_consistency: consistency })
}

pub fn eta_dot_spectrum(spec: &Spectrum, profile: &TimeProfile) -> Result<EtaDotReport, DisplacementError> {
    let w = profile.window(spec.r);
    if spec.window < w {
        return Err(DisplacementError::Precondition(format!("spectrum window {} below {w}", spec.window)));
    }
    let vals: Vec<(f64, usize)> = spec.entries.iter().map(|e| (e.lambda, e.multiplicity)).collect();
    eta_dot(&vals, spec.r, profile)
}

/// `Σ_{0<|λ|≤Λ} sign λ`, a finite surrogate for the spectral asymmetry.
pub fn truncated_eta(values: &[(f64, usize)], cutoff: f64) -> i64 {
    values
        .iter()
        .filter(|(l, _)| l.abs() > ZERO_TOL && l.abs() <= cutoff)
        .map(|&(l, m)| if l > 0.0 { m as i64 } else { -(m as i64) })
        .sum()
}

/// `∫ a∧da` over the torus, by the periodic trapezoid rule in `z`.
pub fn contact_volume(geom: &ContactTorusGeometry) -> f64 {
    let n = 64;
    let h = 2.0 * PI / n as f64;
    let line: f64 = (0..n).map(|i| geom.contact_volume_density(i as f64 * h)).sum::<f64>() * h;
    line * (2.0 * PI) * (2.0 * PI)
}

/// `r̄²/(32π²) ∫ a∧da`
pub fn leading_term(geom: &ContactTorusGeometry, r_bar: f64) -> f64 {
    r_bar * r_bar / (32.0 * PI * PI) * contact_volume(geom)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticResiduals {
    pub r_bar: f64,
    pub sf: f64,
    pub leading: f64,
    pub displacement: f64,
    pub eta_dot: f64,
    /// `|sf − disp − η̇|`
    pub res1: f64,
    /// `|sf − leading − η̇|`
    pub res2: f64,
    /// `|sf − leading|`
    pub res3: f64,
    /// `res1 / r̄`
    pub res1_norm: f64,
    /// `res2 / (r̄ (log r̄)^{9/2})`
    pub res2_norm: f64,
    /// `res3 / (r̄^{3/2} (log r̄)^{−1/2})`
    pub res3_norm: f64,
}

pub fn asymptotic_residuals(
    sf: f64,
    disp: f64,
    eta_dot: f64,
    geom: &ContactTorusGeometry,
    r_bar: f64,
) -> AsymptoticResiduals {
    let leading = leading_term(geom, r_bar);
    let l = r_bar.ln();
    let res1 = (sf - disp - eta_dot).abs();
    let res2 = (sf - leading - eta_dot).abs();
    let res3 = (sf - leading).abs();
    AsymptoticResiduals {
        r_bar,
        sf,
        leading,
        displacement: disp,
        eta_dot,
        res1,
        res2,
        res3,
        res1_norm: res1 / r_bar,
        res2_norm: res2 / (r_bar * l.powf(4.5)),
        res3_norm: res3 / (r_bar.powf(1.5) / l.sqrt()),
    }
}

/// `∫_a^b (r + r² t′/t) e^{−rt/9} dr`, the growth allowance for Ψ̈.
pub fn ddot_envelope(profile: &TimeProfile, a: f64, b: f64) -> Result<f64, DisplacementError> {
    profile.check_r(a)?;
    let f = |r: f64| {
        let t = profile.t(r);
        (r + r * r * profile.dt(r) / t).abs() * (-r * t / 9.0).exp()
    };
    Ok(quadrature::integrate(f, a, b.max(a), 1e-12)?.value)
}
