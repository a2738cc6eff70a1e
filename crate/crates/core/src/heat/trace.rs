//! Heat traces `Σ_j e^{−λ_j² t} |α_j(q)|²` from window spectra.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::HeatError;
use crate::exec::Execution;
use crate::model::ContactTorusGeometry;
use crate::spectral::{spectrum_in_window, weighted_density, Spectrum, WindowOptions};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeatTraceSample {
    pub q: [f64; 3],
    pub r: f64,
    pub t: f64,
    /// `√r/3`
    pub window: f64,
    /// Sum over `|λ| < window`.
    pub value: f64,
    pub extended_window: f64,
    /// Sum over `|λ| < extended_window`; the neglected part is below `e^{−36}` per eigenvalue.
    pub full: f64,
    pub tail_measured: f64,
    /// `t^{−3/2} e^{−rt/20}`
    pub tail_envelope: f64,
}

impl HeatTraceSample {
    /// Ratio of the measured tail to its envelope.
    pub fn tail_constant(&self) -> f64 {
        self.tail_measured / self.tail_envelope
    }
}

/// Window beyond which `e^{−λ²t} < e^{−36}` outside `√r/3`.
pub fn extended_window(r: f64, t: f64) -> f64 {
    (r / 9.0 + 36.0 / t).sqrt()
}

/// Spectrum with eigenvectors large enough for traces at time `t`.
pub fn heat_spectrum(geom: &ContactTorusGeometry, r: f64, t: f64, exec: Execution) -> Result<Spectrum, HeatError> {
    if !(t > 0.0) {
        return Err(HeatError::Precondition(format!("t = {t} must be positive")));
    }
    let opts = WindowOptions::default().with_vectors().exec(exec);
    Ok(spectrum_in_window(geom, r, extended_window(r, t), &opts)?)
}

/// `Σ_{|λ_j| < window} e^{−λ_j² t} |α_j(q)|²`
pub fn heat_trace_window(spec: &Spectrum, q: [f64; 3], t: f64, window: f64) -> Result<f64, HeatError> {
    if window > spec.window {
        return Err(HeatError::Precondition(format!("window {window} exceeds spectrum window {}", spec.window)));
    }
    let d =
        weighted_density(spec, q, |e| if e.lambda.abs() < window { (-e.lambda * e.lambda * t).exp() } else { 0.0 })?;
    Ok(d.alpha2)
}

pub fn sample_trace(spec: &Spectrum, q: [f64; 3], t: f64) -> Result<HeatTraceSample, HeatError> {
    let r = spec.r;
    let window = r.sqrt() / 3.0;
    let ext = extended_window(r, t);
    if spec.window + 1e-12 < ext {
        return Err(HeatError::Precondition(format!("spectrum window {} below {ext}", spec.window)));
    }
    let value = heat_trace_window(spec, q, t, window)?;
    let full = heat_trace_window(spec, q, t, ext)?;
    Ok(HeatTraceSample {
        q,
        r,
        t,
        window,
        value,
        extended_window: ext,
        full,
        tail_measured: full - value,
        tail_envelope: t.powf(-1.5) * (-r * t / 20.0).exp(),
    })
}

/// Trace sample at one point, requiring `rt ≥ 50`.
pub fn heat_trace_pointwise(
    geom: &ContactTorusGeometry,
    r: f64,
    q: [f64; 3],
    t: f64,
    exec: Execution,
) -> Result<HeatTraceSample, HeatError> {
    if !(r * t >= 50.0) {
        return Err(HeatError::Precondition(format!("r·t = {} below 50", r * t)));
    }
    sample_trace(&heat_spectrum(geom, r, t, exec)?, q, t)
}

/// `(4π^{3/2})^{−1} Ω⁻² r t^{−1/2}`
pub fn trace_leading(r: f64, t: f64, omega: f64) -> f64 {
    r / (4.0 * PI.powf(1.5) * omega * omega * t.sqrt())
}

/// `t^{−1/2} + r^{9/2}t⁴ + t^{−3/2}e^{−rt/2} + r^{7/2}e^{−1/(c t)}`
pub fn trace_envelope(r: f64, t: f64, c_exp: f64) -> f64 {
    t.powf(-0.5)
        + r.powf(4.5) * t.powi(4)
        + t.powf(-1.5) * (-0.5 * r * t).exp()
        + r.powf(3.5) * (-1.0 / (c_exp * t)).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceResidual {
    pub leading: f64,
    pub raw: f64,
    pub relative: f64,
    pub envelope: f64,
    pub normalized: f64,
}

pub fn trace_leading_residual(value: f64, r: f64, t: f64, omega: f64, c_exp: f64) -> TraceResidual {
    let leading = trace_leading(r, t, omega);
    let raw = (value - leading).abs();
    let envelope = trace_envelope(r, t, c_exp);
    TraceResidual { leading, raw, relative: raw / leading, envelope, normalized: raw / envelope }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct L2HeatCheck {
    pub q: [f64; 3],
    pub r: f64,
    pub t: f64,
    /// `Σ_j e^{−2λ_j²t}|α_j(q)|²`
    pub lhs: f64,
    /// `r + r t^{−1/2} + t^{−3/2} e^{−rt/10}`
    pub envelope: f64,
    pub constant: f64,
}

pub fn l2_heat_bound_check(spec: &Spectrum, q: [f64; 3], t: f64) -> Result<L2HeatCheck, HeatError> {
    let r = spec.r;
    let lhs = heat_trace_window(spec, q, 2.0 * t, extended_window(r, t).min(spec.window))?;
    let envelope = r + r / t.sqrt() + t.powf(-1.5) * (-r * t / 10.0).exp();
    Ok(L2HeatCheck { q, r, t, lhs, envelope, constant: lhs / envelope })
}

/// `∫_torus` of the window trace, by the trapezoid rule in `z` (the trace is
/// independent of `x, y`).
pub fn integrated_trace(spec: &Spectrum, t: f64, window: f64, nz: usize) -> Result<f64, HeatError> {
    let vol_xy = (2.0 * PI).powi(2);
    let h = 2.0 * PI / nz as f64;
    let mut acc = 0.0;
    for j in 0..nz {
        acc += heat_trace_window(spec, [0.0, 0.0, j as f64 * h], t, window)?;
    }
    Ok(acc * h * vol_xy)
}

/// `Σ_j e^{−λ_j²t} ∫|α_j|²`, using `∫|α_j|² = ½ + λ_j′`.
pub fn alpha_weighted_sum(spec: &Spectrum, t: f64, window: f64) -> f64 {
    spec.entries
        .iter()
        .filter(|e| e.lambda.abs() < window)
        .map(|e| e.multiplicity as f64 * (-e.lambda * e.lambda * t).exp() * (0.5 + e.slope))
        .sum()
}
