//! Spectral flow by endpoint counting and by tracking rank-matched branches.
//!
//! Convention: the flow over `[r₀, r₁)` is `N_{≤0}(r₀) − N_{≤0}(r₁)` where
//! eigenvalues within [`ZERO_TOL`] of zero count as nonpositive. A zero at
//! `r₀` that moves up therefore counts and a zero reached at `r₁` does not.

use serde::{Deserialize, Serialize};

use super::family::{HermitianFamily, SectorKey, TorusFamily, ZERO_TOL};
use super::window::sector_window;
use super::SpectralError;
use crate::exec::Execution;
use crate::model::block::hermitian_eigenvalues;
use crate::model::ContactTorusGeometry;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FlowMethod {
    Tracking,
    Counting,
}

/// How endpoint inertia is computed by the counting method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CountingBackend {
    /// Sturm sequences on the real tridiagonal chains.
    Sturm,
    /// Full complex Hermitian eigensolve of each sector block.
    Dense,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub r: f64,
    pub sign: i32,
    pub multiplicity: usize,
    pub sector: SectorKey,
    pub slope: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FlowDiagnostics {
    /// Crossings whose slope was below `1e-6` in magnitude.
    pub tangential: usize,
    /// Crossings whose slope sign disagreed with the endpoint order.
    pub sign_mismatch: usize,
    /// Sub-intervals left unresolved at the refinement depth limit.
    pub unresolved: usize,
    /// An eigenvalue lay within the zero tolerance at an endpoint.
    pub zero_at_endpoint: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralFlowReport {
    pub r0: f64,
    pub r1: f64,
    pub flow: i64,
    pub method: FlowMethod,
    pub crossings: Vec<Crossing>,
    pub diagnostics: FlowDiagnostics,
}

fn check_interval(r0: f64, r1: f64) -> Result<(), SpectralError> {
    if !(r0.is_finite() && r1.is_finite() && r0 <= r1) {
        return Err(SpectralError::Precondition(format!("need finite r0 <= r1, got [{r0}, {r1}]")));
    }
    Ok(())
}

/// `(N_{≤0}, zero present)` for one sector at `r`.
fn sector_inertia<F: HermitianFamily + ?Sized>(
    fam: &F,
    sector: usize,
    r: f64,
    backend: CountingBackend,
) -> Result<(usize, bool), SpectralError> {
    match backend {
        CountingBackend::Sturm => {
            let t = fam.tridiagonal(sector, r);
            let below = t.count_below(ZERO_TOL);
            Ok((below, below > t.count_below(-ZERO_TOL)))
        }
        CountingBackend::Dense => {
            let vals = hermitian_eigenvalues(&fam.dense(sector, r))?;
            let below = vals.iter().filter(|&&v| v < ZERO_TOL).count();
            Ok((below, vals.iter().any(|v| v.abs() < ZERO_TOL)))
        }
    }
}

pub fn count_flow<F: HermitianFamily + ?Sized>(
    fam: &F,
    r0: f64,
    r1: f64,
    backend: CountingBackend,
    exec: Execution,
) -> Result<SpectralFlowReport, SpectralError> {
    check_interval(r0, r1)?;
    let mut report = SpectralFlowReport {
        r0,
        r1,
        flow: 0,
        method: FlowMethod::Counting,
        crossings: Vec::new(),
        diagnostics: FlowDiagnostics::default(),
    };
    if r0 == r1 {
        return Ok(report);
    }
    let per_sector = exec.map_range(fam.sector_count(), |s| -> Result<(i64, bool), SpectralError> {
        if fam.active_range(s, r0, r1, ZERO_TOL).is_none() {
            return Ok((0, false));
        }
        let (n0, z0) = sector_inertia(fam, s, r0, backend)?;
        let (n1, z1) = sector_inertia(fam, s, r1, backend)?;
        let mult = fam.multiplicity(s) as i64;
        Ok(((n0 as i64 - n1 as i64) * mult, z0 || z1))
    });
    for item in per_sector {
        let (df, zero) = item?;
        report.flow += df;
        report.diagnostics.zero_at_endpoint |= zero;
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy)]
pub struct TrackingOptions {
    /// Largest grid step in `r`.
    pub step: f64,
    /// Bisection depth for sub-intervals that could hide a double crossing.
    pub max_depth: u32,
    pub exec: Execution,
}

impl Default for TrackingOptions {
    fn default() -> Self {
        TrackingOptions { step: 0.25, max_depth: 40, exec: Execution::default() }
    }
}

struct Snapshot {
    r: f64,
    first: usize,
    values: Vec<f64>,
    nonpositive: usize,
}

struct SectorTracker<'a, F: HermitianFamily + ?Sized> {
    fam: &'a F,
    sector: usize,
    width: f64,
    max_depth: u32,
    crossings: Vec<Crossing>,
    diag: FlowDiagnostics,
}

impl<'a, F: HermitianFamily + ?Sized> SectorTracker<'a, F> {
    fn snapshot(&self, r: f64) -> Snapshot {
        let t = self.fam.tridiagonal(self.sector, r);
        let (first, values) = t.eigenvalues_in(-self.width, self.width);
        Snapshot { r, first, values, nonpositive: t.count_below(ZERO_TOL) }
    }

    fn value(s: &Snapshot, rank: usize) -> Option<f64> {
        rank.checked_sub(s.first).and_then(|i| s.values.get(i).copied())
    }

    fn process(&mut self, a: &Snapshot, b: &Snapshot, depth: u32) {
        let lipschitz = self.fam.slope_bound() * (b.r - a.r) + 2.0 * ZERO_TOL;
        let lo = a.first.min(b.first);
        let hi = (a.first + a.values.len()).max(b.first + b.values.len());
        // every rank between the two nonpositive counts changes class
        let changes: Vec<usize> = (a.nonpositive.min(b.nonpositive)..a.nonpositive.max(b.nonpositive)).collect();
        let hidden = (lo..hi).any(|j| {
            (j < a.nonpositive) == (j < b.nonpositive)
                && matches!((Self::value(a, j), Self::value(b, j)), (Some(x), Some(y)) if x.abs() + y.abs() <= lipschitz)
        });
        if hidden {
            if depth >= self.max_depth {
                self.diag.unresolved += 1;
            } else {
                let mid = self.snapshot(0.5 * (a.r + b.r));
                self.process(a, &mid, depth + 1);
                self.process(&mid, b, depth + 1);
                return;
            }
        }
        for j in changes {
            self.locate(a.r, b.r, j, j < a.nonpositive);
        }
    }

    /// Bisect the class change of rank `j` on `(a, b)` and read the slope there.
    fn locate(&mut self, mut a: f64, mut b: f64, rank: usize, starts_nonpositive: bool) {
        for _ in 0..200 {
            if b - a <= 1e-13 * a.abs().max(b.abs()).max(1.0) {
                break;
            }
            let mid = 0.5 * (a + b);
            let nonpos = self.fam.tridiagonal(self.sector, mid).count_below(ZERO_TOL) > rank;
            if nonpos == starts_nonpositive {
                a = mid;
            } else {
                b = mid;
            }
        }
        let r = 0.5 * (a + b);
        let t = self.fam.tridiagonal(self.sector, r);
        let value = t.eigenvalue(rank);
        let delta = 1e-8 * t.norm_bound().max(1.0);
        let (first, pairs) = sector_window(self.fam, self.sector, r, value - delta, value + delta);
        let slope = rank.checked_sub(first).and_then(|i| pairs.get(i)).map(|p| p.slope).unwrap_or(0.0);
        let order_sign = if starts_nonpositive { 1 } else { -1 };
        let sign = if slope.abs() < 1e-6 {
            self.diag.tangential += 1;
            order_sign
        } else {
            let s = if slope > 0.0 { 1 } else { -1 };
            if s != order_sign {
                self.diag.sign_mismatch += 1;
            }
            s
        };
        self.crossings.push(Crossing {
            r,
            sign,
            multiplicity: self.fam.multiplicity(self.sector),
            sector: self.fam.key(self.sector),
            slope,
        });
    }
}

pub fn track_flow<F: HermitianFamily + ?Sized>(
    fam: &F,
    r0: f64,
    r1: f64,
    opts: &TrackingOptions,
) -> Result<SpectralFlowReport, SpectralError> {
    check_interval(r0, r1)?;
    if !(opts.step > 0.0) {
        return Err(SpectralError::Precondition("tracking step must be positive".into()));
    }
    let mut report = SpectralFlowReport {
        r0,
        r1,
        flow: 0,
        method: FlowMethod::Tracking,
        crossings: Vec::new(),
        diagnostics: FlowDiagnostics::default(),
    };
    if r0 == r1 {
        return Ok(report);
    }
    let width = fam.slope_bound() * opts.step * 1.01 + 4.0 * ZERO_TOL;
    let per_sector = opts.exec.map_range(fam.sector_count(), |s| {
        let Some((a, b)) = fam.active_range(s, r0, r1, width) else {
            return (Vec::new(), FlowDiagnostics::default());
        };
        let mut tr = SectorTracker {
            fam,
            sector: s,
            width,
            max_depth: opts.max_depth,
            crossings: Vec::new(),
            diag: FlowDiagnostics::default(),
        };
        let zero_at = |r: f64| {
            let t = fam.tridiagonal(s, r);
            t.count_below(ZERO_TOL) > t.count_below(-ZERO_TOL)
        };
        tr.diag.zero_at_endpoint = (a == r0 && zero_at(r0)) || (b == r1 && zero_at(r1));
        let n = ((b - a) / opts.step).ceil().max(1.0) as usize;
        let mut prev = tr.snapshot(a);
        for i in 1..=n {
            let r = if i == n { b } else { a + (b - a) * i as f64 / n as f64 };
            let cur = tr.snapshot(r);
            tr.process(&prev, &cur, 0);
            prev = cur;
        }
        (tr.crossings, tr.diag)
    });
    for (crossings, d) in per_sector {
        report.flow += crossings.iter().map(|c| i64::from(c.sign) * c.multiplicity as i64).sum::<i64>();
        report.crossings.extend(crossings);
        report.diagnostics.tangential += d.tangential;
        report.diagnostics.sign_mismatch += d.sign_mismatch;
        report.diagnostics.unresolved += d.unresolved;
        report.diagnostics.zero_at_endpoint |= d.zero_at_endpoint;
    }
    report.crossings.sort_by(|x, y| x.r.total_cmp(&y.r).then(x.sector.cmp(&y.sector)));
    Ok(report)
}

/// The torus family relevant for flow over `[r₀, r₁]`, resolved to `|λ| ≤ guard`.
pub fn torus_flow_family(geom: &ContactTorusGeometry, r0: f64, r1: f64, guard: f64) -> TorusFamily {
    TorusFamily::for_range(*geom, r0, r1, guard.max(ZERO_TOL))
}

pub fn spectral_flow_counting(
    geom: &ContactTorusGeometry,
    r0: f64,
    r1: f64,
    guard: f64,
    backend: CountingBackend,
    exec: Execution,
) -> Result<SpectralFlowReport, SpectralError> {
    check_interval(r0, r1)?;
    count_flow(&torus_flow_family(geom, r0, r1, guard), r0, r1, backend, exec)
}

pub fn spectral_flow_tracking(
    geom: &ContactTorusGeometry,
    r0: f64,
    r1: f64,
    guard: f64,
    opts: &TrackingOptions,
) -> Result<SpectralFlowReport, SpectralError> {
    check_interval(r0, r1)?;
    let guard = guard.max(fam_width(opts));
    track_flow(&torus_flow_family(geom, r0, r1, guard), r0, r1, opts)
}

fn fam_width(opts: &TrackingOptions) -> f64 {
    super::family::SLOPE_BOUND * opts.step * 1.01 + 4.0 * ZERO_TOL
}

/// `sf(r̄)`: the flow over `[0, r̄)`.
pub fn spectral_flow_from_zero(geom: &ContactTorusGeometry, r_bar: f64, exec: Execution) -> Result<i64, SpectralError> {
    Ok(spectral_flow_counting(geom, 0.0, r_bar, 1.0, CountingBackend::Sturm, exec)?.flow)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ToyCrossingFamily;

    fn both(fam: &ToyCrossingFamily, a: f64, b: f64) -> (i64, i64, i64) {
        let c = count_flow(fam, a, b, CountingBackend::Sturm, Execution::Sequential).unwrap().flow;
        let d = count_flow(fam, a, b, CountingBackend::Dense, Execution::Sequential).unwrap().flow;
        let t = track_flow(fam, a, b, &TrackingOptions::default()).unwrap().flow;
        (c, d, t)
    }

    #[test]
    fn toy_flows() {
        assert_eq!(both(&ToyCrossingFamily::upward(&[1.0, 3.0]), 0.0, 2.0), (1, 1, 1));
        assert_eq!(both(&ToyCrossingFamily::upward(&[1.0, 1.0]), 0.0, 2.0), (2, 2, 2));
        assert_eq!(both(&ToyCrossingFamily::avoided(1.0, 0.1), 0.0, 2.0), (0, 0, 0));
        assert_eq!(both(&ToyCrossingFamily::downward(&[1.0]), 0.0, 2.0), (-1, -1, -1));
        assert_eq!(both(&ToyCrossingFamily::upward(&[0.5]), 0.0, 1.0), (1, 1, 1));
    }

    #[test]
    fn crossing_locations_and_signs() {
        let fam = ToyCrossingFamily::upward(&[0.3, 1.7]);
        let rep = track_flow(&fam, 0.0, 2.0, &TrackingOptions::default()).unwrap();
        assert_eq!(rep.crossings.len(), 2);
        assert!((rep.crossings[0].r - 0.3).abs() < 1e-9);
        assert!((rep.crossings[1].r - 1.7).abs() < 1e-9);
        assert!(rep.crossings.iter().all(|c| c.sign == 1 && (c.slope - 1.0).abs() < 1e-12));
    }

    #[test]
    fn half_open_endpoints() {
        let fam = ToyCrossingFamily::upward(&[1.0]);
        // zero at the left end moving up counts, zero reached at the right end does not
        assert_eq!(both(&fam, 1.0, 2.0), (1, 1, 1));
        assert_eq!(both(&fam, 0.0, 1.0), (0, 0, 0));
        let rep = count_flow(&fam, 1.0, 2.0, CountingBackend::Sturm, Execution::Sequential).unwrap();
        assert!(rep.diagnostics.zero_at_endpoint);
    }

    #[test]
    fn empty_interval() {
        let fam = ToyCrossingFamily::upward(&[1.0]);
        assert_eq!(both(&fam, 1.5, 1.5), (0, 0, 0));
        assert!(count_flow(&fam, 2.0, 1.0, CountingBackend::Sturm, Execution::Sequential).is_err());
    }

    #[test]
    fn torus_methods_agree_on_short_interval() {
        let g = ContactTorusGeometry::default();
        let c = spectral_flow_counting(&g, 10.0, 12.0, 1.0, CountingBackend::Dense, Execution::Parallel).unwrap();
        let t = spectral_flow_tracking(&g, 10.0, 12.0, 1.0, &TrackingOptions::default()).unwrap();
        assert_eq!(c.flow, t.flow);
        assert_eq!(c.flow, 56);
        assert_eq!(t.diagnostics.sign_mismatch, 0);
    }
}
