use serde::{Deserialize, Serialize};

use super::family::{HermitianFamily, SectorKey, TorusFamily};
use super::window::sector_window;
use super::SpectralError;
use crate::exec::Execution;
use crate::model::ContactTorusGeometry;

/// Sample points in `r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RGrid {
    /// `start, start + h, …, end` with `h ≤ step` chosen to land on `end`.
    Uniform {
        start: f64,
        end: f64,
        step: f64,
    },
    Points(Vec<f64>),
}

impl RGrid {
    pub fn points(&self) -> Vec<f64> {
        match self {
            RGrid::Uniform { start, end, step } => {
                if !(end > start) {
                    return vec![*start];
                }
                let n = ((end - start) / step - 1e-9).ceil().max(1.0) as usize;
                (0..=n).map(|i| if i == n { *end } else { start + (end - start) * i as f64 / n as f64 }).collect()
            }
            RGrid::Points(p) => p.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfigEntry {
    pub lambda: f64,
    pub slope: f64,
    pub multiplicity: usize,
    pub sector: SectorKey,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigPoint {
    pub r: f64,
    pub entries: Vec<ConfigEntry>,
}

/// Sampled pairs `(r, λ)` with `λ² < r/9` (window half-width `√r/3` by default).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenConfiguration {
    pub r_bar: f64,
    pub k_cut: usize,
    pub points: Vec<ConfigPoint>,
}

/// Window half-width `√r · scale`; the default scale is `1/3`.
pub fn window_half_width(r: f64, scale: f64) -> f64 {
    r.max(0.0).sqrt() * scale
}

/// Configuration of an arbitrary family with window `|λ| < window(r)`.
pub fn build_family_configuration<F, W>(fam: &F, points: &[f64], window: W, exec: Execution) -> Vec<ConfigPoint>
where
    F: HermitianFamily + ?Sized,
    W: Fn(f64) -> f64 + Sync,
{
    exec.map(points, |&r| {
        let w = window(r);
        let mut entries = Vec::new();
        for s in 0..fam.sector_count() {
            if w <= 0.0 || fam.active_range(s, r, r, w).is_none() {
                continue;
            }
            let (first, pairs) = sector_window(fam, s, r, -w, w);
            for (i, p) in pairs.into_iter().enumerate() {
                if p.value.abs() < w {
                    entries.push(ConfigEntry {
                        lambda: p.value,
                        slope: p.slope,
                        multiplicity: fam.multiplicity(s),
                        sector: fam.key(s),
                        rank: first + i,
                    });
                }
            }
        }
        entries.sort_by(|a, b| a.lambda.total_cmp(&b.lambda).then(a.sector.cmp(&b.sector)));
        ConfigPoint { r, entries }
    })
}

/// The torus configuration `E_r̄` on a grid inside `(1, r̄]`, with window
/// `|λ| < √r·scale`, at one cutoff resolving the largest window.
pub fn build_configuration_scaled(
    geom: &ContactTorusGeometry,
    r_bar: f64,
    grid: &RGrid,
    scale: f64,
    exec: Execution,
) -> Result<EigenConfiguration, SpectralError> {
    if !(r_bar >= 2.0) {
        return Err(SpectralError::Precondition(format!("r_bar = {r_bar} must be at least 2")));
    }
    let points = grid.points();
    if points.iter().any(|&r| !(r > 1.0 && r <= r_bar)) {
        return Err(SpectralError::Precondition(format!("grid must lie in (1, {r_bar}]")));
    }
    if points.windows(2).any(|w| w[1] <= w[0]) {
        return Err(SpectralError::Precondition("grid must be strictly increasing".into()));
    }
    let r_min = points.first().copied().unwrap_or(r_bar);
    let fam = TorusFamily::for_range(*geom, r_min, r_bar, window_half_width(r_bar, scale));
    let pts = build_family_configuration(&fam, &points, |r| window_half_width(r, scale), exec);
    Ok(EigenConfiguration { r_bar, k_cut: fam.k_cut, points: pts })
}

pub fn build_configuration(
    geom: &ContactTorusGeometry,
    r_bar: f64,
    grid: &RGrid,
    exec: Execution,
) -> Result<EigenConfiguration, SpectralError> {
    build_configuration_scaled(geom, r_bar, grid, 1.0 / 3.0, exec)
}

impl EigenConfiguration {
    pub fn grid(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.r).collect()
    }

    pub fn total_pairs(&self) -> usize {
        self.points.iter().map(|p| p.entries.len()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_grid_lands_on_end() {
        let pts = RGrid::Uniform { start: 13.0, end: 20.0, step: 0.5 }.points();
        assert_eq!(pts.len(), 15);
        assert_eq!(*pts.last().unwrap(), 20.0);
        let pts = RGrid::Uniform { start: 1.5, end: 2.0, step: 0.3 }.points();
        assert_eq!(pts, vec![1.5, 1.75, 2.0]);
    }

    #[test]
    fn window_rule_and_bounds() {
        let g = ContactTorusGeometry::default();
        let cfg = build_configuration(&g, 2.0, &RGrid::Points(vec![1.5]), Execution::Sequential).unwrap();
        let w = 1.5f64.sqrt() / 3.0;
        assert!(cfg.points[0].entries.iter().all(|e| e.lambda.abs() < w));
        assert!(build_configuration(&g, 2.0, &RGrid::Points(vec![0.5]), Execution::Sequential).is_err());
        assert!(build_configuration(&g, 1.0, &RGrid::Points(vec![1.5]), Execution::Sequential).is_err());
    }

    #[test]
    fn refinement_only_adds_points() {
        let g = ContactTorusGeometry::default();
        let coarse = build_configuration(&g, 12.0, &RGrid::Points(vec![10.0, 12.0]), Execution::Parallel).unwrap();
        let fine = build_configuration(&g, 12.0, &RGrid::Points(vec![10.0, 11.0, 12.0]), Execution::Parallel).unwrap();
        assert_eq!(coarse.points[0], fine.points[0]);
        assert_eq!(coarse.points[1], fine.points[2]);
    }
}
