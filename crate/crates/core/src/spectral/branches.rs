use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::config::{ConfigPoint, EigenConfiguration};
use super::family::{SectorKey, SLOPE_BOUND, ZERO_TOL};
use super::SpectralError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchPoint {
    pub r: f64,
    pub lambda: f64,
    pub slope: f64,
}

/// A rank-matched eigenvalue curve of one sector over consecutive grid points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub sector: SectorKey,
    pub rank: usize,
    pub multiplicity: usize,
    /// Index of the first grid point of the curve's domain.
    pub start: usize,
    pub points: Vec<BranchPoint>,
}

impl Branch {
    pub fn domain(&self) -> (f64, f64) {
        (self.points[0].r, self.points[self.points.len() - 1].r)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchSet {
    pub grid: Vec<f64>,
    pub branches: Vec<Branch>,
    /// Grid steps where two ranks of one sector came closer than twice the
    /// admissible movement; rank matching is still well defined there.
    pub ambiguous_steps: usize,
}

/// Match eigenvalues by rank within each sector and cut the curves where
/// they leave the window.
pub fn track_branches(config: &EigenConfiguration) -> Result<BranchSet, SpectralError> {
    track_points(&config.points, SLOPE_BOUND)
}

/// `(grid index, point, multiplicity)` along one rank of one sector.
type RankCurve = Vec<(usize, BranchPoint, usize)>;

pub fn track_points(points: &[ConfigPoint], slope_bound: f64) -> Result<BranchSet, SpectralError> {
    let grid: Vec<f64> = points.iter().map(|p| p.r).collect();
    let mut curves: BTreeMap<(SectorKey, usize), RankCurve> = BTreeMap::new();
    for (gi, p) in points.iter().enumerate() {
        for e in &p.entries {
            curves.entry((e.sector, e.rank)).or_default().push((
                gi,
                BranchPoint { r: p.r, lambda: e.lambda, slope: e.slope },
                e.multiplicity,
            ));
        }
    }
    let mut branches = Vec::new();
    for ((sector, rank), samples) in &curves {
        let mut run: Vec<BranchPoint> = Vec::new();
        let mut start = samples[0].0;
        let mut last = samples[0].0;
        for (i, &(gi, bp, _)) in samples.iter().enumerate() {
            if i > 0 && gi != last + 1 {
                branches.push(Branch { sector: *sector, rank: *rank, multiplicity: samples[0].2, start, points: run });
                run = Vec::new();
                start = gi;
            } else if let Some(prev) = run.last() {
                let allowed = slope_bound * (bp.r - prev.r) + 1e-9 + 2.0 * ZERO_TOL;
                if (bp.lambda - prev.lambda).abs() > allowed {
                    return Err(SpectralError::GridTooCoarse {
                        r: bp.r,
                        movement: (bp.lambda - prev.lambda).abs(),
                        allowed,
                    });
                }
            }
            run.push(bp);
            last = gi;
        }
        branches.push(Branch { sector: *sector, rank: *rank, multiplicity: samples[0].2, start, points: run });
    }
    let mut ambiguous_steps = 0;
    for w in 0..points.len().saturating_sub(1) {
        let h = points[w + 1].r - points[w].r;
        let mut by_sector: BTreeMap<SectorKey, Vec<f64>> = BTreeMap::new();
        for e in &points[w].entries {
            by_sector.entry(e.sector).or_default().push(e.lambda);
        }
        for vals in by_sector.values_mut() {
            vals.sort_by(f64::total_cmp);
            if vals.windows(2).any(|p| p[1] - p[0] < 2.0 * slope_bound * h) {
                ambiguous_steps += 1;
            }
        }
    }
    Ok(BranchSet { grid, branches, ambiguous_steps })
}

impl BranchSet {
    /// Branch values at grid point `gi`, repeated by multiplicity and sorted.
    pub fn values_at(&self, gi: usize) -> Vec<f64> {
        let mut v: Vec<f64> = self
            .branches
            .iter()
            .filter(|b| gi >= b.start && gi < b.start + b.points.len())
            .flat_map(|b| std::iter::repeat_n(b.points[gi - b.start].lambda, b.multiplicity))
            .collect();
        v.sort_by(f64::total_cmp);
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Execution;
    use crate::model::ToyCrossingFamily;
    use crate::spectral::config::build_family_configuration;

    #[test]
    fn toy_branches_are_lines() {
        let fam = ToyCrossingFamily::upward(&[1.0, 2.5]);
        let grid: Vec<f64> = (0..=30).map(|i| 0.1 * f64::from(i)).collect();
        let pts = build_family_configuration(&fam, &grid, |_| 10.0, Execution::Sequential);
        let set = track_points(&pts, 1.0).unwrap();
        assert_eq!(set.branches.len(), 2);
        for b in &set.branches {
            let r0 = b.points[0].r - b.points[0].lambda;
            assert!(b.points.iter().all(|p| (p.lambda - (p.r - r0)).abs() < 1e-12));
        }
    }

    #[test]
    fn avoided_crossing_branches_stay_apart() {
        let fam = ToyCrossingFamily::avoided(1.0, 0.1);
        let grid: Vec<f64> = (0..=40).map(|i| 0.05 * f64::from(i)).collect();
        let pts = build_family_configuration(&fam, &grid, |_| 10.0, Execution::Sequential);
        let set = track_points(&pts, 1.0).unwrap();
        assert_eq!(set.branches.len(), 2);
        let (lo, hi) = (&set.branches[0], &set.branches[1]);
        for (a, b) in lo.points.iter().zip(&hi.points) {
            assert!(b.lambda - a.lambda >= 0.2 - 1e-12);
        }
    }

    #[test]
    fn branches_leave_window() {
        let fam = ToyCrossingFamily::upward(&[1.0]);
        let grid: Vec<f64> = (0..=20).map(|i| 0.1 * f64::from(i)).collect();
        let pts = build_family_configuration(&fam, &grid, |_| 0.35, Execution::Sequential);
        let set = track_points(&pts, 1.0).unwrap();
        assert_eq!(set.branches.len(), 1);
        let (a, b) = set.branches[0].domain();
        assert!((a - 0.7).abs() < 1e-9 && (b - 1.3).abs() < 1e-9);
    }
}
