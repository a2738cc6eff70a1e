//! Finite Hermitian families with a real tridiagonal realization per sector.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::model::block::{assemble_block, block_admits_window, cutoff_for_window};
use crate::model::toy::toy_family;
use crate::model::{BlockChain, BlockId, ContactTorusGeometry, SymTridiag, ToyCrossingFamily};

/// Identifies a direct summand of a family: a norm class `m² + n²` and a
/// z-mode parity for the torus, or a plain index for toy families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SectorKey {
    pub norm2: u64,
    pub parity: u8,
}

/// Global Lipschitz bound on eigenvalue branches, `|λ′| ≤ 5/9`.
pub const SLOPE_BOUND: f64 = 5.0 / 9.0;

/// Eigenvalues within this distance of zero are treated as zero, i.e. as
/// nonpositive.
pub const ZERO_TOL: f64 = 1e-10;

pub trait HermitianFamily: Sync {
    fn sector_count(&self) -> usize;
    fn key(&self, sector: usize) -> SectorKey;
    /// How many identical copies of the sector the full operator contains.
    fn multiplicity(&self, sector: usize) -> usize;
    fn tridiagonal(&self, sector: usize, r: f64) -> SymTridiag;
    /// `dH/dr` in the same coordinates as [`HermitianFamily::tridiagonal`].
    fn derivative(&self, sector: usize, r: f64) -> SymTridiag;
    /// An independently assembled complex Hermitian matrix of the sector.
    fn dense(&self, sector: usize, r: f64) -> DMatrix<Complex64>;

    fn slope_bound(&self) -> f64 {
        SLOPE_BOUND
    }

    /// A sub-interval of `[a, b]` outside of which the sector certainly has
    /// no eigenvalue with `|λ| ≤ w`; `None` when there is none at all.
    fn active_range(&self, _sector: usize, a: f64, b: f64, _w: f64) -> Option<(f64, f64)> {
        Some((a, b))
    }
}

/// Blocks grouped by `m² + n²`; all blocks in a class share one spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormClass {
    pub norm2: u64,
    pub blocks: Vec<BlockId>,
}

impl NormClass {
    pub fn rho(&self) -> f64 {
        (self.norm2 as f64).sqrt()
    }
}

/// Lattice points with `ρ_lo ≤ √(m²+n²) ≤ ρ_hi`, grouped by norm.
pub fn norm_classes(rho_lo: f64, rho_hi: f64) -> Vec<NormClass> {
    if rho_hi < 0.0 || rho_hi < rho_lo {
        return Vec::new();
    }
    let lo2 = rho_lo.max(0.0).powi(2) * (1.0 - 1e-12) - 1e-9;
    let hi2 = rho_hi * rho_hi * (1.0 + 1e-12) + 1e-9;
    let bound = rho_hi.floor() as i32;
    let mut map: BTreeMap<u64, Vec<BlockId>> = BTreeMap::new();
    for m in -bound..=bound {
        for n in -bound..=bound {
            let id = BlockId::new(m, n);
            let q = id.norm2() as f64;
            if q >= lo2 && q <= hi2 {
                map.entry(id.norm2()).or_default().push(id);
            }
        }
    }
    map.into_iter().map(|(norm2, blocks)| NormClass { norm2, blocks }).collect()
}

pub fn count_blocks(classes: &[NormClass]) -> usize {
    classes.iter().map(|c| c.blocks.len()).sum()
}

/// Radial range of blocks that can carry `|λ| ≤ w` for some `r ∈ [a, b]`.
pub fn active_radii(a: f64, b: f64, w: f64) -> (f64, f64) {
    // ρ ∈ [r/2 − √(r + w²), r/2 + √(r + w²)] at each r
    let lower = |r: f64| 0.5 * r - (r + w * w).sqrt();
    let upper = |r: f64| 0.5 * r + (r + w * w).sqrt();
    // lower(r) is convex with its minimum at r + w² = 1
    let r_star = (1.0 - w * w).clamp(a, b);
    let lo = lower(a).min(lower(b)).min(lower(r_star));
    let hi = upper(a).max(upper(b));
    (lo.max(0.0), hi)
}

/// Values of `r` at which radius `ρ` admits `|λ| ≤ w`: the roots of
/// `(ρ − r/2)² = r + w²`, padded slightly.
pub fn active_r_range(rho: f64, w: f64) -> Option<(f64, f64)> {
    let disc = 2.0 * rho + 1.0 + w * w;
    if disc < 0.0 {
        return None;
    }
    let mid = 2.0 * (rho + 1.0);
    let half = 2.0 * disc.sqrt();
    let pad = 1e-9 * mid.max(1.0);
    Some(((mid - half - pad).max(0.0), mid + half + pad))
}

/// The Dirac family restricted to a set of norm classes, at a fixed cutoff.
#[derive(Debug, Clone)]
pub struct TorusFamily {
    pub geom: ContactTorusGeometry,
    pub k_cut: usize,
    pub classes: Vec<NormClass>,
}

impl TorusFamily {
    /// All classes able to carry `|λ| ≤ w` somewhere on `[a, b]`, with the
    /// cutoff that resolves that window up to `b`.
    pub fn for_range(geom: ContactTorusGeometry, a: f64, b: f64, w: f64) -> Self {
        let (lo, hi) = active_radii(a, b, w);
        TorusFamily { geom, k_cut: cutoff_for_window(b, w), classes: norm_classes(lo - 1e-9, hi + 1e-9) }
    }

    pub fn block_count(&self) -> usize {
        count_blocks(&self.classes)
    }

    fn class_of(&self, sector: usize) -> &NormClass {
        &self.classes[sector / 2]
    }

    pub fn chain(&self, sector: usize, r: f64) -> BlockChain {
        BlockChain::new(&self.geom, self.class_of(sector).norm2, (sector % 2) as u8, r, self.k_cut)
    }

    pub fn blocks(&self, sector: usize) -> &[BlockId] {
        &self.class_of(sector).blocks
    }
}

impl HermitianFamily for TorusFamily {
    fn sector_count(&self) -> usize {
        2 * self.classes.len()
    }

    fn key(&self, sector: usize) -> SectorKey {
        SectorKey { norm2: self.class_of(sector).norm2, parity: (sector % 2) as u8 }
    }

    fn multiplicity(&self, sector: usize) -> usize {
        self.class_of(sector).blocks.len()
    }

    fn tridiagonal(&self, sector: usize, r: f64) -> SymTridiag {
        self.chain(sector, r).tri
    }

    fn derivative(&self, sector: usize, r: f64) -> SymTridiag {
        self.chain(sector, r).slope_operator()
    }

    fn dense(&self, sector: usize, r: f64) -> DMatrix<Complex64> {
        let id = self.class_of(sector).blocks[0];
        assemble_block(&self.geom, id.m, id.n, r, self.k_cut)
            .expect("cutoff and coupling validated at construction")
            .sector_matrix((sector % 2) as u8)
    }

    fn slope_bound(&self) -> f64 {
        SLOPE_BOUND
    }

    fn active_range(&self, sector: usize, a: f64, b: f64, w: f64) -> Option<(f64, f64)> {
        active_r_range(self.class_of(sector).rho(), w).and_then(|(lo, hi)| {
            let (lo, hi) = (lo.max(a), hi.min(b));
            (lo <= hi).then_some((lo, hi))
        })
    }
}

impl HermitianFamily for ToyCrossingFamily {
    fn sector_count(&self) -> usize {
        1
    }

    fn key(&self, _sector: usize) -> SectorKey {
        SectorKey { norm2: 0, parity: 0 }
    }

    fn multiplicity(&self, _sector: usize) -> usize {
        1
    }

    fn tridiagonal(&self, _sector: usize, r: f64) -> SymTridiag {
        ToyCrossingFamily::tridiagonal(self, r)
    }

    fn derivative(&self, _sector: usize, _r: f64) -> SymTridiag {
        ToyCrossingFamily::derivative(self)
    }

    fn dense(&self, _sector: usize, r: f64) -> DMatrix<Complex64> {
        toy_family(self, r)
    }

    fn slope_bound(&self) -> f64 {
        1.0
    }
}

/// Whether block radius `ρ` may hold `|λ| ≤ w` at `r`.
pub fn admits(rho: f64, r: f64, w: f64) -> bool {
    block_admits_window(rho, r, w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norm_classes_group_lattice_points() {
        let classes = norm_classes(0.0, 5.0);
        let five = classes.iter().find(|c| c.norm2 == 25).unwrap();
        assert_eq!(five.blocks.len(), 12);
        let one = classes.iter().find(|c| c.norm2 == 1).unwrap();
        assert_eq!(one.blocks.len(), 4);
        assert_eq!(count_blocks(&classes), 81);
    }

    #[test]
    fn active_radii_contain_every_window_block() {
        for &(a, b, w) in &[(0.0, 10.0, 0.0), (5.0, 6.0, 0.3), (20.0, 40.0, 1.0)] {
            let (lo, hi) = active_radii(a, b, w);
            for i in 0..=200 {
                let r = a + (b - a) * f64::from(i) / 200.0;
                for rho10 in 0..600 {
                    let rho = f64::from(rho10) / 10.0;
                    if admits(rho, r, w) {
                        assert!(rho >= lo - 1e-9 && rho <= hi + 1e-9, "{rho} at {r}");
                    }
                }
            }
        }
    }

    #[test]
    fn active_r_range_matches_admission() {
        for rho10 in 0..300 {
            let rho = f64::from(rho10) / 10.0;
            let (lo, hi) = active_r_range(rho, 0.4).unwrap();
            for i in 0..2000 {
                let r = 0.05 * f64::from(i);
                if admits(rho, r, 0.4) {
                    assert!(r >= lo && r <= hi, "rho {rho}, r {r}");
                }
            }
        }
    }

    #[test]
    fn dense_and_chain_sectors_are_isospectral() {
        let fam = TorusFamily::for_range(ContactTorusGeometry::with_cz(1.0), 6.0, 8.0, 1.0);
        for sector in [0, 5, 11] {
            let tri = fam.tridiagonal(sector, 7.0).all_eigenvalues();
            let dense = crate::model::block::hermitian_eigenvalues(&fam.dense(sector, 7.0)).unwrap();
            for (a, b) in tri.iter().zip(&dense) {
                assert!((a - b).abs() < 1e-10);
            }
        }
    }
}
