use std::collections::BTreeMap;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::family::{active_radii, count_blocks, norm_classes, HermitianFamily, SectorKey, TorusFamily};
use super::SpectralError;
use crate::exec::Execution;
use crate::model::block::cutoff_for_window;
use crate::model::chain::{eigenpairs_with_slopes, ChainEigenPair};
use crate::model::splitting::{split_density, PointDensity};
use crate::model::{BlockChain, BlockId, ContactTorusGeometry};

pub const DEFAULT_BLOCK_BUDGET: usize = 400_000;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumEntry {
    pub lambda: f64,
    /// Number of blocks sharing this eigenpair (the size of the norm class).
    pub multiplicity: usize,
    pub sector: SectorKey,
    /// Ascending rank within the sector chain.
    pub rank: usize,
    pub slope: f64,
    /// Chain coordinates of the eigenvector, when requested.
    #[serde(skip)]
    pub vector: Option<Vec<f64>>,
}

/// All eigenvalues with `|λ| ≤ window` at a fixed `r`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Spectrum {
    pub r: f64,
    pub window: f64,
    pub k_cut: usize,
    pub geom: ContactTorusGeometry,
    pub entries: Vec<SpectrumEntry>,
    pub classes: BTreeMap<u64, Vec<BlockId>>,
}

#[derive(Debug, Clone, Copy)]
pub struct WindowOptions {
    pub with_vectors: bool,
    pub block_budget: usize,
    pub k_cut: Option<usize>,
    pub exec: Execution,
}

impl Default for WindowOptions {
    fn default() -> Self {
        WindowOptions {
            with_vectors: false,
            block_budget: DEFAULT_BLOCK_BUDGET,
            k_cut: None,
            exec: Execution::default(),
        }
    }
}

impl WindowOptions {
    pub fn with_vectors(mut self) -> Self {
        self.with_vectors = true;
        self
    }

    pub fn exec(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }
}

/// Window eigenpairs of one sector with their ranks.
pub fn sector_window<F: HermitianFamily + ?Sized>(
    fam: &F,
    sector: usize,
    r: f64,
    lo: f64,
    hi: f64,
) -> (usize, Vec<ChainEigenPair>) {
    let tri = fam.tridiagonal(sector, r);
    let first = tri.count_below(lo);
    let pairs = eigenpairs_with_slopes(&tri, &fam.derivative(sector, r), lo, hi);
    (first, pairs)
}

fn inclusive_upper(x: f64) -> f64 {
    x + x.abs() * f64::EPSILON * 4.0 + f64::MIN_POSITIVE
}

pub fn spectrum_in_window(
    geom: &ContactTorusGeometry,
    r: f64,
    lambda: f64,
    opts: &WindowOptions,
) -> Result<Spectrum, SpectralError> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(SpectralError::Precondition(format!("r = {r} must be finite and non-negative")));
    }
    let k_cut = opts.k_cut.unwrap_or_else(|| cutoff_for_window(r, lambda.max(0.0)));
    let empty =
        Spectrum { r, window: lambda.max(0.0), k_cut, geom: *geom, entries: Vec::new(), classes: BTreeMap::new() };
    if !(lambda > 0.0) {
        return Ok(empty);
    }
    let (lo, hi) = active_radii(r, r, lambda);
    let classes = norm_classes(lo, hi);
    let blocks = count_blocks(&classes);
    if blocks > opts.block_budget {
        return Err(SpectralError::BlockBudget { needed: blocks, budget: opts.block_budget });
    }
    let fam = TorusFamily { geom: *geom, k_cut, classes };
    let per_sector = opts.exec.map_range(fam.sector_count(), |s| {
        if fam.active_range(s, r, r, lambda).is_none() {
            return Vec::new();
        }
        let (first, pairs) = sector_window(&fam, s, r, -lambda, inclusive_upper(lambda));
        pairs
            .into_iter()
            .enumerate()
            .map(|(i, p)| SpectrumEntry {
                lambda: p.value,
                multiplicity: fam.multiplicity(s),
                sector: fam.key(s),
                rank: first + i,
                slope: p.slope,
                vector: opts.with_vectors.then_some(p.vector),
            })
            .collect::<Vec<_>>()
    });
    let mut entries: Vec<SpectrumEntry> = per_sector.into_iter().flatten().collect();
    entries.sort_by(|a, b| a.lambda.total_cmp(&b.lambda).then(a.sector.cmp(&b.sector)).then(a.rank.cmp(&b.rank)));
    Ok(Spectrum { entries, classes: fam.classes.into_iter().map(|c| (c.norm2, c.blocks)).collect(), ..empty })
}

impl Spectrum {
    pub fn total_count(&self) -> usize {
        self.entries.iter().map(|e| e.multiplicity).sum()
    }

    /// Eigenvalues repeated by multiplicity, ascending.
    pub fn values(&self) -> Vec<f64> {
        self.entries.iter().flat_map(|e| std::iter::repeat_n(e.lambda, e.multiplicity)).collect()
    }

    /// Distinct eigenvalues after clustering at `1e-9·max(1, |λ|)`, with
    /// their total multiplicity.
    pub fn clustered(&self) -> Vec<(f64, usize)> {
        let mut out: Vec<(f64, usize)> = Vec::new();
        for e in &self.entries {
            match out.last_mut() {
                Some((v, m)) if (e.lambda - *v).abs() <= 1e-9 * v.abs().max(1.0) => *m += e.multiplicity,
                _ => out.push((e.lambda, e.multiplicity)),
            }
        }
        out
    }

    pub fn blocks(&self, entry: &SpectrumEntry) -> &[BlockId] {
        self.classes.get(&entry.sector.norm2).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn chain(&self, entry: &SpectrumEntry) -> BlockChain {
        BlockChain::new(&self.geom, entry.sector.norm2, entry.sector.parity, self.r, self.k_cut)
    }

    /// Fourier coefficient vectors of the eigenpair in every block of its class.
    pub fn block_vectors(&self, entry: &SpectrumEntry) -> Result<Vec<(BlockId, DVector<Complex64>)>, SpectralError> {
        let u = entry.vector.as_ref().ok_or(SpectralError::MissingVectors)?;
        let chain = self.chain(entry);
        Ok(self.blocks(entry).iter().map(|&id| (id, chain.to_fourier(id, u))).collect())
    }

    fn check_within(&self, lambda: f64) -> Result<(), SpectralError> {
        if lambda > self.window * (1.0 + 1e-12) {
            return Err(SpectralError::WindowExceeded { requested: lambda, window: self.window });
        }
        Ok(())
    }

    pub fn positive_negative(&self, below: f64) -> (Vec<&SpectrumEntry>, Vec<&SpectrumEntry>) {
        let pos = self.entries.iter().filter(|e| e.lambda > 0.0 && e.lambda < below).collect();
        let neg = self.entries.iter().filter(|e| e.lambda < 0.0 && e.lambda > -below).collect();
        (pos, neg)
    }
}

/// `dim V(r, λ)`: eigenvalues with `|λ_j| ≤ λ`, counted with multiplicity.
pub fn dim_v(spec: &Spectrum, lambda: f64) -> Result<usize, SpectralError> {
    spec.check_within(lambda)?;
    Ok(spec.entries.iter().filter(|e| e.lambda.abs() <= lambda).map(|e| e.multiplicity).sum())
}

/// Eigenvalues in `[lo, hi]` with multiplicity.
pub fn count_in_interval(spec: &Spectrum, lo: f64, hi: f64) -> Result<usize, SpectralError> {
    if !(hi - lo > 0.0 && hi - lo <= 2.0) {
        return Err(SpectralError::Precondition(format!("interval [{lo}, {hi}] must have length in (0, 2]")));
    }
    spec.check_within(lo.abs().max(hi.abs()))?;
    Ok(spec.entries.iter().filter(|e| e.lambda >= lo && e.lambda <= hi).map(|e| e.multiplicity).sum())
}

/// Sum of the pointwise densities over an orthonormal eigenbasis of
/// `V(r, λ)`; `psi2` is the Bergman-type sum `Σ_j |ψ_j(q)|²`.
pub fn bergman_density(spec: &Spectrum, lambda: f64, q: [f64; 3]) -> Result<PointDensity, SpectralError> {
    spec.check_within(lambda)?;
    weighted_density(spec, q, |e| if e.lambda.abs() <= lambda { 1.0 } else { 0.0 })
}

/// `Σ_j w(λ_j) (|ψ_j(q)|², |α_j(q)|², |β_j(q)|²)` over every eigenvector of
/// the window, each block of a norm class counted separately.
pub fn weighted_density<W: Fn(&SpectrumEntry) -> f64>(
    spec: &Spectrum,
    q: [f64; 3],
    weight: W,
) -> Result<PointDensity, SpectralError> {
    let mut acc = PointDensity::zero(q);
    for e in &spec.entries {
        let w = weight(e);
        if w == 0.0 {
            continue;
        }
        let u = e.vector.as_ref().ok_or(SpectralError::MissingVectors)?;
        let chain = spec.chain(e);
        for &id in spec.blocks(e) {
            let (up, dn) = chain.profile(id, u, q[2]);
            let d = split_density(&spec.geom, q, &nalgebra::Vector2::new(up, dn));
            acc.psi2 += w * d.psi2;
            acc.alpha2 += w * d.alpha2;
            acc.beta2 += w * d.beta2;
        }
    }
    Ok(acc)
}

pub fn bergman_sum(spec: &Spectrum, lambda: f64, q: [f64; 3]) -> Result<f64, SpectralError> {
    Ok(bergman_density(spec, lambda, q)?.psi2)
}

/// `Σ_j |ψ_j(q)|²` integrated over the torus by trapezoid in `z`; the sum
/// only depends on `z`.
pub fn integrated_bergman(spec: &Spectrum, lambda: f64, nz: usize) -> Result<f64, SpectralError> {
    let vol = (2.0 * std::f64::consts::PI).powi(3);
    let mut total = 0.0;
    for j in 0..nz {
        let z = 2.0 * std::f64::consts::PI * j as f64 / nz as f64;
        total += bergman_sum(spec, lambda, [0.0, 0.0, z])?;
    }
    Ok(total * vol / nz as f64)
}

/// `∫|β|²` and `∫|α|²` of the section `Σ_j c_j ψ_j` over the torus, for
/// coefficients attached to window entries (with their blocks). Cross terms
/// only survive between vectors of one block and one sector.
pub fn split_norms(spec: &Spectrum, combo: &[(usize, BlockId, Complex64)]) -> Result<(f64, f64), SpectralError> {
    let mut groups: BTreeMap<(BlockId, u8), Vec<(usize, Complex64)>> = BTreeMap::new();
    for &(idx, id, c) in combo {
        let e = &spec.entries[idx];
        groups.entry((id, e.sector.parity)).or_default().push((idx, c));
    }
    let (mut alpha, mut beta) = (0.0, 0.0);
    for members in groups.values() {
        let chain = spec.chain(&spec.entries[members[0].0]);
        let s_op = chain.slope_operator();
        for &(i, ci) in members {
            for &(j, cj) in members {
                let ui = spec.entries[i].vector.as_ref().ok_or(SpectralError::MissingVectors)?;
                let uj = spec.entries[j].vector.as_ref().ok_or(SpectralError::MissingVectors)?;
                // all entries of one block share its gauge, so cross terms are real bilinear forms
                let w = (ci.conj() * cj).re;
                let dot: f64 = ui.iter().zip(uj).map(|(a, b)| a * b).sum();
                let s = s_op.bilinear(ui, uj);
                alpha += w * (0.5 * dot + s);
                beta += w * (0.5 * dot - s);
            }
        }
    }
    Ok((alpha, beta))
}
