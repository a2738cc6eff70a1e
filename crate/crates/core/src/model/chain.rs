//! Real symmetric tridiagonal reduction of a Fourier block.
//!
//! A block only couples `(k,↑)–(k,↓)` through `−m + i n` and `(k,↓)–(k+2,↑)`
//! through `r/2`, so each parity class of `k` is a path graph. A diagonal
//! phase change turns it into a real symmetric tridiagonal matrix whose
//! entries depend on `(m, n)` only through `ρ = √(m²+n²)`. Sturm counts on
//! the chain give exact inertia, bisection gives eigenvalues in a window and
//! inverse iteration gives eigenvectors.

use std::ops::Range;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::block::{fourier_index, BlockId, Spin};
use super::geometry::ContactTorusGeometry;

#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiag {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

fn pivot_floor(max_off: f64) -> f64 {
    f64::MIN_POSITIVE * max_off.max(1.0) * max_off.max(1.0) / f64::EPSILON
}

impl SymTridiag {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert!(
            off.len() + 1 == diag.len() || (diag.is_empty() && off.is_empty()),
            "off-diagonal length must be one less than the diagonal"
        );
        SymTridiag { diag, off }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut rad = 0.0;
            if i > 0 {
                rad += self.off[i - 1].abs();
            }
            if i + 1 < n {
                rad += self.off[i].abs();
            }
            lo = lo.min(self.diag[i] - rad);
            hi = hi.max(self.diag[i] + rad);
        }
        (lo, hi)
    }

    pub fn norm_bound(&self) -> f64 {
        let (lo, hi) = self.gershgorin();
        lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE)
    }

    fn max_off(&self) -> f64 {
        self.off.iter().fold(0.0f64, |a, e| a.max(e.abs()))
    }

    /// Number of eigenvalues strictly below `x` (Sylvester inertia of `T − x`).
    pub fn count_below(&self, x: f64) -> usize {
        let pivmin = pivot_floor(self.max_off());
        let mut count = 0;
        let mut q = 1.0;
        for i in 0..self.len() {
            q = self.diag[i] - x - if i > 0 { self.off[i - 1] * self.off[i - 1] / q } else { 0.0 };
            if q.abs() <= pivmin {
                q = -pivmin;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn bisect(&self, rank: usize, mut lo: f64, mut hi: f64) -> f64 {
        let atol = 2.0 * f64::EPSILON * self.norm_bound() + pivot_floor(self.max_off());
        for _ in 0..256 {
            let width = hi - lo;
            if width <= atol.max(2.0 * f64::EPSILON * lo.abs().max(hi.abs())) {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if self.count_below(mid) > rank {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// The eigenvalue of 0-based ascending rank `rank`.
    pub fn eigenvalue(&self, rank: usize) -> f64 {
        assert!(rank < self.len());
        let (lo, hi) = self.gershgorin();
        let pad = 1e-12 * (hi - lo).abs().max(1.0);
        self.bisect(rank, lo - pad, hi + pad)
    }

    /// Eigenvalues in `[lo, hi)` with the rank of the first one.
    pub fn eigenvalues_in(&self, lo: f64, hi: f64) -> (usize, Vec<f64>) {
        if self.is_empty() || !(hi > lo) {
            return (self.count_below(lo.min(hi)), Vec::new());
        }
        let first = self.count_below(lo);
        let last = self.count_below(hi);
        let vals = (first..last).map(|j| self.bisect(j, lo, hi)).collect();
        (first, vals)
    }

    pub fn all_eigenvalues(&self) -> Vec<f64> {
        (0..self.len()).map(|j| self.eigenvalue(j)).collect()
    }

    /// Maximal index ranges with no negligible off-diagonal entry.
    pub fn pieces(&self) -> Vec<Range<usize>> {
        let tiny = f64::EPSILON * self.norm_bound();
        let mut out = Vec::new();
        let mut start = 0;
        for (i, e) in self.off.iter().enumerate() {
            if e.abs() <= tiny {
                out.push(start..i + 1);
                start = i + 1;
            }
        }
        if start < self.len() {
            out.push(start..self.len());
        }
        out
    }

    pub fn sub(&self, range: Range<usize>) -> SymTridiag {
        let off = if range.len() > 1 { self.off[range.start..range.end - 1].to_vec() } else { Vec::new() };
        SymTridiag::new(self.diag[range].to_vec(), off)
    }

    /// `T u`.
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut acc = self.diag[i] * u[i];
                if i > 0 {
                    acc += self.off[i - 1] * u[i - 1];
                }
                if i + 1 < n {
                    acc += self.off[i] * u[i + 1];
                }
                acc
            })
            .collect()
    }

    /// `uᵀ T w`.
    pub fn bilinear(&self, u: &[f64], w: &[f64]) -> f64 {
        self.apply(w).iter().zip(u).map(|(a, b)| a * b).sum()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.len();
        DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                self.diag[i]
            } else if i + 1 == j {
                self.off[i]
            } else if j + 1 == i {
                self.off[j]
            } else {
                0.0
            }
        })
    }

    /// Unit eigenvector for an accurate eigenvalue estimate, orthogonalized
    /// against `against` (vectors of close eigenvalues in the same piece).
    pub fn inverse_iteration(&self, lambda: f64, against: &[&[f64]]) -> Vec<f64> {
        let n = self.len();
        if n == 1 {
            return vec![1.0];
        }
        let lu = TridiagLu::factor(self, lambda);
        // Deterministic start with no special alignment to any eigenvector.
        #[allow(clippy::approx_constant)]
        let mut x: Vec<f64> = (0..n)
            .map(|i| {
                let s = (i as f64 * 0.754_877_666_246_692_8 + 0.318_309_886).fract();
                2.0 * s - 1.0 + 1e-3
            })
            .collect();
        let tol = 16.0 * n as f64 * f64::EPSILON * self.norm_bound();
        for iter in 0..8 {
            lu.solve(&mut x);
            for w in against {
                let c: f64 = x.iter().zip(w.iter()).map(|(a, b)| a * b).sum();
                x.iter_mut().zip(w.iter()).for_each(|(a, b)| *a -= c * b);
            }
            let norm = x.iter().map(|a| a * a).sum::<f64>().sqrt();
            if norm == 0.0 || !norm.is_finite() {
                x = (0..n).map(|i| if i == iter % n { 1.0 } else { 0.0 }).collect();
                continue;
            }
            x.iter_mut().for_each(|a| *a /= norm);
            if iter >= 1 {
                let tx = self.apply(&x);
                let res = tx.iter().zip(&x).map(|(t, a)| (t - lambda * a).powi(2)).sum::<f64>().sqrt();
                if res <= tol {
                    break;
                }
            }
        }
        // fix the overall sign for reproducibility
        if let Some(big) = x.iter().copied().max_by(|a, b| a.abs().total_cmp(&b.abs())) {
            if big < 0.0 {
                x.iter_mut().for_each(|a| *a = -*a);
            }
        }
        x
    }

    /// Eigenpairs with eigenvalue in `[lo, hi)`, sorted ascending. Vectors
    /// have full chain length.
    pub fn eigenpairs_in(&self, lo: f64, hi: f64) -> Vec<(f64, Vec<f64>)> {
        let n = self.len();
        let mut out = Vec::new();
        for piece in self.pieces() {
            let t = self.sub(piece.clone());
            let (_, vals) = t.eigenvalues_in(lo, hi);
            let ortho_gap = 1e-3 * t.norm_bound();
            let mut local: Vec<(f64, Vec<f64>)> = Vec::with_capacity(vals.len());
            for &lam in &vals {
                let near: Vec<&[f64]> =
                    local.iter().filter(|(mu, _)| (lam - mu).abs() <= ortho_gap).map(|(_, v)| v.as_slice()).collect();
                let v = t.inverse_iteration(lam, &near);
                local.push((lam, v));
            }
            for (lam, v) in local {
                let mut full = vec![0.0; n];
                full[piece.clone()].copy_from_slice(&v);
                out.push((lam, full));
            }
        }
        out.sort_by(|a, b| a.0.total_cmp(&b.0));
        out
    }
}

/// LU factorization of `T − λ` with partial pivoting.
struct TridiagLu {
    d: Vec<f64>,
    dl: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swapped: Vec<bool>,
}

impl TridiagLu {
    fn factor(t: &SymTridiag, lambda: f64) -> Self {
        let n = t.len();
        let mut d: Vec<f64> = t.diag.iter().map(|a| a - lambda).collect();
        let mut dl = t.off.clone();
        let mut du = t.off.clone();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] != 0.0 {
                    let fact = dl[i] / d[i];
                    dl[i] = fact;
                    d[i + 1] -= fact * du[i];
                }
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -fact;
                }
                swapped[i] = true;
            }
        }
        let floor = f64::EPSILON * t.norm_bound();
        for p in d.iter_mut() {
            if p.abs() < floor {
                *p = if *p < 0.0 { -floor } else { floor };
            }
        }
        TridiagLu { d, dl, du, du2, swapped }
    }

    fn solve(&self, b: &mut [f64]) {
        let n = self.d.len();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - self.dl[i] * b[i];
            } else {
                b[i + 1] -= self.dl[i] * b[i];
            }
        }
        b[n - 1] /= self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }
}

/// Eigenpairs of `t` in `[lo, hi)` with slopes `⟨u, t′ u⟩`. Numerically
/// degenerate clusters are rotated to diagonalize `t′`, so each slope is a
/// genuine one-sided branch derivative.
pub fn eigenpairs_with_slopes(t: &SymTridiag, deriv: &SymTridiag, lo: f64, hi: f64) -> Vec<ChainEigenPair> {
    let raw = t.eigenpairs_in(lo, hi);
    let mut out = Vec::with_capacity(raw.len());
    let mut i = 0;
    while i < raw.len() {
        let mut j = i + 1;
        while j < raw.len() && raw[j].0 - raw[j - 1].0 <= 1e-9 * raw[j].0.abs().max(1.0) {
            j += 1;
        }
        if j - i == 1 {
            let (value, vector) = raw[i].clone();
            out.push(ChainEigenPair { value, slope: deriv.bilinear(&vector, &vector), vector });
        } else {
            out.extend(rotate_cluster(deriv, &raw[i..j]));
        }
        i = j;
    }
    out
}

fn rotate_cluster(deriv: &SymTridiag, cluster: &[(f64, Vec<f64>)]) -> Vec<ChainEigenPair> {
    let p = cluster.len();
    let n = cluster[0].1.len();
    let gram = DMatrix::from_fn(p, p, |a, b| deriv.bilinear(&cluster[a].1, &cluster[b].1));
    let eig = gram.symmetric_eigen();
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    order
        .iter()
        .enumerate()
        .map(|(slot, &col)| {
            let mut v = vec![0.0; n];
            for (b, (_, u)) in cluster.iter().enumerate() {
                let c = eig.eigenvectors[(b, col)];
                v.iter_mut().zip(u).for_each(|(a, x)| *a += c * x);
            }
            ChainEigenPair { value: cluster[slot].0, slope: eig.eigenvalues[col], vector: v }
        })
        .collect()
}

/// One parity sector of one norm class of blocks, as a real chain.
#[derive(Debug, Clone)]
pub struct BlockChain {
    pub norm2: u64,
    pub parity: u8,
    pub k_cut: usize,
    pub r: f64,
    pub cz: f64,
    pub sites: Vec<(i64, Spin)>,
    pub tri: SymTridiag,
}

#[derive(Debug, Clone)]
pub struct ChainEigenPair {
    pub value: f64,
    pub slope: f64,
    pub vector: Vec<f64>,
}

impl BlockChain {
    pub fn new(geom: &ContactTorusGeometry, norm2: u64, parity: u8, r: f64, k_cut: usize) -> Self {
        let kk = k_cut as i64;
        let rho = (norm2 as f64).sqrt();
        let shift = 0.5 * geom.cz();
        let ks: Vec<i64> = (-kk..=kk).filter(|k| k.rem_euclid(2) == i64::from(parity)).collect();
        let mut sites = Vec::with_capacity(2 * ks.len());
        let mut diag = Vec::with_capacity(2 * ks.len());
        let mut off = Vec::with_capacity(2 * ks.len());
        for (j, &k) in ks.iter().enumerate() {
            let s = k as f64 + shift;
            if j > 0 {
                off.push(0.5 * r);
            }
            sites.push((k, Spin::Up));
            diag.push(-s);
            off.push(rho);
            sites.push((k, Spin::Down));
            diag.push(s);
        }
        BlockChain { norm2, parity, k_cut, r, cz: geom.cz(), sites, tri: SymTridiag::new(diag, off) }
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    /// `dD/dr` in chain coordinates: ½ on every `(k,↓)–(k+2,↑)` edge.
    pub fn slope_operator(&self) -> SymTridiag {
        let off = (0..self.tri.off.len()).map(|i| if i % 2 == 1 { 0.5 } else { 0.0 }).collect();
        SymTridiag::new(vec![0.0; self.len()], off)
    }

    pub fn slope(&self, u: &[f64]) -> f64 {
        u.windows(2).enumerate().filter(|(i, _)| i % 2 == 1).map(|(_, w)| w[0] * w[1]).sum()
    }

    /// Eigenpairs in `[lo, hi)` with Hellmann–Feynman slopes.
    pub fn eigenpairs_in(&self, lo: f64, hi: f64) -> Vec<ChainEigenPair> {
        eigenpairs_with_slopes(&self.tri, &self.slope_operator(), lo, hi)
    }

    /// Diagonal phases taking chain coordinates to the Fourier coefficients of
    /// block `id` (which must belong to this norm class).
    pub fn gauge(&self, id: BlockId) -> Vec<Complex64> {
        debug_assert_eq!(id.norm2(), self.norm2);
        let h = id.horizontal_symbol();
        let hp = if h.norm() > 0.0 { h.conj() / h.norm() } else { Complex64::new(1.0, 0.0) };
        let mut d = Vec::with_capacity(self.len());
        let mut cur = Complex64::new(1.0, 0.0);
        for s in 0..self.len() {
            d.push(cur);
            if s % 2 == 0 {
                cur *= hp;
            }
        }
        d
    }

    /// Fourier coefficient vector (length `2(2K+1)`) of a chain vector in block `id`.
    pub fn to_fourier(&self, id: BlockId, u: &[f64]) -> DVector<Complex64> {
        let dim = 2 * (2 * self.k_cut + 1);
        let mut v = DVector::<Complex64>::zeros(dim);
        for ((&(k, spin), d), &x) in self.sites.iter().zip(self.gauge(id)).zip(u) {
            v[fourier_index(self.k_cut, k, spin)] = d * x;
        }
        v
    }

    /// `(φ↑(z), φ↓(z))` for the chain vector placed in block `id`, with
    /// `φ(z) = Σ_k v_k e^{ikz}` (no volume normalization).
    pub fn profile(&self, id: BlockId, u: &[f64], z: f64) -> (Complex64, Complex64) {
        let mut up = Complex64::new(0.0, 0.0);
        let mut dn = Complex64::new(0.0, 0.0);
        for ((&(k, spin), d), &x) in self.sites.iter().zip(self.gauge(id)).zip(u) {
            let term = d * x * Complex64::from_polar(1.0, k as f64 * z);
            match spin {
                Spin::Up => up += term,
                Spin::Down => dn += term,
            }
        }
        (up, dn)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::block::{assemble_block, block_spectrum};

    #[test]
    fn sturm_count_matches_dense() {
        let t = SymTridiag::new(vec![1.0, -2.0, 0.5, 3.0, -1.0], vec![0.3, 1.2, 0.0, 2.0]);
        let vals = t.to_dense().symmetric_eigenvalues();
        let mut sorted: Vec<f64> = vals.iter().copied().collect();
        sorted.sort_by(f64::total_cmp);
        for x in [-5.0, -1.5, 0.0, 0.7, 2.0, 10.0] {
            let want = sorted.iter().filter(|&&v| v < x).count();
            assert_eq!(t.count_below(x), want);
        }
        for (j, v) in sorted.iter().enumerate() {
            assert!((t.eigenvalue(j) - v).abs() < 1e-13);
        }
    }

    #[test]
    fn chain_vectors_are_dense_eigenvectors() {
        let g = ContactTorusGeometry::with_cz(0.4);
        let (m, n, r, k_cut) = (3, -2, 9.5, 12);
        let block = assemble_block(&g, m, n, r, k_cut).unwrap();
        let id = BlockId::new(m, n);
        let mut from_chains = Vec::new();
        for parity in 0..2u8 {
            let ch = BlockChain::new(&g, id.norm2(), parity, r, k_cut);
            for p in ch.eigenpairs_in(-3.0, 3.0) {
                let v = ch.to_fourier(id, &p.vector);
                let res = (&block.matrix * &v - &v * Complex64::new(p.value, 0.0)).norm();
                assert!(res < 1e-11, "residual {res}");
                let s = crate::model::block::hf_slope(&block, &v).unwrap();
                assert!((s - p.slope).abs() < 1e-12);
                from_chains.push(p.value);
            }
        }
        from_chains.sort_by(f64::total_cmp);
        let dense: Vec<f64> =
            block_spectrum(&block).unwrap().iter().map(|p| p.value).filter(|v| (-3.0..3.0).contains(v)).collect();
        assert_eq!(dense.len(), from_chains.len());
        for (a, b) in dense.iter().zip(&from_chains) {
            assert!((a - b).abs() < 1e-11);
        }
    }

    #[test]
    fn degenerate_cluster_slopes_are_rotated() {
        // At r = 0 the (1,0) block has ±√2 twice in the odd sector, and dD/dr
        // mixes the two copies.
        let g = ContactTorusGeometry::default();
        let ch = BlockChain::new(&g, 1, 1, 0.0, 3);
        let pairs = ch.eigenpairs_in(1.0, 1.5);
        assert_eq!(pairs.len(), 2);
        let s_op = ch.slope_operator();
        let cross = s_op.bilinear(&pairs[0].vector, &pairs[1].vector);
        assert!(cross.abs() < 1e-14);
        assert!(pairs[0].slope < pairs[1].slope);
    }

    #[test]
    fn zero_mode_class_splits_into_pieces() {
        let g = ContactTorusGeometry::default();
        let ch = BlockChain::new(&g, 0, 0, 5.0, 4);
        assert!(ch.tri.pieces().len() > 1);
        let dense = ch.tri.to_dense().symmetric_eigenvalues();
        let mut d: Vec<f64> = dense.iter().copied().collect();
        d.sort_by(f64::total_cmp);
        let pairs = ch.eigenpairs_in(-100.0, 100.0);
        assert_eq!(pairs.len(), ch.len());
        for (p, v) in pairs.iter().zip(&d) {
            assert!((p.value - v).abs() < 1e-12);
        }
        for a in 0..pairs.len() {
            for b in 0..a {
                let dot: f64 = pairs[a].vector.iter().zip(&pairs[b].vector).map(|(x, y)| x * y).sum();
                assert!(dot.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn spectrum_depends_on_norm_only() {
        let g = ContactTorusGeometry::default();
        let a = block_spectrum(&assemble_block(&g, 5, 0, 12.0, 10).unwrap()).unwrap();
        let b = block_spectrum(&assemble_block(&g, 3, 4, 12.0, 10).unwrap()).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x.value - y.value).abs() < 1e-11);
        }
    }
}
