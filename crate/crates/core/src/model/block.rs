use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::geometry::ContactTorusGeometry;
use super::ModelError;

/// Horizontal Fourier mode `(m, n)` labelling one block of the operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BlockId {
    pub m: i32,
    pub n: i32,
}

impl BlockId {
    pub fn new(m: i32, n: i32) -> Self {
        BlockId { m, n }
    }

    pub fn norm2(&self) -> u64 {
        let m = i64::from(self.m);
        let n = i64::from(self.n);
        (m * m + n * n) as u64
    }

    pub fn rho(&self) -> f64 {
        (self.norm2() as f64).sqrt()
    }

    /// The `(k↑, k↓)` entry of the block, `−m + i n`.
    pub fn horizontal_symbol(&self) -> Complex64 {
        Complex64::new(-f64::from(self.m), f64::from(self.n))
    }
}

/// Spinor component in the `σ₃` eigenbasis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Spin {
    Up,
    Down,
}

/// Position of the `(k, spin)` coefficient in a block of cutoff `k_cut`.
pub fn fourier_index(k_cut: usize, k: i64, spin: Spin) -> usize {
    let base = 2 * (k + k_cut as i64) as usize;
    match spin {
        Spin::Up => base,
        Spin::Down => base + 1,
    }
}

/// One `(m, n)` block of the Dirac family truncated to z-modes `|k| ≤ K`.
#[derive(Debug, Clone)]
pub struct FourierBlockOperator {
    pub id: BlockId,
    pub k_cut: usize,
    pub r: f64,
    pub cz: f64,
    pub matrix: DMatrix<Complex64>,
}

#[derive(Debug, Clone)]
pub struct EigenPair {
    pub value: f64,
    pub vector: nalgebra::DVector<Complex64>,
}

/// Smallest cutoff resolving the window `|λ| ≤ Λ` of a block family at `r`.
///
/// Eigenvectors with small eigenvalue concentrate near `|k| ≈ r/2` before
/// decaying, so the cutoff has to clear that shell rather than only `√(r+Λ²)`.
pub fn cutoff_for_window(r: f64, lambda: f64) -> usize {
    let shell = 0.5 * r.max(0.0) + (r.max(0.0) + lambda * lambda).sqrt();
    shell.ceil() as usize + 8
}

/// Lower bound on `λ²` for every eigenvalue of block `ρ = √(m²+n²)`.
pub fn eigenvalue_sq_lower_bound(rho: f64, r: f64) -> f64 {
    let d = rho - 0.5 * r;
    d * d - r
}

/// Whether a block of radius `ρ` can hold an eigenvalue with `|λ| ≤ Λ`.
pub fn block_admits_window(rho: f64, r: f64, lambda: f64) -> bool {
    eigenvalue_sq_lower_bound(rho, r) <= lambda * lambda * (1.0 + 1e-12) + 1e-12
}

fn diag_shift(k: i64, cz: f64) -> f64 {
    k as f64 + 0.5 * cz
}

pub fn assemble_block(
    geom: &ContactTorusGeometry,
    m: i32,
    n: i32,
    r: f64,
    k_cut: usize,
) -> Result<FourierBlockOperator, ModelError> {
    if k_cut < 2 {
        return Err(ModelError::CutoffTooSmall(k_cut));
    }
    if !(r >= 0.0) || !r.is_finite() {
        return Err(ModelError::NegativeCoupling(r));
    }
    let id = BlockId::new(m, n);
    let kk = k_cut as i64;
    let dim = 2 * (2 * k_cut + 1);
    let mut mat = DMatrix::<Complex64>::zeros(dim, dim);
    let h = id.horizontal_symbol();
    let half_r = Complex64::new(0.5 * r, 0.0);
    for k in -kk..=kk {
        let up = fourier_index(k_cut, k, Spin::Up);
        let dn = fourier_index(k_cut, k, Spin::Down);
        let s = diag_shift(k, geom.cz());
        mat[(up, up)] = Complex64::new(-s, 0.0);
        mat[(dn, dn)] = Complex64::new(s, 0.0);
        mat[(up, dn)] = h;
        mat[(dn, up)] = h.conj();
        if k + 2 <= kk {
            let up2 = fourier_index(k_cut, k + 2, Spin::Up);
            mat[(up2, dn)] = half_r;
            mat[(dn, up2)] = half_r;
        }
    }
    Ok(FourierBlockOperator { id, k_cut, r, cz: geom.cz(), matrix: mat })
}

/// `dD/dr` in the Fourier basis: `½(cos 2z σ₁ − sin 2z σ₂)`.
pub fn slope_matrix(k_cut: usize) -> DMatrix<Complex64> {
    let kk = k_cut as i64;
    let dim = 2 * (2 * k_cut + 1);
    let mut s = DMatrix::<Complex64>::zeros(dim, dim);
    let half = Complex64::new(0.5, 0.0);
    for k in -kk..=(kk - 2) {
        let dn = fourier_index(k_cut, k, Spin::Down);
        let up2 = fourier_index(k_cut, k + 2, Spin::Up);
        s[(up2, dn)] = half;
        s[(dn, up2)] = half;
    }
    s
}

impl FourierBlockOperator {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn hermiticity_residual(&self) -> f64 {
        let norm = self.matrix.norm();
        let diff = (&self.matrix - self.matrix.adjoint()).norm();
        if norm == 0.0 {
            diff
        } else {
            diff / norm
        }
    }

    /// Whether every nonzero entry sits on the declared band pattern.
    pub fn respects_band_pattern(&self) -> bool {
        let kk = self.k_cut as i64;
        let mode = |i: usize| (i / 2) as i64 - kk;
        for j in 0..self.dim() {
            for i in 0..self.dim() {
                if self.matrix[(i, j)].norm() == 0.0 {
                    continue;
                }
                let dk = (mode(i) - mode(j)).abs();
                if dk != 0 && dk != 2 {
                    return false;
                }
            }
        }
        true
    }

    /// Indices of the z-modes with `k ≡ parity (mod 2)`; the block is a direct
    /// sum over the two parities.
    pub fn sector_indices(&self, parity: u8) -> Vec<usize> {
        let kk = self.k_cut as i64;
        (-kk..=kk)
            .filter(|k| k.rem_euclid(2) == i64::from(parity))
            .flat_map(|k| [fourier_index(self.k_cut, k, Spin::Up), fourier_index(self.k_cut, k, Spin::Down)])
            .collect()
    }

    pub fn sector_matrix(&self, parity: u8) -> DMatrix<Complex64> {
        let idx = self.sector_indices(parity);
        DMatrix::from_fn(idx.len(), idx.len(), |i, j| self.matrix[(idx[i], idx[j])])
    }
}

/// Dense Hermitian eigensolve, ascending, with a residual check on every pair.
pub fn block_spectrum(block: &FourierBlockOperator) -> Result<Vec<EigenPair>, ModelError> {
    hermitian_eigenpairs(&block.matrix)
}

pub fn hermitian_eigenpairs(mat: &DMatrix<Complex64>) -> Result<Vec<EigenPair>, ModelError> {
    let scale = mat.norm().max(f64::MIN_POSITIVE);
    let eig =
        mat.clone().try_symmetric_eigen(f64::EPSILON, 10_000).ok_or(ModelError::EigensolverDiverged(mat.nrows()))?;
    let mut pairs: Vec<EigenPair> = eig
        .eigenvalues
        .iter()
        .zip(eig.eigenvectors.column_iter())
        .map(|(&value, v)| EigenPair { value, vector: v.into_owned() })
        .collect();
    pairs.sort_by(|a, b| a.value.total_cmp(&b.value));
    for p in &pairs {
        let res = (mat * &p.vector - &p.vector * Complex64::new(p.value, 0.0)).norm();
        if res > 1e-10 * scale {
            return Err(ModelError::EigenResidual { value: p.value, residual: res / scale });
        }
    }
    Ok(pairs)
}

/// Sorted eigenvalues only.
pub fn hermitian_eigenvalues(mat: &DMatrix<Complex64>) -> Result<Vec<f64>, ModelError> {
    if mat.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(ModelError::NonFinite("block entries"));
    }
    let mut vals: Vec<f64> = mat.symmetric_eigenvalues().iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

/// Hellmann–Feynman slope `⟨v, (dD/dr) v⟩` of a unit Fourier coefficient vector.
pub fn hf_slope(block: &FourierBlockOperator, v: &nalgebra::DVector<Complex64>) -> Result<f64, ModelError> {
    if v.len() != block.dim() {
        return Err(ModelError::ShapeMismatch { expected: block.dim(), found: v.len() });
    }
    let kk = block.k_cut as i64;
    let mut acc = 0.0;
    for k in -kk..=(kk - 2) {
        let dn = v[fourier_index(block.k_cut, k, Spin::Down)];
        let up2 = v[fourier_index(block.k_cut, k + 2, Spin::Up)];
        acc += (up2.conj() * dn).re;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted_closed_form(m: i32, n: i32, k_cut: i64) -> Vec<f64> {
        let mut v: Vec<f64> = (-k_cut..=k_cut)
            .flat_map(|k| {
                let e = ((m * m + n * n) as f64 + (k * k) as f64).sqrt();
                [e, -e]
            })
            .collect();
        v.sort_by(f64::total_cmp);
        v
    }

    #[test]
    fn flat_blocks_match_closed_form() {
        let g = ContactTorusGeometry::default();
        for (m, n) in [(0, 0), (1, 0), (2, -3), (-1, 4)] {
            let b = assemble_block(&g, m, n, 0.0, 2).unwrap();
            let vals: Vec<f64> = block_spectrum(&b).unwrap().iter().map(|p| p.value).collect();
            let want = sorted_closed_form(m, n, 2);
            for (a, w) in vals.iter().zip(&want) {
                assert!((a - w).abs() < 1e-12, "{m},{n}: {a} vs {w}");
            }
        }
    }

    #[test]
    fn zero_mode_block_has_double_kernel() {
        let b = assemble_block(&ContactTorusGeometry::default(), 0, 0, 0.0, 2).unwrap();
        let vals: Vec<f64> = block_spectrum(&b).unwrap().iter().map(|p| p.value).collect();
        assert_eq!(vals.iter().filter(|v| v.abs() < 1e-12).count(), 2);
        assert_eq!(vals.iter().filter(|v| (v.abs() - 1.0).abs() < 1e-12).count(), 4);
        assert_eq!(vals.iter().filter(|v| (v.abs() - 2.0).abs() < 1e-12).count(), 4);
    }

    #[test]
    fn flat_block_is_mode_diagonal() {
        let b = assemble_block(&ContactTorusGeometry::default(), 2, 1, 0.0, 3).unwrap();
        for k in -3i64..=3 {
            let up = fourier_index(3, k, Spin::Up);
            let dn = fourier_index(3, k, Spin::Down);
            assert_eq!(b.matrix[(up, up)].re, -(k as f64));
            assert_eq!(b.matrix[(dn, dn)].re, k as f64);
            assert_eq!(b.matrix[(up, dn)], Complex64::new(-2.0, 1.0));
        }
        let off: f64 = (0..b.dim())
            .flat_map(|i| (0..b.dim()).map(move |j| (i, j)))
            .filter(|(i, j)| i / 2 != j / 2)
            .map(|(i, j)| b.matrix[(i, j)].norm())
            .sum();
        assert_eq!(off, 0.0);
    }

    #[test]
    fn small_cutoff_rejected() {
        let g = ContactTorusGeometry::default();
        assert!(matches!(assemble_block(&g, 0, 0, 1.0, 1), Err(ModelError::CutoffTooSmall(1))));
        assert!(assemble_block(&g, 0, 0, -1.0, 4).is_err());
    }

    #[test]
    fn band_pattern_and_hermiticity() {
        let g = ContactTorusGeometry::with_cz(0.7);
        let b = assemble_block(&g, 3, -2, 17.5, 6).unwrap();
        assert!(b.respects_band_pattern());
        assert!(b.hermiticity_residual() <= 1e-12);
    }

    #[test]
    fn slope_matrix_is_exact_derivative() {
        let g = ContactTorusGeometry::default();
        let a = assemble_block(&g, 1, 2, 3.0, 5).unwrap();
        let b = assemble_block(&g, 1, 2, 4.0, 5).unwrap();
        assert!((&b.matrix - &a.matrix - slope_matrix(5)).norm() < 1e-15);
    }

    #[test]
    fn flat_single_mode_slope_vanishes() {
        let b = assemble_block(&ContactTorusGeometry::default(), 1, 0, 0.0, 4).unwrap();
        for k in -4i64..=4 {
            for spin in [Spin::Up, Spin::Down] {
                let mut v = nalgebra::DVector::<Complex64>::zeros(b.dim());
                v[fourier_index(4, k, spin)] = Complex64::new(1.0, 0.0);
                assert_eq!(hf_slope(&b, &v).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn hf_slope_matches_finite_difference() {
        let g = ContactTorusGeometry::default();
        let k_cut = 12;
        let (r, h) = (7.3, 1e-5);
        let mid = block_spectrum(&assemble_block(&g, 2, 1, r, k_cut).unwrap()).unwrap();
        let lo = block_spectrum(&assemble_block(&g, 2, 1, r - h, k_cut).unwrap()).unwrap();
        let hi = block_spectrum(&assemble_block(&g, 2, 1, r + h, k_cut).unwrap()).unwrap();
        let block = assemble_block(&g, 2, 1, r, k_cut).unwrap();
        for i in 20..30 {
            let fd = (hi[i].value - lo[i].value) / (2.0 * h);
            let s = hf_slope(&block, &mid[i].vector).unwrap();
            assert!((fd - s).abs() < 1e-6, "{i}: {fd} vs {s}");
            assert!(s.abs() <= 0.5 + 1e-12);
        }
    }

    #[test]
    fn trace_identity_on_random_block() {
        let g = ContactTorusGeometry::with_cz(0.3);
        let b = assemble_block(&g, -4, 3, 11.0, 7).unwrap();
        let sum: f64 = block_spectrum(&b).unwrap().iter().map(|p| p.value).sum();
        assert!((sum - b.matrix.trace().re).abs() < 1e-10);
    }

    #[test]
    fn zero_matrix_spectrum() {
        let z = DMatrix::<Complex64>::zeros(6, 6);
        assert!(hermitian_eigenpairs(&z).unwrap().iter().all(|p| p.value == 0.0));
    }
}
