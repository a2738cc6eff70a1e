use std::f64::consts::PI;

use nalgebra::{DVector, Matrix2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::block::{fourier_index, BlockId, Spin};
use super::clifford::{C2x2, CliffordFrame};
use super::geometry::ContactTorusGeometry;

/// `(P₁, P₂)` with `P₁ = ½(1 − i cl(v))` onto the `α` summand and `P₂ = 1 − P₁`.
pub fn splitting_projectors(geom: &ContactTorusGeometry, z: f64) -> (C2x2, C2x2) {
    let frame = CliffordFrame::default();
    let i = Complex64::new(0.0, 1.0);
    let half = Complex64::new(0.5, 0.0);
    let p1 = (C2x2::identity() - frame.cl(geom.reeb(z)) * i) * half;
    let p2 = C2x2::identity() - p1;
    (p1, p2)
}

/// Largest violation of idempotency, completeness and orthogonality.
pub fn projector_residual(p1: &C2x2, p2: &C2x2) -> f64 {
    let id = C2x2::identity();
    [(p1 * p1 - p1).norm(), (p2 * p2 - p2).norm(), (p1 + p2 - id).norm(), (p1 * p2).norm(), (p1 - p1.adjoint()).norm()]
        .into_iter()
        .fold(0.0, f64::max)
}

/// `(1 − 2s)/(1 + 2s)`: the ratio `∫|β|²/∫|α|²` of a unit eigenvector with
/// Hellmann–Feynman slope `s`, since `∫|α|² − ∫|β|² = 2s`.
pub fn beta_ratio_from_slope(slope: f64) -> f64 {
    (1.0 - 2.0 * slope) / (1.0 + 2.0 * slope)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointDensity {
    pub q: [f64; 3],
    pub psi2: f64,
    pub alpha2: f64,
    pub beta2: f64,
}

impl PointDensity {
    pub fn zero(q: [f64; 3]) -> Self {
        PointDensity { q, psi2: 0.0, alpha2: 0.0, beta2: 0.0 }
    }

    pub fn splitting_defect(&self) -> f64 {
        (self.psi2 - self.alpha2 - self.beta2).abs()
    }
}

/// A Fourier coefficient vector of block `block` with a complex amplitude.
#[derive(Debug, Clone)]
pub struct WeightedMode {
    pub block: BlockId,
    pub k_cut: usize,
    pub coeffs: DVector<Complex64>,
    pub amplitude: Complex64,
}

/// L²-normalization of a single Fourier mode on the 2π-cube.
pub fn volume_normalization() -> f64 {
    (2.0 * PI).powi(-3)
}

/// `(φ↑(z), φ↓(z)) = Σ_k v_k e^{ikz}` for a block coefficient vector.
pub fn z_profile(k_cut: usize, coeffs: &DVector<Complex64>, z: f64) -> [Complex64; 2] {
    let kk = k_cut as i64;
    let mut out = [Complex64::new(0.0, 0.0); 2];
    for k in -kk..=kk {
        let e = Complex64::from_polar(1.0, k as f64 * z);
        out[0] += coeffs[fourier_index(k_cut, k, Spin::Up)] * e;
        out[1] += coeffs[fourier_index(k_cut, k, Spin::Down)] * e;
    }
    out
}

/// Density of the section `ψ = Σ amplitude · e^{i(mx+ny)} φ(z)`, normalized so
/// that a unit coefficient vector has `∫|ψ|² = 1`.
pub fn pointwise_density(geom: &ContactTorusGeometry, q: [f64; 3], modes: &[WeightedMode]) -> PointDensity {
    if modes.is_empty() {
        return PointDensity::zero(q);
    }
    let mut psi = nalgebra::Vector2::<Complex64>::zeros();
    for mode in modes {
        let [up, dn] = z_profile(mode.k_cut, &mode.coeffs, q[2]);
        let phase = Complex64::from_polar(1.0, f64::from(mode.block.m) * q[0] + f64::from(mode.block.n) * q[1]);
        psi[0] += mode.amplitude * phase * up;
        psi[1] += mode.amplitude * phase * dn;
    }
    split_density(geom, q, &psi)
}

pub fn split_density(geom: &ContactTorusGeometry, q: [f64; 3], psi: &nalgebra::Vector2<Complex64>) -> PointDensity {
    let (p1, p2) = splitting_projectors(geom, q[2]);
    let vol = volume_normalization();
    let a = p1 * psi;
    let b = p2 * psi;
    PointDensity { q, psi2: psi.norm_squared() * vol, alpha2: a.norm_squared() * vol, beta2: b.norm_squared() * vol }
}

/// Identity check used in tests: `P₁` at height `z` equals `½(1 + cos2z σ₁ − sin2z σ₂)`.
pub fn projector_closed_form(z: f64) -> C2x2 {
    let (c, s) = ((2.0 * z).cos(), (2.0 * z).sin());
    let h = 0.5;
    Matrix2::new(
        Complex64::new(h, 0.0),
        Complex64::new(h * c, h * s),
        Complex64::new(h * c, -h * s),
        Complex64::new(h, 0.0),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::block::{assemble_block, block_spectrum};

    #[test]
    fn projector_at_origin() {
        let (p1, p2) = splitting_projectors(&ContactTorusGeometry::default(), 0.0);
        let want = Matrix2::new(
            Complex64::new(0.5, 0.0),
            Complex64::new(0.5, 0.0),
            Complex64::new(0.5, 0.0),
            Complex64::new(0.5, 0.0),
        );
        assert!((p1 - want).norm() < 1e-15);
        assert!(projector_residual(&p1, &p2) < 1e-14);
    }

    #[test]
    fn projectors_match_closed_form_and_have_unit_trace() {
        let g = ContactTorusGeometry::default();
        for i in 0..64 {
            let z = 0.1 * f64::from(i);
            let (p1, p2) = splitting_projectors(&g, z);
            assert!((p1 - projector_closed_form(z)).norm() < 1e-14);
            assert!((p1.trace().re - 1.0).abs() < 1e-14);
            assert!(projector_residual(&p1, &p2) < 1e-14);
        }
    }

    #[test]
    fn constant_mode_density() {
        let g = ContactTorusGeometry::default();
        let mut v = DVector::<Complex64>::zeros(2 * 5);
        v[fourier_index(2, 0, Spin::Up)] = Complex64::new(1.0, 0.0);
        let mode = WeightedMode { block: BlockId::new(0, 0), k_cut: 2, coeffs: v, amplitude: Complex64::new(1.0, 0.0) };
        let d = pointwise_density(&g, [0.3, 1.0, 2.0], &[mode]);
        assert!((d.psi2 - (2.0 * PI).powi(-3)).abs() < 1e-16);
        assert!(d.splitting_defect() < 1e-16);
    }

    #[test]
    fn empty_mode_set_is_zero() {
        let d = pointwise_density(&ContactTorusGeometry::default(), [0.0; 3], &[]);
        assert_eq!(d.psi2, 0.0);
    }

    #[test]
    fn image_of_p1_has_no_beta() {
        let g = ContactTorusGeometry::default();
        let z = 0.77;
        let (p1, _) = splitting_projectors(&g, z);
        let psi = p1 * nalgebra::Vector2::new(Complex64::new(0.3, -1.0), Complex64::new(2.0, 0.5));
        let d = split_density(&g, [0.0, 0.0, z], &psi);
        assert!(d.beta2 < 1e-16);
    }

    #[test]
    fn beta_ratio_matches_projected_integral() {
        let g = ContactTorusGeometry::default();
        let k_cut = 14;
        let block = assemble_block(&g, 2, 3, 10.0, k_cut).unwrap();
        let pairs = block_spectrum(&block).unwrap();
        let p = &pairs[pairs.len() / 2];
        let slope = crate::model::block::hf_slope(&block, &p.vector).unwrap();
        let nz = 256;
        let (mut a2, mut b2) = (0.0, 0.0);
        for j in 0..nz {
            let z = 2.0 * PI * j as f64 / nz as f64;
            let mode =
                WeightedMode { block: block.id, k_cut, coeffs: p.vector.clone(), amplitude: Complex64::new(1.0, 0.0) };
            let d = pointwise_density(&g, [0.0, 0.0, z], &[mode]);
            a2 += d.alpha2;
            b2 += d.beta2;
        }
        let scale = (2.0 * PI).powi(3) / nz as f64;
        assert!((a2 * scale + b2 * scale - 1.0).abs() < 1e-10);
        assert!((b2 / a2 - beta_ratio_from_slope(slope)).abs() < 1e-10);
    }
}
