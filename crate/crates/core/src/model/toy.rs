use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::chain::SymTridiag;

/// One diagonal entry `sign · (r − r₀)` of a toy family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToyCrossing {
    pub r0: f64,
    pub upward: bool,
}

/// `H(r) = diag(±(r − r₀ᵢ))` with a symmetric `ε` between entries 1 and 2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToyCrossingFamily {
    pub crossings: Vec<ToyCrossing>,
    pub epsilon: f64,
}

impl ToyCrossingFamily {
    pub fn upward(r0s: &[f64]) -> Self {
        ToyCrossingFamily { crossings: r0s.iter().map(|&r0| ToyCrossing { r0, upward: true }).collect(), epsilon: 0.0 }
    }

    pub fn downward(r0s: &[f64]) -> Self {
        ToyCrossingFamily { crossings: r0s.iter().map(|&r0| ToyCrossing { r0, upward: false }).collect(), epsilon: 0.0 }
    }

    /// `[[r − r₀, ε], [ε, −(r − r₀)]]`: eigenvalues `±√((r−r₀)² + ε²)`.
    pub fn avoided(r0: f64, epsilon: f64) -> Self {
        ToyCrossingFamily {
            crossings: vec![ToyCrossing { r0, upward: true }, ToyCrossing { r0, upward: false }],
            epsilon,
        }
    }

    pub fn dim(&self) -> usize {
        self.crossings.len()
    }

    pub fn tridiagonal(&self, r: f64) -> SymTridiag {
        let diag = self.crossings.iter().map(|c| if c.upward { r - c.r0 } else { c.r0 - r }).collect();
        let mut off = vec![0.0; self.dim().saturating_sub(1)];
        if let Some(e) = off.first_mut() {
            *e = self.epsilon;
        }
        SymTridiag::new(diag, off)
    }

    pub fn derivative(&self) -> SymTridiag {
        let diag = self.crossings.iter().map(|c| if c.upward { 1.0 } else { -1.0 }).collect();
        SymTridiag::new(diag, vec![0.0; self.dim().saturating_sub(1)])
    }

    /// Closed-form flow over `[a, b)` when `ε = 0`, counting an entry that is
    /// nonpositive at `a` and positive at `b` (or the reverse, negatively).
    pub fn exact_flow(&self, a: f64, b: f64) -> Option<i64> {
        if self.epsilon != 0.0 {
            return None;
        }
        Some(
            self.crossings
                .iter()
                .map(|c| {
                    let at = |r: f64| if c.upward { r - c.r0 } else { c.r0 - r };
                    i64::from(at(a) <= 0.0) - i64::from(at(b) <= 0.0)
                })
                .sum(),
        )
    }
}

pub fn toy_family(fam: &ToyCrossingFamily, r: f64) -> DMatrix<Complex64> {
    fam.tridiagonal(r).to_dense().map(|x| Complex64::new(x, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toy_matrices_are_hermitian() {
        let fam = ToyCrossingFamily { epsilon: 0.3, ..ToyCrossingFamily::upward(&[1.0, 2.0, 4.0]) };
        for r in [0.0, 1.5, 3.7] {
            let h = toy_family(&fam, r);
            assert_eq!(h, h.adjoint());
        }
    }

    #[test]
    fn closed_form_flows() {
        assert_eq!(ToyCrossingFamily::upward(&[1.0, 3.0]).exact_flow(0.0, 2.0), Some(1));
        assert_eq!(ToyCrossingFamily::upward(&[1.0, 1.0]).exact_flow(0.0, 2.0), Some(2));
        assert_eq!(ToyCrossingFamily::downward(&[1.0]).exact_flow(0.0, 2.0), Some(-1));
        assert_eq!(ToyCrossingFamily::avoided(1.0, 0.1).exact_flow(0.0, 2.0), None);
    }

    #[test]
    fn avoided_crossing_gap() {
        let fam = ToyCrossingFamily::avoided(1.0, 0.1);
        for i in 0..=40 {
            let r = 0.05 * f64::from(i);
            let vals = fam.tridiagonal(r).all_eigenvalues();
            let want = ((r - 1.0).powi(2) + 0.01).sqrt();
            assert!((vals[1] - want).abs() < 1e-13 && (vals[0] + want).abs() < 1e-13);
        }
    }
}
