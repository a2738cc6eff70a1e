use nalgebra::Matrix2;
use num_complex::Complex64;

pub type C2x2 = Matrix2<Complex64>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn pauli() -> [C2x2; 3] {
    let z = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    [Matrix2::new(z, one, one, z), Matrix2::new(z, -i, i, z), Matrix2::new(one, z, z, -one)]
}

/// Clifford multiplication by an orthonormal frame, realized as `cl(e_j) = iσ_j`.
///
/// With this choice `cl(e₁)cl(e₂) = −cl(e₃)`.
#[derive(Debug, Clone)]
pub struct CliffordFrame {
    pub generators: [C2x2; 3],
}

impl Default for CliffordFrame {
    fn default() -> Self {
        let i = c(0.0, 1.0);
        let s = pauli();
        CliffordFrame { generators: [s[0] * i, s[1] * i, s[2] * i] }
    }
}

impl CliffordFrame {
    /// Clifford action of the tangent vector `u = Σ u_j e_j`.
    pub fn cl(&self, u: [f64; 3]) -> C2x2 {
        self.generators[0] * c(u[0], 0.0) + self.generators[1] * c(u[1], 0.0) + self.generators[2] * c(u[2], 0.0)
    }

    /// Largest violation over skew-Hermiticity, `cl(e)² = −1`,
    /// anticommutation and the orientation rule.
    pub fn invariant_residual(&self) -> f64 {
        let id = C2x2::identity();
        let g = &self.generators;
        let mut worst: f64 = 0.0;
        for a in g {
            worst = worst.max((a + a.adjoint()).norm());
            worst = worst.max((a * a + id).norm());
        }
        for i in 0..3 {
            for j in (i + 1)..3 {
                worst = worst.max((g[i] * g[j] + g[j] * g[i]).norm());
            }
        }
        worst.max((g[0] * g[1] + g[2]).norm())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_satisfies_clifford_relations_exactly() {
        let frame = CliffordFrame::default();
        assert_eq!(frame.invariant_residual(), 0.0);
    }

    #[test]
    fn unit_vectors_square_to_minus_one() {
        let frame = CliffordFrame::default();
        let u = [0.6, -0.8, 0.0];
        let m = frame.cl(u);
        assert!((m * m + C2x2::identity()).norm() < 1e-15);
    }
}
