//! Exact matrix-level checks of the Weitzenböck and commutator identities.
//!
//! All first-order operators raise the Fourier range by two, so they are
//! built as rectangular maps `|k| ≤ K → |k| ≤ K+2` and composed without any
//! truncation error.

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;

use super::block::{assemble_block, fourier_index, Spin};
use super::geometry::ContactTorusGeometry;
use super::ModelError;

type Op = DMatrix<Complex64>;

fn dim(k: usize) -> usize {
    2 * (2 * k + 1)
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Multiplication by `Σ_p e^{ipz} M_p` from range `k_in` to `k_out`.
fn trig_mult(k_in: usize, k_out: usize, terms: &[(i64, Matrix2<Complex64>)]) -> Op {
    let mut op = Op::zeros(dim(k_out), dim(k_in));
    let (ki, ko) = (k_in as i64, k_out as i64);
    let spins = [Spin::Up, Spin::Down];
    for k in -ki..=ki {
        for (p, m) in terms {
            let kp = k + p;
            if kp.abs() > ko {
                continue;
            }
            for (a, sa) in spins.iter().enumerate() {
                for (b, sb) in spins.iter().enumerate() {
                    op[(fourier_index(k_out, kp, *sa), fourier_index(k_in, k, *sb))] += m[(a, b)];
                }
            }
        }
    }
    op
}

fn scalar(z: Complex64) -> Matrix2<Complex64> {
    Matrix2::identity() * z
}

/// Connection components of the spinor connection in one block.
struct Connection {
    m: f64,
    n: f64,
    r: f64,
    cz: f64,
}

impl Connection {
    /// `∇_x = i(m − (r/2) cos 2z)`.
    fn dx(&self, k_in: usize) -> Op {
        let q = scalar(c(0.0, -0.25 * self.r));
        trig_mult(k_in, k_in + 2, &[(0, scalar(c(0.0, self.m))), (2, q), (-2, q)])
    }

    /// `∇_y = i(n + (r/2) sin 2z)`.
    fn dy(&self, k_in: usize) -> Op {
        trig_mult(
            k_in,
            k_in + 2,
            &[(0, scalar(c(0.0, self.n))), (2, scalar(c(0.25 * self.r, 0.0))), (-2, scalar(c(-0.25 * self.r, 0.0)))],
        )
    }

    /// `∇_z = ∂_z + i c_z/2`.
    fn dz(&self, k_in: usize) -> Op {
        let mut op = Op::zeros(dim(k_in + 2), dim(k_in));
        let ki = k_in as i64;
        for k in -ki..=ki {
            let v = c(0.0, k as f64 + 0.5 * self.cz);
            for s in [Spin::Up, Spin::Down] {
                op[(fourier_index(k_in + 2, k, s), fourier_index(k_in, k, s))] = v;
            }
        }
        op
    }

    fn d(&self, j: usize, k_in: usize) -> Op {
        match j {
            0 => self.dx(k_in),
            1 => self.dy(k_in),
            _ => self.dz(k_in),
        }
    }

    /// Curvature `F_ij` as a multiplication operator: `F_zx = i r sin 2z`,
    /// `F_zy = i r cos 2z`.
    fn curvature(&self, i: usize, j: usize, k_in: usize) -> Op {
        let r = self.r;
        // i r sin 2z = (r/2)(e^{2iz} − e^{−2iz});  i r cos 2z = (ir/2)(e^{2iz} + e^{−2iz})
        let zx = [(2, scalar(c(0.5 * r, 0.0))), (-2, scalar(c(-0.5 * r, 0.0)))];
        let zy = [(2, scalar(c(0.0, 0.5 * r))), (-2, scalar(c(0.0, 0.5 * r)))];
        let (terms, sign): (&[(i64, Matrix2<Complex64>)], f64) = match (i, j) {
            (2, 0) => (&zx, 1.0),
            (0, 2) => (&zx, -1.0),
            (2, 1) => (&zy, 1.0),
            (1, 2) => (&zy, -1.0),
            _ => (&[], 0.0),
        };
        trig_mult(k_in, k_in + 2, terms) * c(sign, 0.0)
    }

    /// `∂_i F_ij`; only `∂_z` acts nontrivially.
    fn curvature_divergence(&self, i: usize, j: usize, k_in: usize) -> Op {
        let r = self.r;
        if i != 2 {
            return Op::zeros(dim(k_in + 2), dim(k_in));
        }
        // ∂_z(i r sin 2z) = 2ir cos 2z;  ∂_z(i r cos 2z) = −2ir sin 2z
        let terms: Vec<(i64, Matrix2<Complex64>)> = match j {
            0 => vec![(2, scalar(c(0.0, r))), (-2, scalar(c(0.0, r)))],
            1 => vec![(2, scalar(c(-r, 0.0))), (-2, scalar(c(r, 0.0)))],
            _ => Vec::new(),
        };
        trig_mult(k_in, k_in + 2, &terms)
    }
}

fn embed(k_in: usize, k_out: usize) -> Op {
    trig_mult(k_in, k_out, &[(0, Matrix2::identity())])
}

fn op_norm(m: &Op) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.max()
}

fn connection(geom: &ContactTorusGeometry, m: i32, n: i32, r: f64) -> Connection {
    Connection { m: f64::from(m), n: f64::from(n), r, cz: geom.cz() }
}

/// Exact `D²` from range `K` to `K+4`, built from the assembled blocks.
pub fn dirac_squared(geom: &ContactTorusGeometry, m: i32, n: i32, r: f64, k_cut: usize) -> Result<Op, ModelError> {
    let d2 = assemble_block(geom, m, n, r, k_cut + 2)?.matrix;
    let d4 = assemble_block(geom, m, n, r, k_cut + 4)?.matrix;
    Ok(d4 * embed(k_cut + 2, k_cut + 4) * d2 * embed(k_cut, k_cut + 2))
}

/// `∇*∇ + i r cl(a)` from range `K` to `K+4`, built from the connection.
pub fn rough_laplacian_side(geom: &ContactTorusGeometry, m: i32, n: i32, r: f64, k_cut: usize) -> Op {
    let conn = connection(geom, m, n, r);
    let mut lap = Op::zeros(dim(k_cut + 4), dim(k_cut));
    for j in 0..3 {
        lap -= conn.d(j, k_cut + 2) * conn.d(j, k_cut);
    }
    // i r cl(a) = −r (cos 2z σ₁ − sin 2z σ₂) = −r [[0, e^{2iz}], [e^{−2iz}, 0]]
    let z = c(0.0, 0.0);
    let up = Matrix2::new(z, c(-r, 0.0), z, z);
    let dn = Matrix2::new(z, z, c(-r, 0.0), z);
    let curv = trig_mult(k_cut, k_cut + 2, &[(2, up), (-2, dn)]);
    lap + embed(k_cut + 2, k_cut + 4) * curv
}

/// Relative operator-norm gap between `D²` and `∇*∇ + i r cl(a)`.
pub fn weitzenbock_residual(
    geom: &ContactTorusGeometry,
    m: i32,
    n: i32,
    r: f64,
    k_cut: usize,
) -> Result<f64, ModelError> {
    let lhs = dirac_squared(geom, m, n, r, k_cut)?;
    let rhs = rough_laplacian_side(geom, m, n, r, k_cut);
    Ok(op_norm(&(&lhs - &rhs)) / op_norm(&lhs).max(1.0))
}

/// Relative gap in `Σ_i (∇_j∇_i∇_i − ∇_i∇_i∇_j) = −Σ_i (2F_ij∇_i + ∂_iF_ij)`,
/// stacked over the three components `j`.
pub fn commutator_residual(
    geom: &ContactTorusGeometry,
    m: i32,
    n: i32,
    r: f64,
    k_cut: usize,
) -> Result<f64, ModelError> {
    if k_cut < 2 {
        return Err(ModelError::CutoffTooSmall(k_cut));
    }
    let conn = connection(geom, m, n, r);
    let k = k_cut;
    let lift = |from: usize, to: usize| embed(from, to);
    let mut lhs_rows = Vec::new();
    let mut rhs_rows = Vec::new();
    for j in 0..3 {
        let mut lhs = Op::zeros(dim(k + 6), dim(k));
        let mut rhs = Op::zeros(dim(k + 6), dim(k));
        for i in 0..3 {
            lhs += conn.d(j, k + 4) * conn.d(i, k + 2) * conn.d(i, k);
            lhs -= conn.d(i, k + 4) * conn.d(i, k + 2) * conn.d(j, k);
            let f_grad = conn.curvature(i, j, k + 2) * conn.d(i, k) * c(2.0, 0.0);
            let div = lift(k + 2, k + 4) * conn.curvature_divergence(i, j, k);
            rhs -= lift(k + 4, k + 6) * (f_grad + div);
        }
        lhs_rows.push(lhs);
        rhs_rows.push(rhs);
    }
    let stack = |rows: &[Op]| {
        let (h, w) = rows[0].shape();
        let mut out = Op::zeros(3 * h, w);
        for (b, row) in rows.iter().enumerate() {
            out.view_mut((b * h, 0), (h, w)).copy_from(row);
        }
        out
    };
    let lhs = stack(&lhs_rows);
    let rhs = stack(&rhs_rows);
    Ok(op_norm(&(&lhs - &rhs)) / op_norm(&lhs).max(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_square_is_mode_diagonal() {
        let g = ContactTorusGeometry::default();
        let (m, n, k) = (2, -1, 3usize);
        let sq = dirac_squared(&g, m, n, 0.0, k).unwrap();
        for kk in -(k as i64)..=(k as i64) {
            for s in [Spin::Up, Spin::Down] {
                let v = sq[(fourier_index(k + 4, kk, s), fourier_index(k, kk, s))];
                assert!((v.re - (5 + kk * kk) as f64).abs() < 1e-12);
            }
        }
        assert!(weitzenbock_residual(&g, m, n, 0.0, k).unwrap() == 0.0);
    }

    #[test]
    fn weitzenbock_holds_on_reference_blocks() {
        let g = ContactTorusGeometry::default();
        assert!(weitzenbock_residual(&g, 3, 1, 10.0, 8).unwrap() <= 1e-10);
        let tw = ContactTorusGeometry::with_cz(1.0);
        assert!(weitzenbock_residual(&tw, 3, 1, 10.0, 8).unwrap() <= 1e-10);
    }

    #[test]
    fn curvature_sign_matters() {
        let g = ContactTorusGeometry::default();
        let lhs = dirac_squared(&g, 1, 1, 6.0, 5).unwrap();
        let rhs = rough_laplacian_side(&g, 1, 1, 6.0, 5);
        let rhs_r_neg = rough_laplacian_side(&g, 1, 1, -6.0, 5);
        assert!(op_norm(&(&lhs - &rhs)) < 1e-9);
        assert!(op_norm(&(&lhs - &rhs_r_neg)) > 1.0);
    }

    #[test]
    fn commutator_identity_reference_blocks() {
        let g = ContactTorusGeometry::default();
        assert_eq!(commutator_residual(&g, 0, 0, 0.0, 4).unwrap(), 0.0);
        assert!(commutator_residual(&g, 2, 0, 5.0, 8).unwrap() <= 1e-8);
        assert!(commutator_residual(&g, 2, 0, 10.0, 8).unwrap() <= 1e-8);
    }
}
