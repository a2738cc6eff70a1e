//! The model operator `𝔏_r` on a uniform 3-D grid and the heat-equation
//! residual of the Mehler kernel.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::mehler::{k_matrix, MehlerParams, Point};
use super::HeatError;
use crate::exec::Execution;

/// Uniform grid `origin + (i h₀, j h₁, k h₂)`, `k` fastest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid3 {
    pub origin: Point,
    pub h: [f64; 3],
    pub n: [usize; 3],
}

/// Two-component field on a [`Grid3`].
pub type Field = Vec<[Complex64; 2]>;

impl Grid3 {
    /// `n` points per axis on the cube `center ± half`.
    pub fn cube(center: Point, half: [f64; 3], n: usize) -> Self {
        let h = half.map(|w| 2.0 * w / (n - 1) as f64);
        Self { origin: [center[0] - half[0], center[1] - half[1], center[2] - half[2]], h, n: [n; 3] }
    }

    pub fn len(&self) -> usize {
        self.n[0] * self.n[1] * self.n[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n[1] + j) * self.n[2] + k
    }

    pub fn point(&self, i: usize, j: usize, k: usize) -> Point {
        [
            self.origin[0] + i as f64 * self.h[0],
            self.origin[1] + j as f64 * self.h[1],
            self.origin[2] + k as f64 * self.h[2],
        ]
    }

    pub fn is_interior(&self, i: usize, j: usize, k: usize) -> bool {
        (1..self.n[0] - 1).contains(&i) && (1..self.n[1] - 1).contains(&j) && (1..self.n[2] - 1).contains(&k)
    }

    pub fn sample<F: Fn(Point) -> [Complex64; 2]>(&self, f: F) -> Field {
        let mut out = Vec::with_capacity(self.len());
        for i in 0..self.n[0] {
            for j in 0..self.n[1] {
                for k in 0..self.n[2] {
                    out.push(f(self.point(i, j, k)));
                }
            }
        }
        out
    }
}

/// Applies
/// `Ω⁻²[−∂_z² − 4∂_ξ∂_ξ̄ + r ξ̄∂_ξ̄ − r ξ∂_ξ + (r²/4)|ξ|² ∓ r]`
/// (upper sign on the first component) with second-order central
/// differences. Boundary points are set to zero.
pub fn model_l_apply(p: &MehlerParams, grid: &Grid3, f: &[[Complex64; 2]]) -> Result<Field, HeatError> {
    if f.len() != grid.len() || grid.n.iter().any(|&n| n < 3) {
        return Err(HeatError::Grid(format!("field of {} values on a {:?} grid", f.len(), grid.n)));
    }
    let zero = [Complex64::new(0.0, 0.0); 2];
    let mut out = vec![zero; f.len()];
    let [hx, hy, hz] = grid.h;
    let w = 1.0 / (p.omega * p.omega);
    let r = p.r;
    for i in 1..grid.n[0] - 1 {
        for j in 1..grid.n[1] - 1 {
            for k in 1..grid.n[2] - 1 {
                let at = |a: usize, b: usize, c: usize| &f[grid.index(a, b, c)];
                let [x, y, _] = grid.point(i, j, k);
                let c0 = at(i, j, k);
                let (xp, xm) = (at(i + 1, j, k), at(i - 1, j, k));
                let (yp, ym) = (at(i, j + 1, k), at(i, j - 1, k));
                let (zp, zm) = (at(i, j, k + 1), at(i, j, k - 1));
                let mut v = zero;
                for c in 0..2 {
                    let lap = (xp[c] - 2.0 * c0[c] + xm[c]) / (hx * hx)
                        + (yp[c] - 2.0 * c0[c] + ym[c]) / (hy * hy)
                        + (zp[c] - 2.0 * c0[c] + zm[c]) / (hz * hz);
                    let dx = (xp[c] - xm[c]) / (2.0 * hx);
                    let dy = (yp[c] - ym[c]) / (2.0 * hy);
                    // r(ξ̄∂_ξ̄ − ξ∂_ξ) = i r (x∂_y − y∂_x)
                    let rot = Complex64::new(0.0, r) * (x * dy - y * dx);
                    let shift = if c == 0 { -r } else { r };
                    v[c] = w * (-lap + rot + (0.25 * r * r * (x * x + y * y) + shift) * c0[c]);
                }
                out[grid.index(i, j, k)] = v;
            }
        }
    }
    Ok(out)
}

/// `|⟨𝔏f, g⟩ − ⟨f, 𝔏g⟩|` over the grid; fields must vanish on the boundary.
pub fn self_adjointness_residual(
    p: &MehlerParams,
    grid: &Grid3,
    f: &[[Complex64; 2]],
    g: &[[Complex64; 2]],
) -> Result<f64, HeatError> {
    let lf = model_l_apply(p, grid, f)?;
    let lg = model_l_apply(p, grid, g)?;
    let inner = |a: &[[Complex64; 2]], b: &[[Complex64; 2]]| -> Complex64 {
        a.iter().zip(b).map(|(u, v)| u[0].conj() * v[0] + u[1].conj() * v[1]).sum()
    };
    Ok((inner(&lf, g) - inner(f, &lg)).norm())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PdeResidual {
    pub n: usize,
    pub h: f64,
    /// `‖∂_t K + 𝔏K‖ / ‖∂_t K‖` over interior points.
    pub residual: f64,
}

/// Relative residual of `∂_t K + 𝔏_x K = 0` for `x ↦ K(t; x, source)` on a
/// cube of `n³` points spanning four decay lengths; `∂_t` by central
/// differences with a step proportional to the mesh width.
pub fn pde_residual(p: &MehlerParams, source: Point, n: usize, exec: Execution) -> Result<PdeResidual, HeatError> {
    if n < 5 {
        return Err(HeatError::Grid(format!("n = {n} too small")));
    }
    let sx = 4.0 / p.xi_decay().sqrt();
    let sz = 4.0 / p.z_decay().sqrt();
    let grid = Grid3::cube(source, [sx, sx, sz], n);
    let rel = 2.0 / (n - 1) as f64;
    let dt = 0.25 * p.t * rel;
    let (pp, pm) = (p.with_t(p.t + dt)?, p.with_t(p.t - dt)?);
    let column = |q: &MehlerParams, x: Point| {
        let k = k_matrix(q, x, source);
        [k[(0, 0)], k[(1, 1)]]
    };
    let field = grid.sample(|x| column(p, x));
    let lk = model_l_apply(p, &grid, &field)?;
    let rows = exec.map_range(grid.n[0], |i| {
        let (mut num, mut den) = (0.0, 0.0);
        for j in 0..grid.n[1] {
            for k in 0..grid.n[2] {
                if !grid.is_interior(i, j, k) {
                    continue;
                }
                let x = grid.point(i, j, k);
                let (a, b) = (column(&pp, x), column(&pm, x));
                let l = &lk[grid.index(i, j, k)];
                for c in 0..2 {
                    let kt = (a[c] - b[c]) / (2.0 * dt);
                    num += (kt + l[c]).norm_sqr();
                    den += kt.norm_sqr();
                }
            }
        }
        (num, den)
    });
    let (num, den) = rows.iter().fold((0.0, 0.0), |acc, v| (acc.0 + v.0, acc.1 + v.1));
    Ok(PdeResidual { n, h: grid.h[0], residual: (num / den).sqrt() })
}

/// Residuals on successively doubled grids and the observed orders
/// `log₂(res_k / res_{k+1})`.
pub fn pde_convergence(
    p: &MehlerParams,
    source: Point,
    n0: usize,
    levels: usize,
    exec: Execution,
) -> Result<(Vec<PdeResidual>, Vec<f64>), HeatError> {
    let mut res = Vec::with_capacity(levels);
    let mut n = n0;
    for _ in 0..levels {
        res.push(pde_residual(p, source, n, exec)?);
        n = 2 * (n - 1) + 1;
    }
    let orders = res.windows(2).map(|w| (w[0].residual / w[1].residual).log2()).collect();
    Ok((res, orders))
}
