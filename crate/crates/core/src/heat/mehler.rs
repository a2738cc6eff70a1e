//! Closed-form heat kernel of the quadratic model operator.

use std::f64::consts::PI;

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::HeatError;
use crate::model::{OMEGA_MAX, OMEGA_MIN};
use crate::quadrature;

/// A point `(x, y, z)` of the model chart, `ξ = x + iy`.
pub type Point = [f64; 3];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MehlerParams {
    pub r: f64,
    pub t: f64,
    pub omega: f64,
}

impl MehlerParams {
    /// `r = 0` is accepted and gives the flat kernel.
    pub fn new(r: f64, t: f64, omega: f64) -> Result<Self, HeatError> {
        let ok = r >= 0.0
            && r.is_finite()
            && t > 0.0
            && t.is_finite()
            && (OMEGA_MIN - 1e-15..=OMEGA_MAX + 1e-15).contains(&omega);
        if ok {
            Ok(Self { r, t, omega })
        } else {
            Err(HeatError::Params { r, t, omega })
        }
    }

    pub fn with_t(&self, t: f64) -> Result<Self, HeatError> {
        Self::new(self.r, t, self.omega)
    }

    /// Rescaled time `Ω⁻² t`.
    pub fn tau(&self) -> f64 {
        self.t / (self.omega * self.omega)
    }

    /// `Ω⁻² r t`
    pub fn x(&self) -> f64 {
        self.r * self.tau()
    }

    /// Coefficient `a` of `e^{−a|ξ₁−ξ₂|²}`: `(r/4) coth(Ω⁻² r t)`.
    pub fn xi_decay(&self) -> f64 {
        x_coth_x(self.x()) / (4.0 * self.tau())
    }

    /// Coefficient of `e^{−b (z₁−z₂)²}`: `Ω²/(4t)`.
    pub fn z_decay(&self) -> f64 {
        self.omega * self.omega / (4.0 * self.t)
    }
}

/// `ln(x / sinh x)` for `x ≥ 0`.
pub fn ln_x_over_sinh(x: f64) -> f64 {
    if x < 1e-4 {
        -x * x / 6.0
    } else if x > 20.0 {
        (2.0 * x).ln() - x - (-(-2.0 * x).exp()).ln_1p()
    } else {
        (x / x.sinh()).ln()
    }
}

/// `x coth x` for `x ≥ 0`.
pub fn x_coth_x(x: f64) -> f64 {
    if x < 1e-4 {
        1.0 + x * x / 3.0
    } else {
        x / x.tanh()
    }
}

/// `ln |z-factor|` with `(4π)^{−1/2} Ω t^{−1/2} e^{−Ω²Δz²/4t}`.
fn ln_z_factor(p: &MehlerParams, dz: f64) -> f64 {
    -0.5 * (4.0 * PI).ln() + p.omega.ln() - 0.5 * p.t.ln() - p.z_decay() * dz * dz
}

/// `ln |ξ-factor|` with `(4π)^{−1} r/sinh(x) e^{−(r/4)coth(x)|Δξ|²}`.
fn ln_xi_factor(p: &MehlerParams, d2: f64) -> f64 {
    -(4.0 * PI).ln() - p.tau().ln() + ln_x_over_sinh(p.x()) - p.xi_decay() * d2
}

/// Phase `−(r/4)(ξ̄₁ξ₂ − ξ₁ξ̄₂) = −(i r/2)(x₁y₂ − y₁x₂)`.
fn phase(p: &MehlerParams, a: Point, b: Point) -> f64 {
    -0.5 * p.r * (a[0] * b[1] - a[1] * b[0])
}

fn d2(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
}

/// `ln |κ_r(t; p₁, p₂)|`; finite for any `rt`.
pub fn ln_kappa_abs(p: &MehlerParams, a: Point, b: Point) -> f64 {
    ln_z_factor(p, a[2] - b[2]) + ln_xi_factor(p, d2(a, b))
}

pub fn kappa(p: &MehlerParams, a: Point, b: Point) -> Complex64 {
    Complex64::from_polar(ln_kappa_abs(p, a, b).exp(), phase(p, a, b))
}

/// `κ · diag(e^{Ω⁻²rt}, e^{−Ω⁻²rt})`, each entry formed in log space.
pub fn k_matrix(p: &MehlerParams, a: Point, b: Point) -> Matrix2<Complex64> {
    let l = ln_kappa_abs(p, a, b);
    let ph = phase(p, a, b);
    let x = p.x();
    let zero = Complex64::new(0.0, 0.0);
    Matrix2::new(Complex64::from_polar((l + x).exp(), ph), zero, zero, Complex64::from_polar((l - x).exp(), ph))
}

/// `(4π)^{−3/2} Ω t^{−1/2} r / sinh(Ω⁻² r t)`
pub fn coincident_closed_form(p: &MehlerParams) -> f64 {
    let lead = (4.0 * PI).powf(-1.5) * p.omega / p.t.sqrt();
    if p.r == 0.0 {
        lead / p.tau()
    } else {
        lead * p.r / p.x().sinh()
    }
}

/// `(4πt)^{−3/2} e^{−|p₁−p₂|²/4t}`
pub fn flat_kernel(t: f64, a: Point, b: Point) -> f64 {
    let d = (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2);
    (4.0 * PI * t).powf(-1.5) * (-d / (4.0 * t)).exp()
}

/// `|κ(p₁,p₂) − conj κ(p₂,p₁)|`
pub fn hermitian_defect(p: &MehlerParams, a: Point, b: Point) -> f64 {
    (kappa(p, a, b) - kappa(p, b, a).conj()).norm()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SemigroupCheck {
    pub composed: [f64; 2],
    pub direct: [f64; 2],
    pub abs_error: f64,
    pub rel_error: f64,
}

fn line(center: f64, scale: f64, tol: f64, f: impl FnMut(f64) -> f64) -> Result<f64, HeatError> {
    Ok(quadrature::integrate_line(f, center, scale, 8, tol)?.value)
}

/// `∫ K(t; p₁, y) K(s; y, p₂) dy` against `K(t+s; p₁, p₂)`, entry (1,1), by
/// nested adaptive quadrature of the `ξ`- and `z`-factors.
pub fn semigroup_check(p: &MehlerParams, s: f64, a: Point, b: Point, tol: f64) -> Result<SemigroupCheck, HeatError> {
    let q = p.with_t(s)?;
    let sum = p.with_t(p.t + s)?;
    let (at, as_) = (p.z_decay(), q.z_decay());
    let zc = (at * a[2] + as_ * b[2]) / (at + as_);
    let zs = 1.0 / (at + as_).sqrt();
    let zint = line(zc, zs, tol, |w| (ln_z_factor(p, a[2] - w) + ln_z_factor(&q, w - b[2])).exp())?;

    let (xt, xs) = (p.xi_decay(), q.xi_decay());
    let cx = [(xt * a[0] + xs * b[0]) / (xt + xs), (xt * a[1] + xs * b[1]) / (xt + xs)];
    let sc = 1.0 / (xt + xs).sqrt();
    let xi_part = |eta: Point| {
        let l = ln_xi_factor(p, d2(a, eta)) + ln_xi_factor(&q, d2(eta, b));
        Complex64::from_polar(l.exp(), phase(p, a, eta) + phase(&q, eta, b))
    };
    let inner = |y1: f64, part: fn(Complex64) -> f64| {
        line(cx[1], sc, tol * sc, |y2| part(xi_part([y1, y2, 0.0]))).unwrap_or(f64::NAN)
    };
    let re = line(cx[0], sc, tol, |y1| inner(y1, |c| c.re))?;
    let im = line(cx[0], sc, tol, |y1| inner(y1, |c| c.im))?;
    let e = (p.x() + q.x()).exp();
    let composed = Complex64::new(re, im) * zint * e;
    let direct = k_matrix(&sum, a, b)[(0, 0)];
    let abs_error = (composed - direct).norm();
    Ok(SemigroupCheck {
        composed: [composed.re, composed.im],
        direct: [direct.re, direct.im],
        abs_error,
        rel_error: abs_error / direct.norm(),
    })
}

/// `|Ω^{−3/2} ∫ K₁₁(t; 0, x) f(x) dx − Ω^{−3/2} f(0)|` by nested quadrature.
pub fn initial_condition_residual<F: Fn(Point) -> f64>(p: &MehlerParams, f: F, tol: f64) -> Result<f64, HeatError> {
    let o = [0.0; 3];
    let zs = 1.0 / p.z_decay().sqrt();
    let xs = 1.0 / p.xi_decay().sqrt();
    // Unit-scale variables keep the integrand O(1) at every nesting level.
    let jac = xs * xs * zs;
    let g = |u: Point| {
        let x = [u[0] * xs, u[1] * xs, u[2] * zs];
        jac * k_matrix(p, o, x)[(0, 0)].re * f(x)
    };
    let value = line(0.0, 1.0, tol, |a| {
        line(0.0, 1.0, tol, |b| line(0.0, 1.0, tol, |c| g([a, b, c])).unwrap_or(f64::NAN)).unwrap_or(f64::NAN)
    })?;
    let norm = p.omega.powf(-1.5);
    Ok((norm * value - norm * f(o)).abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct L2KernelCheck {
    pub value: f64,
    pub closed_form: f64,
    pub envelope: f64,
    pub constant: f64,
    pub ceiling: f64,
    pub pass: bool,
}

/// `∫|κ_r(t;0,x) e^{Ω⁻²rt}|² dx` by quadrature, against `c(r t^{−1/2} + t^{−3/2})`.
pub fn l2_kernel_bound_check(p: &MehlerParams, tol: f64) -> Result<L2KernelCheck, HeatError> {
    let zs = 1.0 / (2.0 * p.z_decay()).sqrt();
    let zint = line(0.0, zs, tol, |z| (2.0 * ln_z_factor(p, z)).exp())?;
    let rs = 1.0 / (2.0 * p.xi_decay()).sqrt();
    let x = p.x();
    let rad = quadrature::integrate(
        |rho| 2.0 * PI * rho * (2.0 * (ln_xi_factor(p, rho * rho) + x)).exp(),
        0.0,
        12.0 * rs,
        tol,
    )?
    .value;
    let value = zint * rad;
    let pref = (4.0 * PI).powi(-3) * p.omega * (2.0 * PI).sqrt() * 4.0 * PI / p.t.sqrt();
    // r e^{2x}/sinh 2x, written as r·2/(1 − e^{−4x})
    let closed_form = if x == 0.0 { pref / (2.0 * p.tau()) } else { pref * p.r * 2.0 / (-(-4.0 * x).exp_m1()) };
    let envelope = p.r / p.t.sqrt() + p.t.powf(-1.5);
    let constant = value / envelope;
    let ceiling = 2.0 * (4.0 * PI).powi(-2) * (2.0 * PI).sqrt() * p.omega * (1.0 + 1e-9);
    Ok(L2KernelCheck { value, closed_form, envelope, constant, ceiling, pass: constant <= ceiling })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(r: f64, t: f64) -> MehlerParams {
        MehlerParams::new(r, t, 1.0).unwrap()
    }

    #[test]
    fn coincident_value() {
        for (r, t, o) in [(5.0, 0.3, 1.0), (40.0, 0.02, 1.05), (0.0, 1.0, 0.95)] {
            let q = MehlerParams::new(r, t, o).unwrap();
            let a = [0.3, -0.7, 1.1];
            let k = kappa(&q, a, a);
            let c = coincident_closed_form(&q);
            assert!((k.re - c).abs() <= 1e-12 * c && k.im == 0.0);
        }
    }

    #[test]
    fn large_rt_stays_finite() {
        let q = p(1000.0, 2.0);
        let k = k_matrix(&q, [0.0; 3], [0.01, 0.0, 0.0]);
        assert!(k[(0, 0)].norm().is_finite() && k[(1, 1)].norm() == 0.0);
        let a = [0.1, 0.2, 0.3];
        let ratio = k_matrix(&p(2.0, 0.4), a, a);
        assert!((ratio[(0, 0)].re / ratio[(1, 1)].re - (2.0f64 * 0.8).exp()).abs() < 1e-12);
    }

    #[test]
    fn flat_limit() {
        let a = [0.2, -0.1, 0.5];
        let b = [-0.4, 0.3, 0.1];
        let f = flat_kernel(0.3, a, b);
        let k = k_matrix(&p(1e-9, 0.3), a, b);
        assert!((k[(0, 0)] - f).norm() < 1e-10 && (k[(1, 1)] - f).norm() < 1e-10);
    }

    #[test]
    fn hermitian_symmetry() {
        let q = p(7.0, 0.2);
        assert!(hermitian_defect(&q, [0.1, 0.5, 0.0], [-0.3, 0.2, 0.4]) < 1e-15);
    }

    #[test]
    fn l2_flat_closed_form() {
        let c = l2_kernel_bound_check(&p(0.0, 0.5), 1e-12).unwrap();
        assert!((c.value - (8.0 * PI * 0.5f64).powf(-1.5)).abs() < 1e-8);
        let c = l2_kernel_bound_check(&p(100.0, 0.1), 1e-12).unwrap();
        assert!(c.pass && (c.value - c.closed_form).abs() < 1e-8 * c.value);
    }
}
