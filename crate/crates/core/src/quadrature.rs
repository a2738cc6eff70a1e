//! One-dimensional quadrature: adaptive Gauss–Kronrod and composite trapezoid.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadratureError {
    #[error("interval [{a}, {b}] is not finite")]
    BadInterval { a: f64, b: f64 },
    #[error("tolerance not reached: estimate {estimate:e} above {tol:e} after {evaluations} evaluations")]
    NotConverged { estimate: f64, tol: f64, evaluations: usize },
    #[error("integrand returned a non-finite value at x = {x}")]
    NonFinite { x: f64 },
    #[error("need at least two strictly increasing abscissae")]
    BadGrid,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728,
];
// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5, 7).
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

/// One G7/K15 panel: (Kronrod value, |K15 − G7|).
pub fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Result<(f64, f64), QuadratureError> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let eval = |f: &mut F, x: f64| {
        let y = f(x);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(QuadratureError::NonFinite { x })
        }
    };
    let fc = eval(f, c)?;
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = eval(f, c - dx)? + eval(f, c + dx)?;
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    Ok((k * h, ((k - g) * h).abs()))
}

/// Adaptive bisection on G7/K15 panels until the summed error estimate is
/// below `abs_tol`.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, abs_tol: f64) -> Result<Estimate, QuadratureError> {
    integrate_with(&mut f, a, b, abs_tol, 2000)
}

pub fn integrate_with<F: FnMut(f64) -> f64>(
    f: &mut F,
    a: f64,
    b: f64,
    abs_tol: f64,
    max_panels: usize,
) -> Result<Estimate, QuadratureError> {
    if !a.is_finite() || !b.is_finite() {
        return Err(QuadratureError::BadInterval { a, b });
    }
    if a == b {
        return Ok(Estimate { value: 0.0, error: 0.0, evaluations: 0 });
    }
    let (v, e) = gk15(f, a, b)?;
    let mut panels = vec![(a, b, v, e)];
    let mut evaluations = 15;
    loop {
        let err: f64 = panels.iter().map(|p| p.3).sum();
        if err <= abs_tol || panels.len() >= max_panels {
            // Sum left to right so the result does not depend on split order.
            panels.sort_by(|p, q| p.0.total_cmp(&q.0));
            let value = panels.iter().map(|p| p.2).sum();
            if err > abs_tol {
                return Err(QuadratureError::NotConverged { estimate: err, tol: abs_tol, evaluations });
            }
            return Ok(Estimate { value, error: err, evaluations });
        }
        let worst = panels.iter().enumerate().max_by(|x, y| x.1 .3.total_cmp(&y.1 .3)).map(|(i, _)| i).unwrap_or(0);
        let (pa, pb, _, _) = panels.swap_remove(worst);
        let mid = 0.5 * (pa + pb);
        let (v1, e1) = gk15(f, pa, mid)?;
        let (v2, e2) = gk15(f, mid, pb)?;
        evaluations += 30;
        panels.push((pa, mid, v1, e1));
        panels.push((mid, pb, v2, e2));
    }
}

/// Integral over the whole line of a rapidly decaying integrand, split at
/// `center ± k·scale` for k up to `reach`.
pub fn integrate_line<F: FnMut(f64) -> f64>(
    mut f: F,
    center: f64,
    scale: f64,
    reach: usize,
    abs_tol: f64,
) -> Result<Estimate, QuadratureError> {
    let n = 2 * reach;
    let mut total = Estimate { value: 0.0, error: 0.0, evaluations: 0 };
    for i in 0..n {
        let a = center + scale * (i as f64 - reach as f64);
        let b = a + scale;
        let e = integrate_with(&mut f, a, b, abs_tol / n as f64, 2000)?;
        total.value += e.value;
        total.error += e.error;
        total.evaluations += e.evaluations;
    }
    Ok(total)
}

/// Composite trapezoid on the given abscissae with a Richardson error
/// estimate from the rule on every other point.
pub fn trapezoid_richardson(x: &[f64], y: &[f64]) -> Result<Estimate, QuadratureError> {
    if x.len() != y.len() || x.len() < 2 || x.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(QuadratureError::BadGrid);
    }
    let fine = trapezoid(x, y);
    if x.len() < 3 {
        return Ok(Estimate { value: fine, error: fine.abs(), evaluations: x.len() });
    }
    let mut idx: Vec<usize> = (0..x.len()).step_by(2).collect();
    if *idx.last().unwrap() != x.len() - 1 {
        idx.push(x.len() - 1);
    }
    let xc: Vec<f64> = idx.iter().map(|&i| x[i]).collect();
    let yc: Vec<f64> = idx.iter().map(|&i| y[i]).collect();
    let coarse = trapezoid(&xc, &yc);
    Ok(Estimate { value: fine, error: (fine - coarse).abs() / 3.0, evaluations: x.len() })
}

pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2).zip(y.windows(2)).map(|(xw, yw)| 0.5 * (xw[1] - xw[0]) * (yw[0] + yw[1])).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn kronrod_is_exact_on_polynomials() {
        let (v, _) = gk15(&mut |x: f64| x.powi(20) - 3.0 * x.powi(7), -1.0, 1.0).unwrap();
        assert!((v - 2.0 / 21.0).abs() < 1e-15);
    }

    #[test]
    fn adaptive_gaussian() {
        let e = integrate_line(|x| (-x * x).exp(), 0.0, 1.0, 8, 1e-12).unwrap();
        assert!((e.value - PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn adaptive_handles_kink() {
        let e = integrate(|x: f64| x.abs().sqrt(), -1.0, 1.0, 1e-10).unwrap();
        assert!((e.value - 4.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn non_finite_is_reported() {
        assert!(matches!(integrate(|x: f64| 1.0 / x, -1.0, 1.0, 1e-8), Err(QuadratureError::NonFinite { .. })));
    }

    #[test]
    fn trapezoid_error_estimate_tracks_truth() {
        let x: Vec<f64> = (0..=40).map(|i| i as f64 / 40.0 * PI).collect();
        let y: Vec<f64> = x.iter().map(|t| t.sin()).collect();
        let e = trapezoid_richardson(&x, &y).unwrap();
        let err = (e.value - 2.0).abs();
        assert!(err < 2.0 * e.error && e.error < 2.0 * err);
    }
}
