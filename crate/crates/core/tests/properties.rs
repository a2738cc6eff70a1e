use approx::assert_relative_eq;
use proptest::prelude::*;

use sflow_core::displacement::{eta_dot, phi, psi, TimeProfile};
use sflow_core::heat::mehler::{ln_x_over_sinh, x_coth_x};
use sflow_core::heat::{k_matrix, kappa, MehlerParams};
use sflow_core::model::{SymTridiag, ToyCrossingFamily};
use sflow_core::quadrature::{integrate, trapezoid};
use sflow_core::spectral::{count_flow, track_flow, CountingBackend, TrackingOptions};
use sflow_core::Execution;

fn point() -> impl Strategy<Value = [f64; 3]> {
    [-2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn phi_is_odd_increasing_and_bounded(l in -20.0..20.0f64, d in 1e-3..2.0f64, t in 1e-3..5.0f64) {
        prop_assert_eq!(phi(-l, t), -phi(l, t));
        prop_assert!(phi(l + d, t) >= phi(l, t));
        // strict until erf saturates in double precision
        if (l + d).abs().max(l.abs()) * t.sqrt() < 4.0 {
            prop_assert!(phi(l + d, t) > phi(l, t));
        }
        prop_assert!(phi(l, t).abs() <= 0.5 * (std::f64::consts::PI / t).sqrt());
    }

    #[test]
    fn psi_maps_the_window_into_half_interval(r in 3.0..400.0f64, u in -1.0..1.0f64) {
        let p = TimeProfile::default();
        let l = u * p.window(r);
        let v = psi(l, r, &p).unwrap();
        prop_assert!(v.abs() <= 0.5 + 1e-15);
        prop_assert_eq!(psi(-l, r, &p).unwrap(), -v);
    }

    #[test]
    fn eta_dot_is_antisymmetric(vals in prop::collection::vec((-2.0..2.0f64, 1usize..4), 0..30), r in 20.0..200.0f64) {
        let p = TimeProfile::default();
        let flipped: Vec<_> = vals.iter().map(|&(l, m)| (-l, m)).collect();
        let a = eta_dot(&vals, r, &p).unwrap().value;
        prop_assert_eq!(eta_dot(&flipped, r, &p).unwrap().value, -a);
        let mirrored: Vec<_> = vals.iter().flat_map(|&(l, m)| [(l, m), (-l, m)]).collect();
        prop_assert_eq!(eta_dot(&mirrored, r, &p).unwrap().value, 0.0);
    }

    #[test]
    fn kappa_is_hermitian(r in 0.0..200.0f64, t in 1e-2..3.0f64, o in 0.9..1.11f64, a in point(), b in point()) {
        let p = MehlerParams::new(r, t, o.min(10.0 / 9.0)).unwrap();
        let (x, y) = (kappa(&p, a, b), kappa(&p, b, a).conj());
        prop_assert!((x - y).norm() <= 1e-14 * x.norm().max(1e-300));
        let k = k_matrix(&p, a, b);
        let (hi, lo) = (k[(0, 0)].norm(), k[(1, 1)].norm());
        if lo > 0.0 && hi.is_finite() {
            let want = 2.0 * p.x();
            prop_assert!((hi.ln() - lo.ln() - want).abs() <= 1e-10 * want.max(1.0));
        }
    }

    #[test]
    fn stable_special_functions(x in 0.0..700.0f64) {
        let l = ln_x_over_sinh(x);
        prop_assert!(l.is_finite() && l <= 0.0);
        prop_assert!(x_coth_x(x) >= 1.0);
        if (1e-3..50.0).contains(&x) {
            assert_relative_eq!(l, (x / x.sinh()).ln(), max_relative = 1e-12, epsilon = 1e-15);
        }
    }

    #[test]
    fn sturm_counts_match_dense_eigenvalues(
        diag in prop::collection::vec(-5.0..5.0f64, 2..25),
        seed_off in prop::collection::vec(-2.0..2.0f64, 24),
        x in -6.0..6.0f64,
    ) {
        let off = seed_off[..diag.len() - 1].to_vec();
        let t = SymTridiag::new(diag, off);
        let dense = t.to_dense().symmetric_eigenvalues();
        let below = dense.iter().filter(|&&v| v < x - 1e-9).count();
        let near = dense.iter().filter(|&&v| (v - x).abs() <= 1e-9).count();
        let c = t.count_below(x);
        prop_assert!(c >= below && c <= below + near);
    }

    #[test]
    fn toy_flows_match_closed_form(r0s in prop::collection::vec(0.05..1.95f64, 1..6), up in prop::collection::vec(any::<bool>(), 6)) {
        let mut fam = ToyCrossingFamily::upward(&r0s);
        for (c, &u) in fam.crossings.iter_mut().zip(&up) {
            c.upward = u;
        }
        let want = fam.exact_flow(0.0, 2.0).unwrap();
        prop_assert_eq!(count_flow(&fam, 0.0, 2.0, CountingBackend::Sturm, Execution::Sequential).unwrap().flow, want);
        prop_assert_eq!(track_flow(&fam, 0.0, 2.0, &TrackingOptions::default()).unwrap().flow, want);
    }

    #[test]
    fn quadratures_integrate_polynomials(c in prop::collection::vec(-3.0..3.0f64, 4), a in -2.0..0.0f64, w in 0.1..3.0f64) {
        let f = |x: f64| c[0] + c[1] * x + c[2] * x * x + c[3] * x * x * x;
        let anti = |x: f64| c[0] * x + c[1] * x * x / 2.0 + c[2] * x.powi(3) / 3.0 + c[3] * x.powi(4) / 4.0;
        let b = a + w;
        let exact = anti(b) - anti(a);
        prop_assert!((integrate(f, a, b, 1e-12).unwrap().value - exact).abs() < 1e-10);
        let xs: Vec<f64> = (0..=4).map(|i| a + w * i as f64 / 4.0).collect();
        let lin: Vec<f64> = xs.iter().map(|x| c[0] + c[1] * x).collect();
        prop_assert!((trapezoid(&xs, &lin) - (c[0] * w + c[1] * (b * b - a * a) / 2.0)).abs() < 1e-12);
    }
}
