use sflow_core::displacement::{default_grid, displacement, TimeProfile};
use sflow_core::heat::{heat_trace_window, initial_condition_residual, l2_kernel_bound_check, MehlerParams};
use sflow_core::model::ContactTorusGeometry;
use sflow_core::spectral::{
    build_configuration, count_in_interval, dim_v, integrated_bergman, spectral_flow_counting, spectrum_in_window,
    track_branches, CountingBackend, RGrid, WindowOptions,
};
use sflow_core::Execution;

#[test]
fn flow_is_additive_over_concatenated_intervals() {
    let g = ContactTorusGeometry::default();
    let f = |a, b| spectral_flow_counting(&g, a, b, 1.0, CountingBackend::Sturm, Execution::Parallel).unwrap().flow;
    assert_eq!(f(5.0, 12.5) + f(12.5, 21.0), f(5.0, 21.0));
    assert_eq!(f(7.0, 7.0), 0);
}

#[test]
fn execution_modes_give_identical_results() {
    let g = ContactTorusGeometry::default();
    let p = TimeProfile::default();
    let grid = default_grid(18.0, &p, 0.1);
    let a = displacement(&g, 18.0, &p, &grid, Execution::Sequential).unwrap();
    let b = displacement(&g, 18.0, &p, &grid, Execution::Parallel).unwrap();
    assert_eq!(a.total.to_bits(), b.total.to_bits());
    let s = spectrum_in_window(&g, 25.0, 2.0, &WindowOptions::default().exec(Execution::Sequential)).unwrap();
    let t = spectrum_in_window(&g, 25.0, 2.0, &WindowOptions::default().exec(Execution::Parallel)).unwrap();
    assert_eq!(s.values(), t.values());
}

#[test]
fn bergman_density_integrates_to_dimension() {
    let g = ContactTorusGeometry::default();
    let spec = spectrum_in_window(&g, 16.0, 1.5, &WindowOptions::default().with_vectors()).unwrap();
    let d = dim_v(&spec, 1.5).unwrap() as f64;
    let i = integrated_bergman(&spec, 1.5, 4 * spec.k_cut + 8).unwrap();
    assert!((i - d).abs() < 1e-8 * d, "{i} vs {d}");
}

#[test]
fn interval_counts_are_consistent_with_dim_v() {
    let g = ContactTorusGeometry::default();
    let spec = spectrum_in_window(&g, 0.0, 1.5, &WindowOptions::default()).unwrap();
    assert_eq!(count_in_interval(&spec, -1.0, 1.0).unwrap(), dim_v(&spec, 1.0).unwrap());
    let spec = spectrum_in_window(&g, 40.0, 3.0, &WindowOptions::default()).unwrap();
    let c = count_in_interval(&spec, 0.0, 1.0).unwrap();
    assert!(c > 0 && c as f64 <= 15.0 * 40.0);
}

#[test]
fn branches_reproduce_independent_window_solves() {
    let g = ContactTorusGeometry::default();
    let cfg = build_configuration(&g, 12.0, &RGrid::Uniform { start: 10.0, end: 12.0, step: 0.1 }, Execution::Parallel)
        .unwrap();
    let set = track_branches(&cfg).unwrap();
    for (gi, pt) in cfg.points.iter().enumerate().step_by(5) {
        let w = pt.r.sqrt() / 3.0;
        let direct =
            spectrum_in_window(&g, pt.r, w, &WindowOptions { k_cut: Some(cfg.k_cut + 10), ..Default::default() })
                .unwrap();
        let want: Vec<f64> = direct.values().into_iter().filter(|l| l.abs() < w).collect();
        let got = set.values_at(gi);
        assert_eq!(got.len(), want.len(), "r = {}", pt.r);
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }
}

#[test]
fn heat_trace_tends_to_the_kernel_density() {
    let g = ContactTorusGeometry::default();
    let spec = spectrum_in_window(&g, 0.0, 0.5, &WindowOptions::default().with_vectors()).unwrap();
    // Two constant zero modes, each contributing tr P₁ / 2 = 1/2 over the volume.
    let v = heat_trace_window(&spec, [0.4, 0.1, 2.0], 1e3, 0.5).unwrap();
    assert!((v - 1.0 / (2.0 * std::f64::consts::PI).powi(3)).abs() < 1e-14);
}

#[test]
fn kernel_l2_bound_holds_at_reference_point() {
    let c = l2_kernel_bound_check(&MehlerParams::new(100.0, 0.1, 1.0).unwrap(), 1e-12).unwrap();
    assert!(c.pass, "{c:?}");
    assert!((c.value - c.closed_form).abs() < 1e-8 * c.closed_form);
    let flat = l2_kernel_bound_check(&MehlerParams::new(0.0, 0.3, 1.0).unwrap(), 1e-12).unwrap();
    let want = (8.0 * std::f64::consts::PI * 0.3).powf(-1.5);
    assert!((flat.value - want).abs() < 1e-8 * want, "{} vs {want}", flat.value);
}

#[test]
fn initial_condition_residual_decreases() {
    let f = |x: [f64; 3]| (-(x[0] * x[0] + 2.0 * x[1] * x[1] + x[2] * x[2])).exp();
    let res: Vec<f64> = [1e-2, 1e-3]
        .iter()
        .map(|&t| initial_condition_residual(&MehlerParams::new(5.0, t, 1.0).unwrap(), f, 1e-11).unwrap())
        .collect();
    assert!(res[1] < res[0] / 5.0, "{res:?}");
    let zero = initial_condition_residual(&MehlerParams::new(5.0, 1e-2, 1.0).unwrap(), |_| 0.0, 1e-11).unwrap();
    assert_eq!(zero, 0.0);
    let flat = initial_condition_residual(&MehlerParams::new(0.0, 1e-4, 1.0).unwrap(), |_| 1.0, 1e-11).unwrap();
    assert!(flat <= 1e-6);
}
