//! The experiments behind each subcommand.

use std::f64::consts::PI;

use serde_json::{json, Value};
use sflow_core::checks::run_checks;
use sflow_core::displacement::{
    asymptotic_residuals, default_grid, displacement_from_configuration, eta_dot_spectrum, TimeProfile,
};
use sflow_core::heat::{heat_spectrum, l2_heat_bound_check, sample_trace, trace_leading_residual};
use sflow_core::model::{cutoff_for_window, ContactTorusGeometry};
use sflow_core::spectral::{
    build_configuration_scaled, spectral_flow_counting, spectral_flow_from_zero, spectral_flow_tracking,
    spectrum_in_window, window_half_width, CountingBackend, EigenConfiguration, RGrid, Spectrum, TrackingOptions,
    WindowOptions,
};
use sflow_core::Execution;

use crate::cache::Cache;
use crate::config::{Config, Experiment};
use crate::output::{json_number, Plot, Table};
use crate::LabError;

pub struct Context<'a> {
    pub config: &'a Config,
    pub geom: ContactTorusGeometry,
    pub cache: &'a Cache,
    pub exec: Execution,
}

/// Results of one run. `failure` is reported after the outputs are written.
pub struct Outcome {
    pub table: Table,
    pub summary: Value,
    pub plot: Option<Plot>,
    pub failure: Option<LabError>,
}

pub fn run(exp: Experiment, ctx: &Context) -> Result<Outcome, LabError> {
    match exp {
        Experiment::Spectrum => spectrum(ctx),
        Experiment::Flow => flow(ctx),
        Experiment::Displacement => displacement(ctx),
        Experiment::Heat => heat(ctx),
        Experiment::Sweep => sweep(ctx),
        Experiment::Verify => verify(ctx),
    }
}

fn geom_json(g: &ContactTorusGeometry) -> Value {
    json!({ "omega": g.omega(), "cz": g.cz() })
}

/// Window spectrum without eigenvectors, cached per `(geometry, r, Λ, K)`.
pub fn cached_spectrum(ctx: &Context, r: f64, window: f64) -> Result<Spectrum, LabError> {
    let k_cut = cutoff_for_window(r, window);
    let input = json!({ "geometry": geom_json(&ctx.geom), "r": r, "window": window, "k_cut": k_cut });
    let opts = WindowOptions {
        with_vectors: false,
        block_budget: ctx.config.tolerances.block_budget,
        k_cut: None,
        exec: ctx.exec,
    };
    ctx.cache.get_or_compute("spectrum", &input, || spectrum_in_window(&ctx.geom, r, window, &opts))
}

/// Configuration on the displacement grid of `r̄`, cached as a whole.
pub fn cached_configuration(ctx: &Context, r_bar: f64, profile: &TimeProfile) -> Result<EigenConfiguration, LabError> {
    let step = ctx.config.tolerances.displacement_step;
    let grid = default_grid(r_bar, profile, step);
    let k_cut = cutoff_for_window(r_bar, window_half_width(r_bar, profile.window_scale));
    let RGrid::Uniform { start, end, step } = grid else { unreachable!("default grid is uniform") };
    let input = json!({
        "geometry": geom_json(&ctx.geom),
        "r_bar": r_bar,
        "grid": { "start": start, "end": end, "step": step },
        "scale": profile.window_scale,
        "k_cut": k_cut,
    });
    ctx.cache.get_or_compute("configuration", &input, || {
        build_configuration_scaled(&ctx.geom, r_bar, &grid, profile.window_scale, ctx.exec)
    })
}

fn spectrum(ctx: &Context) -> Result<Outcome, LabError> {
    let mut table = Table::new(&["r", "lambda", "multiplicity", "norm2", "parity", "rank", "slope"]);
    let mut counts = Vec::new();
    for r in ctx.config.r.points() {
        let window = ctx.config.window.half_width(r);
        let spec = cached_spectrum(ctx, r, window)?;
        for e in &spec.entries {
            table.push(vec![
                r,
                e.lambda,
                e.multiplicity as f64,
                e.sector.norm2 as f64,
                e.sector.parity as f64,
                e.rank as f64,
                e.slope,
            ]);
        }
        counts.push(json!({ "r": r, "window": window, "k_cut": spec.k_cut, "eigenvalues": spec.total_count() }));
    }
    Ok(Outcome { table, summary: json!({ "spectra": counts }), plot: None, failure: None })
}

fn flow(ctx: &Context) -> Result<Outcome, LabError> {
    let pts = ctx.config.r.points();
    let (r0, r1) = (pts[0], pts[pts.len() - 1]);
    let tol = &ctx.config.tolerances;
    let counting = spectral_flow_counting(&ctx.geom, r0, r1, tol.flow_guard, CountingBackend::Sturm, ctx.exec)?;
    let opts = TrackingOptions { step: tol.tracking_step, exec: ctx.exec, ..TrackingOptions::default() };
    let tracking = spectral_flow_tracking(&ctx.geom, r0, r1, tol.flow_guard, &opts)?;
    let mut table = Table::new(&["r0", "r1", "flow_counting", "flow_tracking", "crossings", "unresolved"]);
    table.push(vec![
        r0,
        r1,
        counting.flow as f64,
        tracking.flow as f64,
        tracking.crossings.len() as f64,
        tracking.diagnostics.unresolved as f64,
    ]);
    let failure = (counting.flow != tracking.flow).then(|| {
        LabError::Invariant(format!(
            "flow over [{r0}, {r1}): counting gives {}, tracking gives {}",
            counting.flow, tracking.flow
        ))
    });
    let summary = json!({
        "r0": r0,
        "r1": r1,
        "flow": counting.flow,
        "methods_agree": failure.is_none(),
        "tracking_diagnostics": tracking.diagnostics,
    });
    Ok(Outcome { table, summary, plot: None, failure })
}

fn residual_summary(
    ctx: &Context,
    config: &EigenConfiguration,
    profile: &TimeProfile,
) -> Result<(Value, [f64; 11]), LabError> {
    let r_bar = config.r_bar;
    let disp = displacement_from_configuration(config, profile)?;
    let sf = spectral_flow_from_zero(&ctx.geom, r_bar, ctx.exec)? as f64;
    let spec = cached_spectrum(ctx, r_bar, profile.window(r_bar))?;
    let eta = eta_dot_spectrum(&spec, profile)?;
    let res = asymptotic_residuals(sf, disp.total, eta.value, &ctx.geom, r_bar);
    let row = [
        r_bar,
        sf,
        res.leading,
        eta.value,
        disp.total,
        disp.breve,
        disp.dot,
        disp.ddot,
        res.res1_norm,
        res.res2_norm,
        res.res3_norm,
    ];
    let summary = json!({
        "r_bar": r_bar,
        "sf": sf,
        "leading": json_number(res.leading),
        "eta_dot": json_number(eta.value),
        "displacement": {
            "total": json_number(disp.total),
            "breve": json_number(disp.breve),
            "dot": json_number(disp.dot),
            "ddot": json_number(disp.ddot),
            "error_estimate": json_number(disp.error_estimate),
            "coarse": disp.coarse,
            "grid_points": disp.grid_points,
        },
        "residuals": {
            "res1": json_number(res.res1),
            "res2": json_number(res.res2),
            "res3": json_number(res.res3),
            "res1_norm": json_number(res.res1_norm),
            "res2_norm": json_number(res.res2_norm),
            "res3_norm": json_number(res.res3_norm),
        },
    });
    Ok((summary, row))
}

fn displacement(ctx: &Context) -> Result<Outcome, LabError> {
    let profile = ctx.config.profile.to_profile();
    let pts = ctx.config.r.points();
    let r_bar = pts[pts.len() - 1];
    let config = cached_configuration(ctx, r_bar, &profile)?;
    let disp = displacement_from_configuration(&config, &profile)?;
    let mut table = Table::new(&["r", "breve", "dot", "ddot", "count"]);
    for s in &disp.samples {
        table.push(vec![s.r, s.breve, s.dot, s.ddot, s.count as f64]);
    }
    let (summary, _) = residual_summary(ctx, &config, &profile)?;
    let plot = Plot {
        title: format!("Displacement integrands up to r̄ = {r_bar}"),
        x: "r".into(),
        ys: vec!["breve".into(), "dot".into(), "ddot".into()],
        log_y: false,
    };
    Ok(Outcome { table, summary, plot: Some(plot), failure: None })
}

pub const SWEEP_COLUMNS: [&str; 11] = [
    "r_bar",
    "sf",
    "leading",
    "eta_dot",
    "disp_total",
    "disp_breve",
    "disp_dot",
    "disp_ddot",
    "res1_norm",
    "res2_norm",
    "res3_norm",
];

fn sweep(ctx: &Context) -> Result<Outcome, LabError> {
    let profile = ctx.config.profile.to_profile();
    let mut table = Table::new(&SWEEP_COLUMNS);
    for r_bar in ctx.config.r.points() {
        let config = cached_configuration(ctx, r_bar, &profile)?;
        let (_, row) = residual_summary(ctx, &config, &profile)?;
        table.push(row.to_vec());
    }
    let max = |c: &str| table.column(c).unwrap_or_default().into_iter().fold(f64::NAN, f64::max);
    let summary = json!({
        "points": table.rows.len(),
        "res1_norm_max": json_number(max("res1_norm")),
        "res2_norm_max": json_number(max("res2_norm")),
        "res3_norm_max": json_number(max("res3_norm")),
    });
    let plot = Plot {
        title: "Normalized residuals".into(),
        x: "r_bar".into(),
        ys: vec!["res1_norm".into(), "res2_norm".into(), "res3_norm".into()],
        log_y: true,
    };
    Ok(Outcome { table, summary, plot: Some(plot), failure: None })
}

fn heat(ctx: &Context) -> Result<Outcome, LabError> {
    let profile = ctx.config.profile.to_profile();
    let n = ctx.config.heat.points;
    let mut table = Table::new(&[
        "r",
        "t",
        "q_z",
        "value",
        "full",
        "leading",
        "relative",
        "normalized",
        "l2_constant",
        "tail_constant",
    ]);
    for r in ctx.config.r.points() {
        let t = profile.t(r);
        let spec = heat_spectrum(&ctx.geom, r, t, ctx.exec)?;
        for i in 0..n {
            let q = [0.0, 0.0, PI * i as f64 / n as f64];
            let s = sample_trace(&spec, q, t)?;
            let res = trace_leading_residual(s.full, r, t, ctx.geom.omega(), 1.0);
            let l2 = l2_heat_bound_check(&spec, q, t)?;
            table.push(vec![
                r,
                t,
                q[2],
                s.value,
                s.full,
                res.leading,
                res.relative,
                res.normalized,
                l2.constant,
                s.tail_constant(),
            ]);
        }
    }
    let max = |c: &str| table.column(c).unwrap_or_default().into_iter().fold(f64::NAN, f64::max);
    let summary = json!({
        "rows": table.rows.len(),
        "relative_max": json_number(max("relative")),
        "normalized_max": json_number(max("normalized")),
        "l2_constant_max": json_number(max("l2_constant")),
    });
    Ok(Outcome { table, summary, plot: None, failure: None })
}

fn verify(ctx: &Context) -> Result<Outcome, LabError> {
    let v = &ctx.config.verify;
    let reports = run_checks(&v.checks, &ctx.geom, &v.plan(), ctx.exec);
    let mut table = Table::new(&["id", "pass"]);
    let mut checks = Vec::new();
    for r in &reports {
        table.push(vec![r.id as f64, if r.pass { 1.0 } else { 0.0 }]);
        let constants: serde_json::Map<String, Value> =
            r.constants.iter().map(|(k, &x)| (k.clone(), json_number(x))).collect();
        checks
            .push(json!({ "id": r.id, "name": r.name, "pass": r.pass, "summary": r.summary, "constants": constants }));
        log::info!("{}", r.line());
    }
    let failed: Vec<u8> = reports.iter().filter(|r| !r.pass).map(|r| r.id).collect();
    let failure = (!failed.is_empty()).then(|| LabError::Invariant(format!("checks failed: {failed:?}")));
    let summary = json!({ "passed": reports.len() - failed.len(), "failed": failed, "checks": checks });
    Ok(Outcome { table, summary, plot: None, failure })
}
