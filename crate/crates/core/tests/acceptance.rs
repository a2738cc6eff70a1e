//! Runs the ten acceptance checks and prints one PASS/FAIL line each.
//!
//! Outcomes are compared with `tests/baseline/fitted_constants.json`: the set
//! of failing checks must equal the recorded known failures and no fitted
//! constant may grow. `SFLOW_UPDATE_BASELINE=1` rewrites the baseline from
//! the current run instead.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::ExitCode;

use sflow_core::checks::{run_checks, Plan, ALL_CHECKS};
use sflow_core::fit::{Baseline, BaselineOutcome};
use sflow_core::model::ContactTorusGeometry;
use sflow_core::Execution;

fn baseline_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/baseline/fitted_constants.json")
}

fn main() -> ExitCode {
    // Respect a name filter from `cargo test <filter>` so unrelated filtered runs stay fast.
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    if !filter.is_empty() && !filter.iter().any(|f| "acceptance".contains(f.as_str())) {
        return ExitCode::SUCCESS;
    }
    let reports = run_checks(&ALL_CHECKS, &ContactTorusGeometry::default(), &Plan::full(), Execution::Parallel);
    println!();
    for r in &reports {
        println!("{}", r.line());
    }
    let failing: BTreeSet<u8> = reports.iter().filter(|r| !r.pass).map(|r| r.id).collect();

    let path = baseline_path();
    if std::env::var("SFLOW_UPDATE_BASELINE").as_deref() == Ok("1") {
        let mut b = Baseline::new(1e-6);
        for (k, v) in reports.iter().flat_map(|r| &r.constants) {
            b.record(k, *v);
        }
        b.known_failures = failing;
        b.save(&path).expect("write baseline");
        println!("baseline written to {}", path.display());
        return ExitCode::SUCCESS;
    }

    let baseline = match Baseline::load(&path) {
        Ok(b) => b,
        Err(e) => {
            println!("cannot read baseline {}: {e}", path.display());
            return ExitCode::FAILURE;
        }
    };
    let mut ok = true;
    for (k, v) in reports.iter().flat_map(|r| &r.constants) {
        let outcome = baseline.check(k, *v);
        let recorded = baseline.constants.get(k).copied().unwrap_or(f64::NAN);
        println!("  constant {k} = {v:.6e} (baseline {recorded:.6e}): {outcome:?}");
        ok &= matches!(outcome, BaselineOutcome::Match | BaselineOutcome::Improved);
    }
    if failing != baseline.known_failures {
        println!("failing checks {failing:?} differ from recorded known failures {:?}", baseline.known_failures);
        ok = false;
    } else if !failing.is_empty() {
        println!("known failures recorded in the baseline: {failing:?}");
    }
    let passed = reports.len() - failing.len();
    println!("acceptance: {passed}/{} criteria pass", reports.len());
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
