//! Runs one experiment and writes `<out>/<experiment>.{csv,json,svg}`.

use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};
use sflow_core::Execution;
use sha2::{Digest, Sha256};

use crate::cache::{Cache, CACHE_VERSION};
use crate::config::{Config, Experiment};
use crate::experiments::{self, Context};
use crate::output;
use crate::LabError;

pub const DEFAULT_CACHE_DIR: &str = ".sflow-cache";
pub const DEFAULT_OUT_DIR: &str = "sflow-out";

#[derive(Debug)]
pub struct RunReport {
    pub files: Vec<PathBuf>,
    pub summary: Value,
    /// Set when an invariant failed; the outputs are still written.
    pub failure: Option<LabError>,
}

fn metadata(exp: Experiment, config: &Config) -> Map<String, Value> {
    let canonical = config.canonical(exp);
    let hash = hex::encode(Sha256::digest(canonical.to_string().as_bytes()));
    let doc = json!({
        "experiment": exp.name(),
        "version": env!("CARGO_PKG_VERSION"),
        "cache_version": CACHE_VERSION,
        "config_hash": hash,
        "config": canonical,
    });
    match doc {
        Value::Object(m) => m,
        _ => unreachable!(),
    }
}

pub fn execute(
    exp: Experiment,
    config: &Config,
    cache: &Cache,
    out_dir: &Path,
    exec: Execution,
) -> Result<RunReport, LabError> {
    config.validate(exp)?;
    let ctx = Context { config, geom: config.geometry()?, cache, exec };
    let outcome = experiments::run(exp, &ctx)?;
    let base = out_dir.join(exp.name());
    let mut files = Vec::new();
    let mut emit = |ext: &str, text: String| -> Result<(), LabError> {
        let path = base.with_extension(ext);
        output::write(&path, &text)?;
        files.push(path);
        Ok(())
    };
    emit("csv", output::to_csv(&outcome.table))?;
    emit("json", output::to_json(metadata(exp, config), outcome.summary.clone(), &outcome.table))?;
    if let Some(plot) = &outcome.plot {
        emit("svg", output::to_svg(plot, &outcome.table))?;
    }
    Ok(RunReport { files, summary: outcome.summary, failure: outcome.failure })
}
