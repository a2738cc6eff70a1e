use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sflow_core::Execution;
use sflow_lab::cache::Cache;
use sflow_lab::config::{Config, Experiment};
use sflow_lab::runner::{execute, DEFAULT_CACHE_DIR, DEFAULT_OUT_DIR};
use sflow_lab::LabError;

/// Spectral flow experiments on the contact torus.
#[derive(Debug, Parser)]
#[command(name = "sflow", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON experiment configuration; every field is optional.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Result cache directory (overrides SFLOW_CACHE_DIR and the config).
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    /// Output directory (overrides SFLOW_OUT_DIR and the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; 1 runs sequentially, 0 uses every core.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Neither read nor write the cache.
    #[arg(long, global = true)]
    no_cache: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Eigenvalues in a window at each r.
    Spectrum,
    /// Spectral flow over [r.start, r.end) by counting and by tracking.
    Flow,
    /// Displacement integrands and totals at r̄ = r.end.
    Displacement,
    /// Heat-trace samples against the leading term.
    Heat,
    /// Flow, displacement and residuals over a range of r̄.
    Sweep,
    /// Invariant checks; writes a JSON report and fails on any failure.
    Verify,
}

impl Command {
    fn experiment(&self) -> Experiment {
        match self {
            Command::Spectrum => Experiment::Spectrum,
            Command::Flow => Experiment::Flow,
            Command::Displacement => Experiment::Displacement,
            Command::Heat => Experiment::Heat,
            Command::Sweep => Experiment::Sweep,
            Command::Verify => Experiment::Verify,
        }
    }
}

/// Flag, then environment variable, then config file, then default.
fn resolve(flag: Option<PathBuf>, env: &str, config: &Option<PathBuf>, default: &str) -> PathBuf {
    flag.or_else(|| std::env::var_os(env).filter(|v| !v.is_empty()).map(PathBuf::from))
        .or_else(|| config.clone())
        .unwrap_or_else(|| PathBuf::from(default))
}

fn execution(workers: Option<usize>) -> Result<Execution, LabError> {
    match workers {
        Some(1) => Ok(Execution::Sequential),
        #[cfg(feature = "parallel")]
        Some(n) if n > 1 => {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| LabError::Resource(format!("thread pool: {e}")))?;
            Ok(Execution::Parallel)
        }
        _ => Ok(Execution::Parallel),
    }
}

fn run(cli: Cli) -> Result<bool, LabError> {
    let exp = cli.command.experiment();
    let config = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    let out = resolve(cli.out, "SFLOW_OUT_DIR", &config.out_dir, DEFAULT_OUT_DIR);
    let cache = if cli.no_cache {
        Cache::disabled()
    } else {
        Cache::new(resolve(cli.cache_dir, "SFLOW_CACHE_DIR", &config.cache_dir, DEFAULT_CACHE_DIR))
    };
    let exec = execution(cli.workers.or(config.workers))?;
    let report = execute(exp, &config, &cache, &out, exec)?;
    let stats = cache.stats();
    log::info!("cache: {} hits, {} misses, {} corrupt", stats.hits, stats.misses, stats.corrupt);
    println!("{}", serde_json::to_string_pretty(&report.summary).expect("summary serializes"));
    for f in &report.files {
        println!("wrote {}", f.display());
    }
    match report.failure {
        Some(e) => Err(e),
        None => Ok(true),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
