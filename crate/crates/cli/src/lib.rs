//! Config-driven runner for the aniso-hardy verification suites.

pub mod config;
pub mod report;
pub mod suites;

use std::time::Instant;

pub use config::ExperimentConfig;
pub use report::{Bundle, CriterionOutcome, SuiteReport, Table};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid config at {pointer:?}: {message}")]
    ConfigInvalid { pointer: String, message: String },
    #[error("suites failed: criteria {criteria:?}")]
    SuiteFailed { criteria: Vec<u32> },
    #[error(transparent)]
    Core(#[from] aniso_hardy::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, CliError>;

/// Environment variable holding the worker count.
pub const THREADS_VAR: &str = "ANISO_HARDY_THREADS";

/// Sizes the global rayon pool from `ANISO_HARDY_THREADS` when set. Only
/// the first call in a process has an effect.
pub fn configure_threads() -> Result<Option<usize>> {
    let Ok(v) = std::env::var(THREADS_VAR) else { return Ok(None) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::ConfigInvalid { pointer: String::new(), message: format!("{THREADS_VAR}={v:?} is not a positive integer") })?;
    // a pool already built by an earlier call keeps its size
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(Some(n))
}

/// Runs one suite by name.
pub fn run_suite(name: &str, cfg: &ExperimentConfig) -> Result<SuiteReport> {
    let seed = cfg.suite_seed(name);
    let mut rep = match name {
        "geometry" => suites::geometry::run(cfg, seed)?,
        "weights" => suites::weights::run(cfg, seed)?,
        "frames" => suites::frames::run(cfg, seed)?,
        "area" => suites::area::run(cfg, seed)?,
        "decompose" => suites::decompose::run(cfg, seed)?,
        "journe" => suites::journe::run(cfg, seed)?,
        "operators" => suites::operators::run(cfg, seed)?,
        other => {
            return Err(CliError::ConfigInvalid { pointer: "/suites".into(), message: format!("unknown suite {other:?}") });
        }
    };
    rep.seed = seed;
    Ok(rep)
}

/// Runs the configured suites in the fixed suite order.
pub fn run(cfg: &ExperimentConfig) -> Result<Bundle> {
    cfg.validate()?;
    let mut bundle = Bundle::default();
    for name in config::SUITES.iter().filter(|s| cfg.suites.iter().any(|c| c == *s)) {
        let t0 = Instant::now();
        let rep = run_suite(name, cfg)?;
        bundle.seconds.push((name.to_string(), t0.elapsed().as_secs_f64()));
        bundle.suites.push(rep);
    }
    Ok(bundle)
}
