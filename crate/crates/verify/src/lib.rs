//! Batch verification for `swlab`: configured suites of numerical checks, convergence
//! studies and byte-reproducible JSON reports.

pub mod checks;
pub mod config;
pub mod report;
pub mod study;

use std::time::Instant;

pub use config::{Suite, SuiteConfig};
pub use report::{Bound, CheckReport, Measured, Report};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("unknown suite '{0}'")]
    UnknownSuite(String),
    #[error("unknown check '{0}'")]
    UnknownCheck(String),
    #[error("study: {0}")]
    Study(String),
    #[error(transparent)]
    Core(#[from] swlab::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Runs the configured suites in order. Timings are recorded only when `timings` is set.
pub fn run_suite(config: &SuiteConfig, timings: bool) -> Result<Vec<CheckReport>> {
    let ctx = checks::Context::new(config)?;
    if let Some(name) = config.tolerances.keys().find(|n| checks::find(n).is_none()) {
        return Err(Error::UnknownCheck(name.clone()));
    }
    let mut out = Vec::new();
    for &suite in &config.suites {
        for spec in checks::CHECKS.iter().filter(|c| c.suite == suite) {
            let start = Instant::now();
            let measured = (spec.run)(&ctx)?;
            let bound = match config.tolerances.get(spec.name) {
                Some(&tol) => spec.bound.with_tolerance(tol),
                None => spec.bound,
            };
            let mut rep = CheckReport::new(spec.name, measured, bound);
            if timings {
                rep.runtime = Some(start.elapsed().as_secs_f64());
            }
            out.push(rep);
        }
    }
    Ok(out)
}
