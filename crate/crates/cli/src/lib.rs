//! Experiment harness for `hivelab`: seeded runs of the sampling, tension,
//! variational and decomposition pipelines, written as CSV, JSON and SVG
//! with a hashed manifest.

pub mod check;
pub mod commands;
pub mod config;
pub mod output;

use std::path::Path;
use std::time::Instant;

use serde_json::{json, Value};
use thiserror::Error;

pub use config::{Overrides, RunConfig};
use output::{csv_text, OutDir};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error(transparent)]
    Library(#[from] hivelab::HiveError),
    #[error("check failed: {0}")]
    Violation(String),
}

impl CliError {
    /// Process exit code: 2 for configuration problems, 3 for numerical or
    /// validation failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Library(e) if e.is_config() => 2,
            CliError::Library(_) | CliError::Violation(_) => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    SampleHive,
    Tension,
    Solve,
    Czd,
    Check,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::SampleHive => "sample-hive",
            Command::Tension => "tension",
            Command::Solve => "solve",
            Command::Czd => "czd",
            Command::Check => "check",
        }
    }
}

/// Run one command in a pool of `cfg.threads` workers and write its manifest.
/// Returns the manifest.
pub fn run(cmd: Command, cfg: &RunConfig) -> Result<Value, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    let threads = pool.current_num_threads();
    let start = Instant::now();
    let mut out = OutDir::create(Path::new(&cfg.out))?;
    let mut echo = serde_json::to_value(cfg).map_err(|e| CliError::Io(e.to_string()))?;
    // neither changes any output
    if let Some(o) = echo.as_object_mut() {
        o.remove("threads");
        o.remove("out");
    }
    let summary = pool.install(|| -> Result<Value, CliError> {
        match cmd {
            Command::SampleHive => commands::sample_hive(cfg, &mut out),
            Command::Tension => commands::tension(cfg, &mut out),
            Command::Solve => commands::solve(cfg, &mut out),
            Command::Czd => commands::czd(cfg, &mut out),
            Command::Check => run_check(cfg, &mut out),
        }
    });
    let failed = match &summary {
        Err(CliError::Violation(msg)) => Some(msg.clone()),
        Err(_) => return summary,
        Ok(_) => None,
    };
    let summary = summary.unwrap_or_else(|_| json!({ "failed": failed }));
    let manifest = out.finish(cmd.name(), &echo, summary, start.elapsed().as_secs_f64(), threads)?;
    match failed {
        Some(msg) => Err(CliError::Violation(msg)),
        None => Ok(manifest),
    }
}

fn run_check(cfg: &RunConfig, out: &mut OutDir) -> Result<Value, CliError> {
    let rows = check::run(cfg);
    let text = csv_text(
        &["check", "cases", "failures", "worst", "passed"],
        rows.iter().map(|r| {
            vec![r.name.to_string(), r.cases.to_string(), r.failures.to_string(), format!("{}", r.worst), r.passed().to_string()]
        }),
    )?;
    out.write("check.csv", &text)?;
    out.write_json("check.json", &rows)?;
    let failed: Vec<&str> = rows.iter().filter(|r| !r.passed()).map(|r| r.name).collect();
    if failed.is_empty() {
        Ok(json!({ "checks": rows.len(), "failed": [] }))
    } else {
        Err(CliError::Violation(format!("failing checks: {}", failed.join(", "))))
    }
}
