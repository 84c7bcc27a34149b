//! Command-line driver: configuration, command execution and output files.

pub mod config;
pub mod output;
pub mod plots;
pub mod presets;
pub mod run;

use std::path::{Path, PathBuf};

use anyhow::Result;

pub use config::{parse_config, RunConfig};
pub use output::Artifacts;

/// Environment variable overriding the configured worker count. It changes
/// only scheduling, never the outputs, so it is not recorded in the manifest.
pub const WORKERS_ENV: &str = "ESQPT_WORKERS";

pub fn worker_count(cfg: &RunConfig) -> usize {
    std::env::var(WORKERS_ENV).ok().and_then(|v| v.trim().parse().ok()).unwrap_or(cfg.workers)
}

/// Runs `cfg` and writes its files plus `manifest.txt` into `dir`.
pub fn run_to(cfg: &RunConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    let art = run::execute_with_workers(cfg, worker_count(cfg))?;
    art.write(dir, &cfg.serialize())
}

/// Runs `cfg` into its configured output directory.
pub fn run(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    run_to(cfg, &cfg.output_dir)
}
