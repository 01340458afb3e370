//! Library side of the experiment runner: configuration schema, built-in
//! presets, the experiment implementations, and the run manifest. The binary
//! in `main.rs` is a thin shell over [`run_to_dir`].

pub mod config;
pub mod error;
pub mod experiments;
pub mod manifest;
pub mod plot;
pub mod presets;
pub mod report;

use std::path::Path;
use std::time::Instant;

pub use config::{ExperimentConfig, ExperimentSpec};
pub use error::CliError;
pub use report::{CheckLine, RunSummary};

/// Run an experiment into `out_dir`, write the manifest, and return the
/// summary. Thread count only changes wall time, never file contents.
pub fn run_to_dir(
    config: &ExperimentConfig,
    out_dir: &Path,
    threads: Option<usize>,
    plots: bool,
) -> Result<RunSummary, CliError> {
    let start = Instant::now();
    let summary = experiments::run(config, out_dir, threads, plots)?;
    let manifest = manifest::build_manifest(
        config,
        out_dir,
        &summary.files,
        start.elapsed().as_secs_f64(),
    )?;
    manifest::write_manifest(&manifest, out_dir)?;
    Ok(summary)
}
