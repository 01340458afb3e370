//! One module per experiment; each writes its result tables under the output
//! directory, optionally renders plots, and returns its built-in check lines.

use std::path::Path;

use identlab_core::Stream;

use crate::config::{ExperimentConfig, ExperimentSpec};
use crate::error::CliError;
use crate::report::{OutputCtx, RunSummary};

mod binary;
mod changepoint;
mod kmeans_consistency;
mod lemma1;
mod m2_components;
mod matched_pair;
mod mean_variance;
mod mu_distinguish;
mod rho_noncons;

/// Run one experiment into `out_dir`. Parallelism degree only affects wall
/// time; replicate substreams keep every table byte-identical.
pub fn run(
    config: &ExperimentConfig,
    out_dir: &Path,
    threads: Option<usize>,
    plots: bool,
) -> Result<RunSummary, CliError> {
    config.validate()?;
    let ctx = OutputCtx::new(out_dir, plots)?;
    let stream = Stream::new(config.seed);
    let ci = config.ci_level;
    let dispatch = || match &config.spec {
        ExperimentSpec::VerifyLemma1(p) => lemma1::run(p, ci, stream, &ctx),
        ExperimentSpec::MeanVariance(p) => mean_variance::run(p, ci, stream, &ctx),
        ExperimentSpec::MatchedPair(p) => matched_pair::run(p, ci, stream, &ctx),
        ExperimentSpec::RhoNonconsistency(p) => rho_noncons::run(p, ci, stream, &ctx),
        ExperimentSpec::MuDistinguish(p) => mu_distinguish::run(p, ci, stream, &ctx),
        ExperimentSpec::M2Components(p) => m2_components::run(p, ci, stream, &ctx),
        ExperimentSpec::BinaryDistinguish(p) => binary::run(p, ci, stream, &ctx),
        ExperimentSpec::ChangepointCalibration(p) => changepoint::run(p, ci, stream, &ctx),
        ExperimentSpec::KmeansConsistency(p) => kmeans_consistency::run(p, ci, stream, &ctx),
    };
    let checks = match threads {
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
            pool.install(dispatch)?
        }
        None => dispatch()?,
    };
    Ok(RunSummary {
        experiment: config.spec.name().to_string(),
        checks,
        files: ctx.into_files(),
    })
}
