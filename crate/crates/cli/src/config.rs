//! Experiment configuration schema: one JSON document per run, seed
//! mandatory, every output path relative to the output directory.

use identlab_core::models::BaseDist;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

fn default_ci_level() -> f64 {
    0.99
}

/// Top-level run configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(flatten)]
    pub spec: ExperimentSpec,
    /// Master seed; wall-clock seeding is not available on purpose.
    pub seed: u64,
    #[serde(default = "default_ci_level")]
    pub ci_level: f64,
    /// Output directory; overridable by `--out`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

/// The experiment to run plus its parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "experiment", content = "params", rename_all = "kebab-case")]
pub enum ExperimentSpec {
    VerifyLemma1(Lemma1Params),
    MeanVariance(MeanVarianceParams),
    MatchedPair(MatchedPairParams),
    RhoNonconsistency(RhoNonconsistencyParams),
    MuDistinguish(MuDistinguishParams),
    M2Components(M2ComponentsParams),
    BinaryDistinguish(BinaryDistinguishParams),
    ChangepointCalibration(ChangepointCalibrationParams),
    KmeansConsistency(KmeansConsistencyParams),
}

impl ExperimentSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentSpec::VerifyLemma1(_) => "verify-lemma1",
            ExperimentSpec::MeanVariance(_) => "mean-variance",
            ExperimentSpec::MatchedPair(_) => "matched-pair",
            ExperimentSpec::RhoNonconsistency(_) => "rho-nonconsistency",
            ExperimentSpec::MuDistinguish(_) => "mu-distinguish",
            ExperimentSpec::M2Components(_) => "m2-components",
            ExperimentSpec::BinaryDistinguish(_) => "binary-distinguish",
            ExperimentSpec::ChangepointCalibration(_) => "changepoint-calibration",
            ExperimentSpec::KmeansConsistency(_) => "kmeans-consistency",
        }
    }
}

/// Closed-form conditional against generic Schur conditioning.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Lemma1Params {
    pub n_values: Vec<usize>,
    pub rhos: Vec<f64>,
    pub sigma2: f64,
    pub mus: Vec<f64>,
    pub xbars: Vec<f64>,
    /// Max-norm deviation allowed between the two routes.
    pub tolerance: f64,
}

/// Monte Carlo variance of the sample mean against the mean law.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeanVarianceParams {
    pub mu: f64,
    pub sigma2: f64,
    pub rho: f64,
    pub n_values: Vec<usize>,
    pub reps: usize,
}

/// Residual-law KS for a matched pair (plus an unmatched control) and the
/// power-curve integral identity.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatchedPairParams {
    pub rho1: f64,
    pub sigma1_2: f64,
    pub rho2: f64,
    pub n: usize,
    pub reps: usize,
    /// Variance for the unmatched control run (same rho2).
    pub control_sigma2_2: Option<f64>,
    pub integral: Option<PowerIntegralParams>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PowerIntegralParams {
    /// Symmetric grid [-mu_max, mu_max] in steps of mu_step.
    pub mu_max: f64,
    pub mu_step: f64,
    pub n: usize,
    pub reps_per_point: usize,
}

/// IQR of the known-mean rho estimate under single-realization dependence
/// versus an i.i.d.-replication design.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RhoNonconsistencyParams {
    pub mu: f64,
    pub sigma2: f64,
    pub rho: f64,
    pub n_small: usize,
    pub n_large: usize,
    pub reps: usize,
    pub iid_seq_len: usize,
    pub iid_sequences_small: usize,
    pub iid_sequences_large: usize,
    pub iid_reps: usize,
}

/// The mean-comparison set under several dependence strengths.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MuDistinguishParams {
    pub mu1: f64,
    pub mu2: f64,
    pub n: usize,
    pub sigma2: f64,
    pub rhos: Vec<f64>,
    pub reps: usize,
    pub alpha: f64,
    pub beta: f64,
}

/// Variance components in the two-level model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct M2ComponentsParams {
    pub mu: f64,
    pub tau1_2: f64,
    pub tau2_2: f64,
    pub group_sizes: Vec<usize>,
    pub reps_tau: usize,
    pub reps_mean: usize,
    /// Second grand-mean pass with group sizes multiplied by this factor.
    pub scale_factor: usize,
}

/// Exact binary probabilities against Monte Carlo, and the M5 marginals.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BinaryDistinguishParams {
    pub p: f64,
    pub n: usize,
    pub reps: usize,
    pub m5_positions: usize,
    pub m5_reps: usize,
}

/// Scan type-I calibration under M3 and power on a fixed-q change grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChangepointCalibrationParams {
    pub p: f64,
    pub q_values: Vec<f64>,
    pub seq_len: usize,
    pub m_cp: usize,
    pub null_sequences: usize,
    pub power_sequences: usize,
    pub null_reps: usize,
    pub level: f64,
}

/// The k-means dichotomy: associated mixture vs Gaussian fixed classes, plus
/// the Lloyd-vs-enumeration oracle sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KmeansConsistencyParams {
    pub base: BaseDist,
    pub k: usize,
    pub approx_budget: usize,
    pub n_grid: Vec<usize>,
    pub mixture_reps: usize,
    pub gaussian_delta: f64,
    pub gaussian_sigma2: f64,
    pub gaussian_reps: usize,
    pub toy_datasets: usize,
    pub restarts: usize,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let config: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if !(0.5..1.0).contains(&self.ci_level) {
            return bad(format!("ci_level {} outside [0.5, 1)", self.ci_level));
        }
        match &self.spec {
            ExperimentSpec::VerifyLemma1(p) => {
                if p.n_values.is_empty() || p.rhos.is_empty() || p.xbars.is_empty() {
                    return bad("verify-lemma1 needs n_values, rhos and xbars".into());
                }
                if p.sigma2 <= 0.0 || p.tolerance <= 0.0 {
                    return bad("sigma2 and tolerance must be positive".into());
                }
                if p.rhos.iter().any(|r| !(0.0..1.0).contains(r)) {
                    return bad("rhos must lie in [0, 1)".into());
                }
            }
            ExperimentSpec::MeanVariance(p) => {
                if p.sigma2 <= 0.0 || !(0.0..1.0).contains(&p.rho) {
                    return bad("need sigma2 > 0 and rho in [0, 1)".into());
                }
                if p.n_values.is_empty() || p.reps < 100 {
                    return bad("need n_values and reps >= 100".into());
                }
            }
            ExperimentSpec::MatchedPair(p) => {
                if !(0.0..1.0).contains(&p.rho1) || !(0.0..1.0).contains(&p.rho2) {
                    return bad("rho1, rho2 must lie in [0, 1)".into());
                }
                if p.sigma1_2 <= 0.0 || p.n < 2 || p.reps < 100 {
                    return bad("need sigma1_2 > 0, n >= 2, reps >= 100".into());
                }
                if let Some(i) = &p.integral {
                    if i.mu_max <= 0.0 || i.mu_step <= 0.0 || i.n < 2 || i.reps_per_point < 100 {
                        return bad("integral grid parameters invalid".into());
                    }
                }
            }
            ExperimentSpec::RhoNonconsistency(p) => {
                if !(0.0..1.0).contains(&p.rho) || p.sigma2 <= 0.0 {
                    return bad("need rho in [0, 1) and sigma2 > 0".into());
                }
                if p.n_small < 2 || p.n_large <= p.n_small || p.reps < 100 {
                    return bad("need 2 <= n_small < n_large and reps >= 100".into());
                }
                if p.iid_seq_len < 2
                    || p.iid_sequences_small == 0
                    || p.iid_sequences_large <= p.iid_sequences_small
                    || p.iid_reps < 100
                {
                    return bad("iid design parameters invalid".into());
                }
            }
            ExperimentSpec::MuDistinguish(p) => {
                if p.mu1 == p.mu2 {
                    return bad("mu1 and mu2 must differ".into());
                }
                if p.sigma2 <= 0.0 || p.rhos.iter().any(|r| !(0.0..1.0).contains(r)) {
                    return bad("need sigma2 > 0 and rhos in [0, 1)".into());
                }
                if p.n < 1 || p.reps < 100 || !(0.0 < p.alpha && p.alpha <= p.beta && p.beta <= 1.0)
                {
                    return bad("need n >= 1, reps >= 100, 0 < alpha <= beta <= 1".into());
                }
            }
            ExperimentSpec::M2Components(p) => {
                if p.tau1_2 < 0.0 || p.tau2_2 <= 0.0 {
                    return bad("need tau1_2 >= 0 and tau2_2 > 0".into());
                }
                if p.group_sizes.is_empty()
                    || p.group_sizes.iter().any(|&n| n < 2)
                    || p.reps_tau < 10
                    || p.reps_mean < 10
                    || p.scale_factor < 2
                {
                    return bad("m2 design parameters invalid".into());
                }
            }
            ExperimentSpec::BinaryDistinguish(p) => {
                if !(p.p > 0.0 && p.p < 1.0) {
                    return bad(format!("p = {} outside (0, 1)", p.p));
                }
                if p.n < 2 || p.reps < 100 || p.m5_positions < 1 || p.m5_reps < 100 {
                    return bad("binary design parameters invalid".into());
                }
                if p.m5_positions > identlab_core::models::M5_ORACLE_HORIZON {
                    return bad(format!(
                        "m5_positions beyond the oracle horizon {}",
                        identlab_core::models::M5_ORACLE_HORIZON
                    ));
                }
            }
            ExperimentSpec::ChangepointCalibration(p) => {
                if !(p.p > 0.0 && p.p < 1.0) {
                    return bad(format!("p = {} outside (0, 1)", p.p));
                }
                if p.q_values.iter().any(|q| !(0.0..=1.0).contains(q)) {
                    return bad("q_values must lie in [0, 1]".into());
                }
                if p.seq_len < 4 || p.m_cp < 1 || p.m_cp > p.seq_len {
                    return bad("need 4 <= seq_len and 1 <= m_cp <= seq_len".into());
                }
                if p.null_sequences < 100 || p.power_sequences < 50 || p.null_reps < 2000 {
                    return bad(
                        "need null_sequences >= 100, power_sequences >= 50, null_reps >= 2000"
                            .into(),
                    );
                }
                if !(0.0 < p.level && p.level < 1.0) {
                    return bad("level must lie in (0, 1)".into());
                }
            }
            ExperimentSpec::KmeansConsistency(p) => {
                p.base
                    .validate()
                    .map_err(|e| CliError::Config(e.to_string()))?;
                if p.k < 2 || p.approx_budget < 1000 {
                    return bad("need k >= 2 and approx_budget >= 1000".into());
                }
                if p.n_grid.is_empty() || p.n_grid.windows(2).any(|w| w[1] <= w[0]) {
                    return bad("n_grid must be increasing".into());
                }
                if p.mixture_reps < 50 || p.gaussian_reps < 50 || p.toy_datasets < 10 {
                    return bad("replicate counts too small".into());
                }
                if p.gaussian_delta <= 0.0 || p.gaussian_sigma2 < 0.0 || p.restarts == 0 {
                    return bad("gaussian/restart parameters invalid".into());
                }
            }
        }
        Ok(())
    }
}
