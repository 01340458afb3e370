//! Built-in configurations, one per experiment, with the parameters the
//! acceptance suite pins down. `identlab presets` lists them; `identlab run
//! <name>` runs one without a config file.

use identlab_core::models::BaseDist;

use crate::config::*;

pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub config: ExperimentConfig,
}

pub fn all() -> Vec<Preset> {
    vec![
        Preset {
            name: "verify-lemma1",
            description: "closed-form conditional given the mean vs generic Schur conditioning",
            config: ExperimentConfig {
                spec: ExperimentSpec::VerifyLemma1(Lemma1Params {
                    n_values: vec![2, 5, 25, 200],
                    rhos: vec![0.0, 0.3, 0.9],
                    sigma2: 1.0,
                    mus: vec![0.0, 7.0],
                    xbars: vec![-1.0, 0.0, 2.5],
                    tolerance: 1e-9,
                }),
                seed: 101,
                ci_level: 0.99,
                output: None,
            },
        },
        Preset {
            name: "mean-variance",
            description: "Var(xbar) stays inflated by rho*sigma2 as n grows",
            config: ExperimentConfig {
                spec: ExperimentSpec::MeanVariance(MeanVarianceParams {
                    mu: 0.0,
                    sigma2: 1.0,
                    rho: 0.5,
                    n_values: vec![10, 10_000],
                    reps: 100_000,
                }),
                seed: 102,
                ci_level: 0.99,
                output: None,
            },
        },
        Preset {
            name: "matched-pair",
            description: "residual-law equality for matched (rho, sigma2) pairs + integral identity",
            config: ExperimentConfig {
                spec: ExperimentSpec::MatchedPair(MatchedPairParams {
                    rho1: 0.2,
                    sigma1_2: 1.0,
                    rho2: 0.6,
                    n: 100,
                    reps: 10_000,
                    control_sigma2_2: Some(1.0),
                    integral: Some(PowerIntegralParams {
                        mu_max: 10.0,
                        mu_step: 0.25,
                        n: 50,
                        reps_per_point: 2000,
                    }),
                }),
                seed: 103,
                ci_level: 0.99,
                output: None,
            },
        },
        Preset {
            name: "rho-nonconsistency",
            description: "rho_hat IQR flat in n under dependence, shrinking under i.i.d. replication",
            config: ExperimentConfig {
                spec: ExperimentSpec::RhoNonconsistency(RhoNonconsistencyParams {
                    mu: 0.0,
                    sigma2: 1.0,
                    rho: 0.5,
                    n_small: 100,
                    n_large: 10_000,
                    reps: 10_000,
                    iid_seq_len: 10,
                    iid_sequences_small: 100,
                    iid_sequences_large: 10_000,
                    iid_reps: 2000,
                }),
                seed: 104,
                ci_level: 0.99,
                output: None,
            },
        },
        Preset {
            name: "mu-distinguish",
            description: "the mean-comparison set separates mu values under every rho",
            config: ExperimentConfig {
                spec: ExperimentSpec::MuDistinguish(MuDistinguishParams {
                    mu1: 0.0,
                    mu2: 1.0,
                    n: 20,
                    sigma2: 1.0,
                    rhos: vec![0.0, 0.5, 0.9],
                    reps: 100_000,
                    alpha: 0.5,
                    beta: 0.5,
                }),
                seed: 105,
                ci_level: 0.99,
                output: None,
            },
        },
        Preset {
            name: "m2-components",
            description: "pooled within-group variance consistent; grand mean dispersion floored",
            config: ExperimentConfig {
                spec: ExperimentSpec::M2Components(M2ComponentsParams {
                    mu: 0.0,
                    tau1_2: 1.0,
                    tau2_2: 1.0,
                    group_sizes: vec![5000, 5000],
                    reps_tau: 200,
                    reps_mean: 2000,
                    scale_factor: 10,
                }),
                seed: 106,
                ci_level: 0.99,
                output: None,
            },
        },
        Preset {
            name: "binary-distinguish",
            description: "exact binary probabilities vs MC; M5 marginals at the oracle r",
            config: ExperimentConfig {
                spec: ExperimentSpec::BinaryDistinguish(BinaryDistinguishParams {
                    p: 0.3,
                    n: 10,
                    reps: 200_000,
                    m5_positions: 12,
                    m5_reps: 100_000,
                }),
                seed: 107,
                ci_level: 0.99,
                output: None,
            },
        },
        Preset {
            name: "changepoint-calibration",
            description: "scan type-I rate in [3%, 7%] at nominal 5%, power >= 80% on the q grid",
            config: ExperimentConfig {
                spec: ExperimentSpec::ChangepointCalibration(ChangepointCalibrationParams {
                    p: 0.2,
                    q_values: vec![0.5, 0.6, 0.7, 0.8],
                    seq_len: 200,
                    m_cp: 100,
                    null_sequences: 2000,
                    power_sequences: 500,
                    null_reps: 2000,
                    level: 0.05,
                }),
                seed: 108,
                ci_level: 0.99,
                output: None,
            },
        },
        Preset {
            name: "kmeans-consistency",
            description: "membership identifiable for the associated mixture, floored for Gaussian classes",
            config: ExperimentConfig {
                spec: ExperimentSpec::KmeansConsistency(KmeansConsistencyParams {
                    base: BaseDist::GaussMixture {
                        weights: vec![0.5, 0.5],
                        means: vec![vec![-3.0], vec![3.0]],
                        sigmas: vec![1.0, 1.0],
                    },
                    k: 2,
                    approx_budget: 1_000_000,
                    n_grid: vec![50, 200, 1000, 5000],
                    mixture_reps: 400,
                    gaussian_delta: 2.0,
                    gaussian_sigma2: 1.0,
                    gaussian_reps: 2000,
                    toy_datasets: 100,
                    restarts: 32,
                }),
                seed: 109,
                ci_level: 0.99,
                output: None,
            },
        },
    ]
}

pub fn by_name(name: &str) -> Option<ExperimentConfig> {
    all().into_iter()
        .find(|p| p.name == name)
        .map(|p| p.config)
}
