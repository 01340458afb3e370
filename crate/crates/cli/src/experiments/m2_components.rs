//! Two-level random effects: the pooled within-group variance is consistent
//! for tau2_2 while the grand mean's dispersion is pinned by the finitely
//! many group effects and does not vanish with n.

use identlab_core::estimators::var_components_m2;
use identlab_core::models::{sample_m2, TwoLevelSpec};
use identlab_core::stats::Moments;
use identlab_core::Stream;
use rayon::prelude::*;

use crate::config::M2ComponentsParams;
use crate::error::CliError;
use crate::report::{fmt, within, CheckLine, OutputCtx};

fn grand_mean_sd(spec: &TwoLevelSpec, reps: usize, stream: Stream) -> f64 {
    let means: Vec<f64> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream.child(r as u64).rng();
            let groups = sample_m2(spec, &mut rng).expect("validated spec");
            var_components_m2(&groups).expect("groups large enough").grand_mean
        })
        .collect();
    let mut acc = Moments::new();
    acc.extend(means);
    acc.sd()
}

pub fn run(
    p: &M2ComponentsParams,
    _ci_level: f64,
    stream: Stream,
    ctx: &OutputCtx,
) -> Result<Vec<CheckLine>, CliError> {
    let spec = TwoLevelSpec {
        mu: p.mu,
        tau1_2: p.tau1_2,
        tau2_2: p.tau2_2,
        group_sizes: p.group_sizes.clone(),
    };
    spec.validate()?;
    let n = spec.total_n();
    let m = spec.group_sizes.len();

    // Within-group variance, averaged over replicates.
    let taus: Vec<f64> = (0..p.reps_tau)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream.child(r as u64).rng();
            let groups = sample_m2(&spec, &mut rng).expect("validated spec");
            var_components_m2(&groups).expect("groups large enough").tau2_2_hat
        })
        .collect();
    let mut tau_acc = Moments::new();
    tau_acc.extend(taus);
    let tau_mean = tau_acc.mean();
    // Chi-square variance of the pooled estimator, averaged over replicates.
    let tau_se = p.tau2_2 * (2.0 / (n - m) as f64).sqrt() / (p.reps_tau as f64).sqrt();
    let tau_ok = within(tau_mean, p.tau2_2, 4.0, tau_se);

    // Grand-mean dispersion at n and at n * scale_factor.
    let weight_sq: f64 = spec
        .group_sizes
        .iter()
        .map(|&ni| (ni as f64 / n as f64).powi(2))
        .sum();
    let target_sd = (p.tau1_2 * weight_sq).sqrt();
    let sd_base = grand_mean_sd(&spec, p.reps_mean, stream.child(1_000));
    let scaled = TwoLevelSpec {
        group_sizes: spec.group_sizes.iter().map(|&ni| ni * p.scale_factor).collect(),
        ..spec.clone()
    };
    let sd_scaled = grand_mean_sd(&scaled, p.reps_mean, stream.child(2_000));

    let sd_ok = (sd_base - target_sd).abs() < 0.1 * target_sd;
    let no_decrease = sd_scaled >= 0.95 * sd_base;

    ctx.csv(
        "m2_components.csv",
        "quantity,n,reps,value,target",
        [
            format!(
                "tau2_2_hat_mean,{n},{},{},{}",
                p.reps_tau,
                fmt(tau_mean),
                fmt(p.tau2_2)
            ),
            format!(
                "grand_mean_sd,{n},{},{},{}",
                p.reps_mean,
                fmt(sd_base),
                fmt(target_sd)
            ),
            format!(
                "grand_mean_sd,{},{},{},{}",
                n * p.scale_factor,
                p.reps_mean,
                fmt(sd_scaled),
                fmt(target_sd)
            ),
        ],
    )?;

    Ok(vec![
        CheckLine::new(
            "tau2-consistent",
            tau_ok,
            format!(
                "mean tau2_2_hat = {tau_mean:.5} vs {} (4 SE = {:.2e})",
                p.tau2_2,
                4.0 * tau_se
            ),
        ),
        CheckLine::new(
            "grand-mean-sd-matches-group-effect-floor",
            sd_ok,
            format!("SD {sd_base:.4} vs sqrt(tau1_2 * sum w_i^2) = {target_sd:.4} (10% band)"),
        ),
        CheckLine::new(
            "grand-mean-sd-does-not-vanish",
            no_decrease,
            format!(
                "SD {sd_scaled:.4} at n={} vs {sd_base:.4} at n={n}",
                n * p.scale_factor
            ),
        ),
    ])
}
