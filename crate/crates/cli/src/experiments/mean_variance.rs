//! Monte Carlo variance of the sample mean under the equicorrelated model,
//! against the mean law `(1 - rho) sigma2 / n + rho sigma2`.

use identlab_core::gaussian::{mean_law, EquicorrSpec};
use identlab_core::models::sample_m1;
use identlab_core::stats::Moments;
use identlab_core::Stream;
use rayon::prelude::*;

use crate::config::MeanVarianceParams;
use crate::error::CliError;
use crate::plot::{render, PlotSpec, Series};
use crate::report::{fmt, within, CheckLine, OutputCtx};

pub fn run(
    p: &MeanVarianceParams,
    _ci_level: f64,
    stream: Stream,
    ctx: &OutputCtx,
) -> Result<Vec<CheckLine>, CliError> {
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    let mut plot = Series {
        label: "MC Var(xbar)".into(),
        ..Default::default()
    };
    let mut targets = Series {
        label: "mean law".into(),
        ..Default::default()
    };
    for (i, &n) in p.n_values.iter().enumerate() {
        let spec = EquicorrSpec::new(n, p.mu, p.sigma2, p.rho)?;
        let target = mean_law(&spec)?.variance;
        let n_stream = stream.child(i as u64);
        // Ordered collection keeps the reduction deterministic.
        let means: Vec<f64> = (0..p.reps)
            .into_par_iter()
            .map(|r| {
                let mut rng = n_stream.child(r as u64).rng();
                let x = sample_m1(&spec, &mut rng).expect("validated spec");
                x.iter().sum::<f64>() / x.len() as f64
            })
            .collect();
        let mut acc = Moments::new();
        acc.extend(means);
        let var_hat = acc.variance();
        // SE of a Gaussian variance estimate: target * sqrt(2 / (reps - 1)).
        let se = target * (2.0 / (p.reps as f64 - 1.0)).sqrt();
        let ok = within(var_hat, target, 3.0, se);
        rows.push(format!(
            "{n},{},{},{},{},{}",
            p.reps,
            fmt(var_hat),
            fmt(target),
            fmt(se),
            ok
        ));
        checks.push(CheckLine::new(
            format!("mean-variance-n{n}"),
            ok,
            format!("Var(xbar) = {var_hat:.6} vs {target:.6} (3 SE = {:.2e})", 3.0 * se),
        ));
        plot.x.push(n as f64);
        plot.y.push(var_hat);
        targets.x.push(n as f64);
        targets.y.push(target);
    }
    ctx.csv("mean_variance.csv", "n,reps,var_hat,target,se,ok", rows)?;
    if ctx.plots {
        let svg = render(
            &PlotSpec {
                title: "Variance of the sample mean does not vanish",
                x_label: "n",
                y_label: "Var(xbar)",
                log_x: true,
            },
            &[plot, targets],
        );
        ctx.raw("mean_variance.svg", &svg)?;
    }
    Ok(checks)
}
