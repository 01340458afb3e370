//! The membership dichotomy: under the associated-mixture model the fitted
//! cluster of the first observation converges to its fixed label; under the
//! Gaussian fixed classification model it plateaus at the overlap floor.
//! Plus the Lloyd-vs-enumeration objective sweep on toy data.

use identlab_core::kmeans::{
    brute_force_kmeans, lloyd, membership_consistency_experiment, misclassification_floor,
    ClassModel, ConsistencyTable, LloydConfig,
};
use identlab_core::mat::Mat;
use identlab_core::models::{associated_mixture, FixedClassSpec};
use identlab_core::Stream;
use rand_distr::Distribution;
use rayon::prelude::*;

use crate::config::KmeansConsistencyParams;
use crate::error::CliError;
use crate::plot::{render, PlotSpec, Series};
use crate::report::{fmt, CheckLine, OutputCtx};

fn table_rows(table: &ConsistencyTable) -> impl Iterator<Item = String> + '_ {
    table.rows.iter().map(|r| {
        format!(
            "{},{},{},{},{}",
            r.n,
            r.reps,
            fmt(r.frac_correct),
            fmt(r.ci_lo),
            fmt(r.ci_hi)
        )
    })
}

fn table_series(table: &ConsistencyTable, label: &str) -> Series {
    Series {
        label: label.into(),
        x: table.rows.iter().map(|r| r.n as f64).collect(),
        y: table.rows.iter().map(|r| r.frac_correct).collect(),
        band: Some((
            table.rows.iter().map(|r| r.ci_lo).collect(),
            table.rows.iter().map(|r| r.ci_hi).collect(),
        )),
    }
}

pub fn run(
    p: &KmeansConsistencyParams,
    ci_level: f64,
    stream: Stream,
    ctx: &OutputCtx,
) -> Result<Vec<CheckLine>, CliError> {
    let cfg = LloydConfig {
        restarts: p.restarts,
        ..LloydConfig::default()
    };
    let max_n = *p.n_grid.last().expect("validated nonempty");
    let mut checks = Vec::new();

    // (a) Associated mixture: membership is identifiable.
    let mixture = associated_mixture(&p.base, p.k, p.approx_budget, max_n, stream.child(0))?;
    let mixture_table = membership_consistency_experiment(
        &ClassModel::Mixture(&mixture),
        &p.n_grid,
        p.mixture_reps,
        &cfg,
        ci_level,
        stream.child(1),
    )?;
    ctx.csv(
        "kmeans_mixture.csv",
        "n,reps,frac_correct,ci_lo,ci_hi",
        table_rows(&mixture_table),
    )?;
    ctx.json("mixture_model.json", &mixture)?;
    let final_frac = mixture_table.rows.last().expect("rows").frac_correct;
    checks.push(CheckLine::new(
        "mixture-membership-identifiable",
        final_frac >= 0.99,
        format!("correct-membership fraction {final_frac:.4} at n = {max_n}"),
    ));
    let monotone = mixture_table
        .rows
        .windows(2)
        .all(|w| w[1].frac_correct >= w[0].frac_correct);
    checks.push(CheckLine::new(
        "mixture-fractions-monotone-up",
        monotone,
        format!(
            "fractions {:?}",
            mixture_table
                .rows
                .iter()
                .map(|r| r.frac_correct)
                .collect::<Vec<_>>()
        ),
    ));

    // (b) Gaussian fixed classification: membership hits the overlap floor.
    let delta = p.gaussian_delta;
    let gauss_spec = FixedClassSpec {
        centers: vec![vec![0.0], vec![delta]],
        sigma2: p.gaussian_sigma2,
        labels: (0..max_n).map(|i| 1 + i % 2).collect(),
    };
    let gauss_table = membership_consistency_experiment(
        &ClassModel::Gaussian(&gauss_spec),
        &p.n_grid,
        p.gaussian_reps,
        &cfg,
        ci_level,
        stream.child(2),
    )?;
    ctx.csv(
        "kmeans_gaussian.csv",
        "n,reps,frac_correct,ci_lo,ci_hi",
        table_rows(&gauss_table),
    )?;
    let floor = misclassification_floor(delta, p.gaussian_sigma2.sqrt());
    let target = 1.0 - floor;
    let last = gauss_table.rows.last().expect("rows");
    checks.push(CheckLine::new(
        "gaussian-membership-hits-floor",
        last.ci_lo <= target && target <= last.ci_hi && last.ci_hi < 1.0,
        format!(
            "CI [{:.4}, {:.4}] at n = {} contains 1 - floor = {target:.4} and excludes 1",
            last.ci_lo, last.ci_hi, last.n
        ),
    ));

    if ctx.plots {
        let svg = render(
            &PlotSpec {
                title: "Membership recovery: associated mixture vs Gaussian classes",
                x_label: "n",
                y_label: "fraction with recovered first label",
                log_x: true,
            },
            &[
                table_series(&mixture_table, "associated mixture"),
                table_series(&gauss_table, "gaussian fixed classes"),
            ],
        );
        ctx.raw("kmeans_consistency.svg", &svg)?;
    }

    // (c) Lloyd against the exact enumeration oracle on toy datasets.
    let toy_stream = stream.child(3);
    let toys: Vec<(usize, usize, usize, f64, f64, bool)> = (0..p.toy_datasets)
        .into_par_iter()
        .map(|t| {
            let mut rng = toy_stream.child(t as u64).child(0).rng();
            let n = 5 + t % 6; // 5..=10 points
            let dim = 1 + t % 2;
            let k = 2 + t % 2;
            let data: Mat<f64> = Mat::from_fn(n, dim, |_, _| {
                let z: f64 = rand_distr::StandardNormal.sample(&mut rng);
                3.0 * z
            });
            let exact = brute_force_kmeans(&data, k).expect("within enumeration cap");
            let fitted = lloyd(
                &data,
                k,
                &LloydConfig {
                    restarts: 32,
                    ..LloydConfig::default()
                },
                toy_stream.child(t as u64).child(1),
            )
            .expect("n >= k");
            let equal = fitted.objective <= exact.objective * (1.0 + 1e-9) + 1e-12;
            (n, dim, k, fitted.objective, exact.objective, equal)
        })
        .collect();
    ctx.csv(
        "kmeans_toy.csv",
        "n,dim,k,lloyd_objective,exact_objective,equal",
        toys.iter().map(|(n, dim, k, lo, eo, eq)| {
            format!("{n},{dim},{k},{},{},{eq}", fmt(*lo), fmt(*eo))
        }),
    )?;
    let matches = toys.iter().filter(|t| t.5).count();
    let never_below = toys
        .iter()
        .all(|t| t.3 >= t.4 * (1.0 - 1e-9) - 1e-12);
    checks.push(CheckLine::new(
        "lloyd-matches-enumeration-oracle",
        matches * 100 >= p.toy_datasets * 99 && never_below,
        format!(
            "{matches}/{} toy datasets matched the global optimum within 1e-9 relative",
            p.toy_datasets
        ),
    ));
    Ok(checks)
}
