//! Residual-law equality for a matched pair (with an unmatched control) and
//! the integral identity: the power-curve difference integrates to zero over
//! the mean even where it is pointwise large.

use identlab_core::distinguish::{
    power_curve_integral, residual_law_ks, residual_law_equality, sum_sq_dev, Arity, SetSpec,
};
use identlab_core::gaussian::EquicorrSpec;
use identlab_core::models::MatchedPair;
use identlab_core::Stream;

use crate::config::MatchedPairParams;
use crate::error::CliError;
use crate::plot::{render, PlotSpec, Series};
use crate::report::{fmt, CheckLine, OutputCtx};

pub fn run(
    p: &MatchedPairParams,
    _ci_level: f64,
    stream: Stream,
    ctx: &OutputCtx,
) -> Result<Vec<CheckLine>, CliError> {
    let pair = MatchedPair::new(p.rho1, p.sigma1_2, p.rho2)?;
    let (spec1, spec2) = pair.specs(p.n, 0.0)?;
    let mut checks = Vec::new();
    let mut ks_rows = Vec::new();

    let matched = residual_law_equality(&spec1, &spec2, sum_sq_dev, p.reps, stream.child(0))?;
    ks_rows.push(format!(
        "matched,{},{},{},{},{},{}",
        fmt(pair.rho2),
        fmt(pair.sigma2_2),
        p.reps,
        fmt(matched.statistic),
        fmt(matched.p_value),
        matched.p_value < 0.001
    ));
    checks.push(CheckLine::new(
        "matched-pair-ks-accepts",
        matched.p_value > 0.001,
        format!(
            "KS p = {:.4} on sum of squared deviations (matched sigma2_2 = {})",
            matched.p_value, pair.sigma2_2
        ),
    ));

    if let Some(control_sigma2_2) = p.control_sigma2_2 {
        let control = EquicorrSpec::new(p.n, 0.0, control_sigma2_2, p.rho2)?;
        let ks = residual_law_ks(&spec1, &control, sum_sq_dev, p.reps, stream.child(1))?;
        ks_rows.push(format!(
            "control,{},{},{},{},{},{}",
            fmt(p.rho2),
            fmt(control_sigma2_2),
            p.reps,
            fmt(ks.statistic),
            fmt(ks.p_value),
            ks.p_value < 0.001
        ));
        checks.push(CheckLine::new(
            "unmatched-control-ks-rejects",
            ks.p_value < 0.001,
            format!(
                "KS p = {:.2e} against sigma2_2 = {control_sigma2_2} (residual variances {} vs {})",
                ks.p_value,
                spec1.sigma_star2(),
                control.sigma_star2()
            ),
        ));
    }
    ctx.csv(
        "matched_ks.csv",
        "case,rho2,sigma2_2,reps,ks_statistic,p_value,rejects_at_0.001",
        ks_rows,
    )?;

    if let Some(ip) = &p.integral {
        let steps = (ip.mu_max / ip.mu_step).round() as i64;
        let grid: Vec<f64> = (-steps..=steps).map(|i| i as f64 * ip.mu_step).collect();
        let set = SetSpec::new("positive-mean", Arity::Any, |x: &[f64]| {
            x.iter().sum::<f64>() / x.len() as f64 > 0.0
        });
        let result = power_curve_integral(
            &set,
            &pair,
            ip.n,
            &grid,
            ip.reps_per_point,
            stream.child(2),
        )?;
        ctx.csv(
            "power_curve.csv",
            "mu,p1_hat,p2_hat,diff,se_diff",
            result.points.iter().map(|pt| {
                format!(
                    "{},{},{},{},{}",
                    fmt(pt.mu),
                    fmt(pt.p1_hat),
                    fmt(pt.p2_hat),
                    fmt(pt.diff),
                    fmt(pt.se_diff)
                )
            }),
        )?;
        let z_max = result.max_pointwise_z();
        checks.push(CheckLine::new(
            "integral-identity-zero",
            result.integral.abs() < 3.0 * result.se,
            format!(
                "integral = {:.5} with SE {:.5} over mu in [{}, {}]",
                result.integral, result.se, -ip.mu_max, ip.mu_max
            ),
        ));
        checks.push(CheckLine::new(
            "pointwise-difference-significant",
            z_max >= 5.0,
            format!("max |diff|/SE = {z_max:.1} on the grid"),
        ));
        if ctx.plots {
            let band: (Vec<f64>, Vec<f64>) = result
                .points
                .iter()
                .map(|pt| (pt.diff - 3.0 * pt.se_diff, pt.diff + 3.0 * pt.se_diff))
                .unzip();
            let series = Series {
                label: "p1(mu) - p2(mu)".into(),
                x: result.points.iter().map(|pt| pt.mu).collect(),
                y: result.points.iter().map(|pt| pt.diff).collect(),
                band: Some(band),
            };
            let svg = render(
                &PlotSpec {
                    title: "Sign-changing power difference integrating to zero",
                    x_label: "mu",
                    y_label: "difference of set probabilities",
                    log_x: false,
                },
                &[series],
            );
            ctx.raw("power_curve.svg", &svg)?;
        }
    }
    Ok(checks)
}
