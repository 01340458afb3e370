//! Scan calibration: type-I error under i.i.d. sequences and power against
//! fixed-q change points at the configured level.

use identlab_core::estimators::changepoint_scan;
use identlab_core::models::{sample_binary, BinarySpec, BinaryVariant};
use identlab_core::Stream;
use rand::distr::{Bernoulli, Distribution};
use rayon::prelude::*;

use crate::config::ChangepointCalibrationParams;
use crate::error::CliError;
use crate::plot::{render, PlotSpec, Series};
use crate::report::{fmt, CheckLine, OutputCtx};

pub fn run(
    p: &ChangepointCalibrationParams,
    _ci_level: f64,
    stream: Stream,
    ctx: &OutputCtx,
) -> Result<Vec<CheckLine>, CliError> {
    let mut checks = Vec::new();

    // Type-I rate under M3.
    let m3 = BinarySpec::new(BinaryVariant::M3, p.p);
    let null_stream = stream.child(0);
    let rejections: usize = (0..p.null_sequences)
        .into_par_iter()
        .map(|i| {
            let seq_stream = null_stream.child(i as u64);
            let x = sample_binary(&m3, p.seq_len, &mut seq_stream.child(0).rng()).expect("valid");
            let scan = changepoint_scan(&x, p.null_reps, seq_stream.child(1)).expect("valid");
            usize::from(scan.p_value <= p.level)
        })
        .sum();
    let type_i = rejections as f64 / p.null_sequences as f64;
    checks.push(CheckLine::new(
        "type-i-rate-calibrated",
        (0.03..=0.07).contains(&type_i),
        format!(
            "rejection rate {type_i:.4} at nominal {} over {} sequences",
            p.level, p.null_sequences
        ),
    ));

    // Power against a fixed pre-change q, split at m_cp.
    let mut rows = vec![format!(
        "type-i,{},{},{},{}",
        fmt(p.p),
        p.null_sequences,
        fmt(type_i),
        (0.03..=0.07).contains(&type_i)
    )];
    let mut power_series = Series {
        label: "power".into(),
        ..Default::default()
    };
    for (qi, &q) in p.q_values.iter().enumerate() {
        let q_stream = stream.child(1 + qi as u64);
        let pre = Bernoulli::new(q).map_err(|_| CliError::Config(format!("bad q {q}")))?;
        let post = Bernoulli::new(p.p).expect("validated p");
        let hits: usize = (0..p.power_sequences)
            .into_par_iter()
            .map(|i| {
                let seq_stream = q_stream.child(i as u64);
                let mut rng = seq_stream.child(0).rng();
                let mut x = Vec::with_capacity(p.seq_len);
                for _ in 0..(p.m_cp - 1).min(p.seq_len) {
                    x.push(pre.sample(&mut rng) as u8);
                }
                while x.len() < p.seq_len {
                    x.push(post.sample(&mut rng) as u8);
                }
                let scan = changepoint_scan(&x, p.null_reps, seq_stream.child(1)).expect("valid");
                usize::from(scan.p_value <= p.level)
            })
            .sum();
        let power = hits as f64 / p.power_sequences as f64;
        rows.push(format!(
            "power-q-{},{},{},{},{}",
            fmt(q),
            fmt(p.p),
            p.power_sequences,
            fmt(power),
            power >= 0.8
        ));
        checks.push(CheckLine::new(
            format!("power-at-q-{q}"),
            power >= 0.8,
            format!(
                "power {power:.3} with change at {} (|q - p| = {:.2})",
                p.m_cp,
                (q - p.p).abs()
            ),
        ));
        power_series.x.push(q);
        power_series.y.push(power);
    }
    ctx.csv(
        "changepoint.csv",
        "case,p_or_q,sequences,rate,ok",
        rows,
    )?;
    if ctx.plots {
        let svg = render(
            &PlotSpec {
                title: "Scan power against fixed pre-change q",
                x_label: "q",
                y_label: "rejection rate at the nominal level",
                log_x: false,
            },
            &[power_series],
        );
        ctx.raw("changepoint_power.svg", &svg)?;
    }
    Ok(checks)
}
