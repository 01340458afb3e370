//! Binary dependence models: exact all-equal probabilities under M3/M4 and
//! the M5 per-position marginals under the oracle mixing weight.

use identlab_core::distinguish::{
    check_distinguishing, estimate_set_prob, Arity, DistinguishReport, SetSpec, Verdict,
};
use identlab_core::models::{
    m3_all_equal_prob, sample_binary, solve_m5_r, BinarySpec, BinaryVariant,
};
use identlab_core::Stream;
use rayon::prelude::*;

use crate::config::BinaryDistinguishParams;
use crate::error::CliError;
use crate::report::{fmt, within, CheckLine, OutputCtx};

pub fn run(
    p: &BinaryDistinguishParams,
    ci_level: f64,
    stream: Stream,
    ctx: &OutputCtx,
) -> Result<Vec<CheckLine>, CliError> {
    let all_equal = SetSpec::new("all-equal", Arity::Any, |x: &[u8]| {
        x.iter().all(|&b| b == x[0])
    });
    let m3 = BinarySpec::new(BinaryVariant::M3, p.p);
    let m4 = BinarySpec::new(BinaryVariant::M4, p.p);
    let mut checks = Vec::new();

    // M3: Monte Carlo against the exact binomial value.
    let exact = m3_all_equal_prob(p.p, p.n);
    let (p3, _ci3) = estimate_set_prob(
        |n, rng: &mut rand_chacha::ChaCha8Rng| sample_binary(&m3, n, rng).expect("valid"),
        &all_equal,
        p.n,
        p.reps,
        ci_level,
        stream.child(0),
    )?;
    let se3 = (exact * (1.0 - exact) / p.reps as f64).sqrt();
    checks.push(CheckLine::new(
        "m3-all-equal-matches-exact",
        within(p3, exact, 3.0, se3),
        format!("MC {p3:.6} vs exact p^n + (1-p)^n = {exact:.6} (3 SE = {:.1e})", 3.0 * se3),
    ));

    // M4: the event has probability one, exactly.
    let (p4, _ci4) = estimate_set_prob(
        |n, rng: &mut rand_chacha::ChaCha8Rng| sample_binary(&m4, n, rng).expect("valid"),
        &all_equal,
        p.n,
        p.reps,
        ci_level,
        stream.child(1),
    )?;
    checks.push(CheckLine::new(
        "m4-all-equal-certain",
        p4 == 1.0,
        format!("every one of {} sequences was constant", p.reps),
    ));

    // The same set certifies distinguishability of M3 from M4.
    let report: DistinguishReport = check_distinguishing(
        &all_equal,
        |n, rng: &mut rand_chacha::ChaCha8Rng| sample_binary(&m3, n, rng).expect("valid"),
        |n, rng: &mut rand_chacha::ChaCha8Rng| sample_binary(&m4, n, rng).expect("valid"),
        p.n,
        0.5,
        0.5,
        p.reps,
        ci_level,
        stream.child(2),
    )?;
    checks.push(CheckLine::new(
        "m3-vs-m4-distinguishing",
        matches!(report.verdict, Verdict::Distinguishing { .. }),
        format!("verdict {}", report.verdict),
    ));
    ctx.csv(
        "binary_reports.csv",
        DistinguishReport::CSV_HEADER,
        [report.csv_row()],
    )?;

    // M5 marginals at the oracle r.
    let r = solve_m5_r(p.p)?;
    let m5 = BinarySpec::new(BinaryVariant::M5, p.p);
    let positions = p.m5_positions;
    let counts: Vec<u64> = (0..p.m5_reps)
        .into_par_iter()
        .map(|rep| {
            let mut rng = stream.child(3).child(rep as u64).rng();
            let x = sample_binary(&m5, positions, &mut rng).expect("valid");
            x.iter().map(|&b| b as u64).collect::<Vec<u64>>()
        })
        .reduce(
            || vec![0u64; positions],
            |mut a, b| {
                for (ai, bi) in a.iter_mut().zip(b) {
                    *ai += bi;
                }
                a
            },
        );
    let se5 = (p.p * (1.0 - p.p) / p.m5_reps as f64).sqrt();
    let mut marginal_rows = Vec::new();
    let mut m5_ok = true;
    for (j, &c) in counts.iter().enumerate() {
        let frac = c as f64 / p.m5_reps as f64;
        let ok = within(frac, p.p, 3.0, se5);
        m5_ok &= ok;
        marginal_rows.push(format!(
            "{},{},{},{},{}",
            j + 1,
            fmt(frac),
            fmt(p.p),
            fmt(se5),
            ok
        ));
    }
    ctx.csv(
        "m5_marginals.csv",
        "position,marginal_hat,p,se,ok",
        marginal_rows,
    )?;
    checks.push(CheckLine::new(
        "m5-marginals-bernoulli-p",
        m5_ok,
        format!(
            "all {positions} positions within 3 SE of p = {} at oracle r = {r:.6}",
            p.p
        ),
    ));
    Ok(checks)
}
