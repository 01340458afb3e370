//! The mean-comparison set separates two means under every dependence
//! strength: its probability sits strictly below 1/2 at mu1 and strictly
//! above at mu2, whatever (sigma2, rho).

use identlab_core::distinguish::{check_distinguishing, mu_distinguishing_set, DistinguishReport};
use identlab_core::gaussian::EquicorrSpec;
use identlab_core::models::sample_m1;
use identlab_core::Stream;

use crate::config::MuDistinguishParams;
use crate::error::CliError;
use crate::report::{fmt, CheckLine, OutputCtx};

pub fn run(
    p: &MuDistinguishParams,
    ci_level: f64,
    stream: Stream,
    ctx: &OutputCtx,
) -> Result<Vec<CheckLine>, CliError> {
    let set = mu_distinguishing_set(p.mu1, p.mu2)?;
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    for (i, &rho) in p.rhos.iter().enumerate() {
        let s1 = EquicorrSpec::new(p.n, p.mu1, p.sigma2, rho)?;
        let s2 = EquicorrSpec::new(p.n, p.mu2, p.sigma2, rho)?;
        let report: DistinguishReport = check_distinguishing(
            &set,
            |_n, rng: &mut rand_chacha::ChaCha8Rng| sample_m1(&s1, rng).expect("validated"),
            |_n, rng: &mut rand_chacha::ChaCha8Rng| sample_m1(&s2, rng).expect("validated"),
            p.n,
            p.alpha,
            p.beta,
            p.reps,
            ci_level,
            stream.child(i as u64),
        )?;
        rows.push(format!("{},{}", fmt(rho), report.csv_row()));
        let strict = report.ci1.hi < 0.5 && report.ci2.lo > 0.5;
        checks.push(CheckLine::new(
            format!("mu-distinguish-rho-{rho}"),
            strict,
            format!(
                "CI under mu1 [{:.4}, {:.4}] below 1/2; CI under mu2 [{:.4}, {:.4}] above 1/2; verdict {}",
                report.ci1.lo, report.ci1.hi, report.ci2.lo, report.ci2.hi, report.verdict
            ),
        ));
    }
    ctx.csv(
        "mu_distinguish.csv",
        &format!("rho,{}", DistinguishReport::CSV_HEADER),
        rows,
    )?;
    Ok(checks)
}
