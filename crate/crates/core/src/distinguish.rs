//! Pre-registered observable sets, Monte Carlo estimation of their
//! probabilities under two parameter values, and distinguishability verdicts.
//!
//! A verdict is only issued when the exact binomial confidence intervals
//! clear the thresholds, so Monte Carlo noise cannot manufacture
//! distinguishability.

use std::borrow::Borrow;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{mean_law, EquicorrSpec};
use crate::models::{sample_m1, MatchedPair};
use crate::rng::Stream;
use crate::stats::{clopper_pearson, ks2_test, Interval, KsReport};

/// Maximum mean-law mass allowed outside the quadrature grid.
pub const GRID_TAIL_MAX: f64 = 1e-6;

// ---------------------------------------------------------------------------
// Observable sets
// ---------------------------------------------------------------------------

/// Sample length a set applies to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Arity {
    Any,
    Exact(usize),
}

/// A named, pre-registered observable event: a pure predicate on samples.
#[derive(Clone)]
pub struct SetSpec<S: ?Sized> {
    name: String,
    arity: Arity,
    predicate: Arc<dyn Fn(&S) -> bool + Send + Sync>,
}

impl<S: ?Sized + 'static> SetSpec<S> {
    pub fn new(
        name: impl Into<String>,
        arity: Arity,
        predicate: impl Fn(&S) -> bool + Send + Sync + 'static,
    ) -> Self {
        SetSpec {
            name: name.into(),
            arity,
            predicate: Arc::new(predicate),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> Arity {
        self.arity
    }

    pub fn contains(&self, sample: &S) -> bool {
        (self.predicate)(sample)
    }

    pub fn check_arity(&self, n: usize) -> Result<()> {
        match self.arity {
            Arity::Any => Ok(()),
            Arity::Exact(expected) if expected == n => Ok(()),
            Arity::Exact(expected) => Err(Error::ArityMismatch { expected, got: n }),
        }
    }

    /// The complement event, for the Definition-3 symmetry check.
    pub fn complement(&self) -> SetSpec<S> {
        let inner = Arc::clone(&self.predicate);
        SetSpec {
            name: format!("not({})", self.name),
            arity: self.arity,
            predicate: Arc::new(move |s: &S| !inner(s)),
        }
    }
}

impl<S: ?Sized> fmt::Debug for SetSpec<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SetSpec")
            .field("name", &self.name)
            .field("arity", &self.arity)
            .finish()
    }
}

/// The set `{ |xbar - mu1| > |xbar - mu2| }` that distinguishes two means of
/// the equicorrelated model under any (sigma2, rho): its probability is below
/// 1/2 at mu1 and above 1/2 at mu2.
pub fn mu_distinguishing_set(mu1: f64, mu2: f64) -> Result<SetSpec<[f64]>> {
    if mu1 == mu2 {
        return Err(Error::EqualMeans);
    }
    Ok(SetSpec::new(
        format!("closer-to-mu2(mu1={mu1},mu2={mu2})"),
        Arity::Any,
        move |x: &[f64]| {
            let xbar = x.iter().sum::<f64>() / x.len() as f64;
            (xbar - mu1).abs() > (xbar - mu2).abs()
        },
    ))
}

/// The set `{ d(estimate, lambda2) <= d(lambda1, lambda2) / 3 }` (closed
/// ball) built from an estimator, the device behind
/// estimator-based distinguishability.
pub fn estimator_set<S: ?Sized + 'static>(
    name: impl Into<String>,
    estimator: impl Fn(&S) -> f64 + Send + Sync + 'static,
    lambda1: f64,
    lambda2: f64,
    metric: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
) -> Result<SetSpec<S>> {
    let eps = metric(lambda1, lambda2) / 3.0;
    if eps <= 0.0 {
        return Err(Error::EqualValues);
    }
    Ok(SetSpec::new(
        name,
        Arity::Any,
        move |s: &S| metric(estimator(s), lambda2) <= eps,
    ))
}

// ---------------------------------------------------------------------------
// Probability estimation and verdicts
// ---------------------------------------------------------------------------

/// Monte Carlo estimate of `P(A)` under the sampler, with a Clopper-Pearson
/// interval at `ci_level`.
pub fn estimate_set_prob<S, O, F>(
    sampler: F,
    set: &SetSpec<S>,
    n: usize,
    reps: usize,
    ci_level: f64,
    stream: Stream,
) -> Result<(f64, Interval)>
where
    S: ?Sized + 'static,
    O: Borrow<S>,
    F: Fn(usize, &mut rand_chacha::ChaCha8Rng) -> O + Sync,
{
    if reps < 100 {
        return Err(Error::InvalidSpec("need at least 100 replicates".into()));
    }
    set.check_arity(n)?;
    let hits: usize = (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream.child(r as u64).rng();
            let sample = sampler(n, &mut rng);
            usize::from(set.contains(sample.borrow()))
        })
        .sum();
    Ok((
        hits as f64 / reps as f64,
        clopper_pearson(hits as u64, reps as u64, ci_level),
    ))
}

/// Verdict on a candidate distinguishing set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Verdict {
    /// CI-certified `P1(A) <= alpha < P2(A)` with `alpha = beta` allowed.
    Distinguishing { alpha: f64, beta: f64 },
    /// Strict gap `alpha < beta` certified.
    GapDistinguishing { alpha: f64, beta: f64 },
    NotEstablished,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Distinguishing { alpha, beta } => {
                write!(f, "distinguishing(alpha={alpha},beta={beta})")
            }
            Verdict::GapDistinguishing { alpha, beta } => {
                write!(f, "gap-distinguishing(alpha={alpha},beta={beta})")
            }
            Verdict::NotEstablished => write!(f, "not-established"),
        }
    }
}

/// Estimated set probabilities under two samplers with the CI-based verdict.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DistinguishReport {
    pub set: String,
    pub n: usize,
    pub reps: usize,
    pub ci_level: f64,
    pub p1_hat: f64,
    pub ci1: Interval,
    pub p2_hat: f64,
    pub ci2: Interval,
    pub verdict: Verdict,
}

impl DistinguishReport {
    pub const CSV_HEADER: &'static str =
        "set,n,reps,p1_hat,p1_lo,p1_hi,p2_hat,p2_lo,p2_hi,verdict";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.set,
            self.n,
            self.reps,
            self.p1_hat,
            self.ci1.lo,
            self.ci1.hi,
            self.p2_hat,
            self.ci2.lo,
            self.ci2.hi,
            self.verdict
        )
    }
}

/// Estimate `P(A)` under both samplers and issue a verdict for the
/// thresholds `(alpha, beta)`: distinguishing evidence requires the upper CI
/// under sampler 1 to fall at or below `alpha` and the lower CI under
/// sampler 2 to clear `beta`.
#[allow(clippy::too_many_arguments)]
pub fn check_distinguishing<S, O1, O2, F1, F2>(
    set: &SetSpec<S>,
    sampler1: F1,
    sampler2: F2,
    n: usize,
    alpha: f64,
    beta: f64,
    reps: usize,
    ci_level: f64,
    stream: Stream,
) -> Result<DistinguishReport>
where
    S: ?Sized + 'static,
    O1: Borrow<S>,
    O2: Borrow<S>,
    F1: Fn(usize, &mut rand_chacha::ChaCha8Rng) -> O1 + Sync,
    F2: Fn(usize, &mut rand_chacha::ChaCha8Rng) -> O2 + Sync,
{
    if !(alpha > 0.0 && alpha <= beta && beta <= 1.0) {
        return Err(Error::InvalidSpec(
            "need 0 < alpha <= beta <= 1".into(),
        ));
    }
    let (p1_hat, ci1) = estimate_set_prob(sampler1, set, n, reps, ci_level, stream.child(1))?;
    let (p2_hat, ci2) = estimate_set_prob(sampler2, set, n, reps, ci_level, stream.child(2))?;
    let verdict = if ci1.hi <= alpha && ci2.lo > beta {
        if alpha < beta {
            Verdict::GapDistinguishing { alpha, beta }
        } else {
            Verdict::Distinguishing { alpha, beta }
        }
    } else {
        Verdict::NotEstablished
    };
    Ok(DistinguishReport {
        set: set.name().to_string(),
        n,
        reps,
        ci_level,
        p1_hat,
        ci1,
        p2_hat,
        ci2,
        verdict,
    })
}

/// Search the 99-point alpha grid {0.01, ..., 0.99} for a level at which the
/// CIs certify an (alpha, alpha, n)-distinguishing set; `None` when no grid
/// point works.
pub fn find_distinguishing_alpha(p1_ci: Interval, p2_ci: Interval) -> Option<f64> {
    (1..=99)
        .map(|i| i as f64 / 100.0)
        .find(|&a| p1_ci.hi <= a && p2_ci.lo > a)
}

// ---------------------------------------------------------------------------
// Power curve quadrature
// ---------------------------------------------------------------------------

/// One grid point of the power-curve difference, estimated with common
/// random numbers across the pair.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PowerCurvePoint {
    pub mu: f64,
    pub p1_hat: f64,
    pub p2_hat: f64,
    pub diff: f64,
    pub se_diff: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PowerCurveIntegral {
    pub points: Vec<PowerCurvePoint>,
    /// Trapezoid quadrature of the difference over the mu grid.
    pub integral: f64,
    /// Standard error of the quadrature (grid points independent).
    pub se: f64,
}

impl PowerCurveIntegral {
    /// Largest pointwise |difference| / SE on the grid; 0 where SE vanishes.
    pub fn max_pointwise_z(&self) -> f64 {
        self.points
            .iter()
            .map(|p| {
                if p.se_diff > 0.0 {
                    p.diff.abs() / p.se_diff
                } else {
                    0.0
                }
            })
            .fold(0.0, f64::max)
    }
}

/// Trapezoid quadrature over `mu` of `P_{mu, model1}(A) - P_{mu, model2}(A)`
/// for a residual-matched pair. The grid must be symmetric about zero and
/// wide enough that a mean law centered anywhere near the origin keeps all
/// but `1e-6` of its mass inside.
pub fn power_curve_integral(
    set: &SetSpec<[f64]>,
    pair: &MatchedPair,
    n: usize,
    mu_grid: &[f64],
    reps: usize,
    stream: Stream,
) -> Result<PowerCurveIntegral> {
    if mu_grid.len() < 2 || mu_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidSpec("mu grid must be increasing".into()));
    }
    set.check_arity(n)?;
    let (lo, hi) = (mu_grid[0], *mu_grid.last().expect("nonempty"));
    if (lo + hi).abs() > 1e-9 * (hi - lo).max(1.0) {
        return Err(Error::InvalidSpec("mu grid must be symmetric".into()));
    }
    for (rho, sigma2) in [(pair.rho1, pair.sigma1_2), (pair.rho2, pair.sigma2_2)] {
        let law = mean_law(&EquicorrSpec::new(n, 0.0, sigma2, rho)?)?;
        let sd = law.variance.sqrt();
        let inside =
            crate::stats::std_normal_cdf(hi / sd) - crate::stats::std_normal_cdf(lo / sd);
        if inside < 1.0 - GRID_TAIL_MAX {
            return Err(Error::GridTooNarrow {
                lo,
                hi,
                max_tail: GRID_TAIL_MAX,
            });
        }
    }

    let points: Vec<PowerCurvePoint> = mu_grid
        .par_iter()
        .enumerate()
        .map(|(i, &mu)| {
            let point_stream = stream.child(i as u64);
            let spec1 = EquicorrSpec::new(n, mu, pair.sigma1_2, pair.rho1).expect("validated");
            let spec2 = EquicorrSpec::new(n, mu, pair.sigma2_2, pair.rho2).expect("validated");
            let mut hits1 = 0usize;
            let mut hits2 = 0usize;
            let mut diff_sq = 0.0f64;
            for r in 0..reps {
                // Same child stream for both models: common random numbers,
                // so a degenerate pair cancels exactly.
                let rep = point_stream.child(r as u64);
                let x1 = sample_m1(&spec1, &mut rep.rng()).expect("validated");
                let x2 = sample_m1(&spec2, &mut rep.rng()).expect("validated");
                let h1 = set.contains(&x1);
                let h2 = set.contains(&x2);
                hits1 += h1 as usize;
                hits2 += h2 as usize;
                let d = h1 as i32 - h2 as i32;
                diff_sq += (d * d) as f64;
            }
            let rf = reps as f64;
            let p1_hat = hits1 as f64 / rf;
            let p2_hat = hits2 as f64 / rf;
            let diff = p1_hat - p2_hat;
            // Sample variance of the paired difference indicator.
            let var = (diff_sq / rf - diff * diff).max(0.0);
            PowerCurvePoint {
                mu,
                p1_hat,
                p2_hat,
                diff,
                se_diff: (var / rf).sqrt(),
            }
        })
        .collect();

    let mut integral = 0.0;
    let mut var = 0.0;
    for (i, p) in points.iter().enumerate() {
        let left = if i == 0 { mu_grid[0] } else { mu_grid[i - 1] };
        let right = if i + 1 == points.len() {
            mu_grid[i]
        } else {
            mu_grid[i + 1]
        };
        let w = (right - left) / 2.0;
        integral += w * p.diff;
        var += w * w * p.se_diff * p.se_diff;
    }
    Ok(PowerCurveIntegral {
        points,
        integral,
        se: var.sqrt(),
    })
}

// ---------------------------------------------------------------------------
// Residual law comparison
// ---------------------------------------------------------------------------

/// Default residual statistic: `sum (x_i - xbar)^2`.
pub fn sum_sq_dev(x: &[f64]) -> f64 {
    let xbar = x.iter().sum::<f64>() / x.len() as f64;
    x.iter().map(|v| (v - xbar) * (v - xbar)).sum()
}

/// Two-sample KS on a statistic of replicated draws from two equicorrelated
/// models (no matching requirement; use this for unmatched controls).
pub fn residual_law_ks<F>(
    spec1: &EquicorrSpec,
    spec2: &EquicorrSpec,
    statistic: F,
    reps: usize,
    stream: Stream,
) -> Result<KsReport>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    spec1.validate()?;
    spec2.validate()?;
    if spec1.n != spec2.n {
        return Err(Error::InvalidSpec("sample lengths differ".into()));
    }
    let draw = |spec: &EquicorrSpec, side: u64| -> Vec<f64> {
        (0..reps)
            .into_par_iter()
            .map(|r| {
                let mut rng = stream.child(side).child(r as u64).rng();
                statistic(&sample_m1(spec, &mut rng).expect("validated"))
            })
            .collect()
    };
    let s1 = draw(spec1, 1);
    let s2 = draw(spec2, 2);
    Ok(ks2_test(&s1, &s2))
}

/// Same comparison, but requires the pair to be residual-matched
/// (`(1 - rho1) sigma1^2 = (1 - rho2) sigma2^2` within 1e-12), under which
/// any statistic of the residual vector has identical law on both sides.
pub fn residual_law_equality<F>(
    spec1: &EquicorrSpec,
    spec2: &EquicorrSpec,
    statistic: F,
    reps: usize,
    stream: Stream,
) -> Result<KsReport>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let left = spec1.sigma_star2();
    let right = spec2.sigma_star2();
    if (left - right).abs() > 1e-12 {
        return Err(Error::NotMatched { left, right });
    }
    residual_law_ks(spec1, spec2, statistic, reps, stream)
}
