//! Estimators whose consistency or inconsistency the experiments probe:
//! the known-mean correlation MLE, pooled variance components, and a
//! Monte-Carlo-calibrated change-point scan for binary sequences.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Stream;
use crate::stats::Moments;

// ---------------------------------------------------------------------------
// Correlation MLE with known mean
// ---------------------------------------------------------------------------

/// Constant-correlation estimate from a single equicorrelated vector with
/// known mean. `lambda1_hat` and `lambda2_hat` are the variance estimates
/// along the mean direction and its orthogonal complement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RhoEstimate {
    pub rho_hat: f64,
    pub lambda1_hat: f64,
    pub lambda2_hat: f64,
}

/// Upper clip for `rho_hat`; the model keeps rho inside [0, 1).
pub const RHO_CLIP_MAX: f64 = 1.0 - 1e-9;

/// Maximum likelihood estimate of `(sigma2, rho)` with `mu` known, reported
/// through `rho`. The eigenstructure of the equicorrelated covariance splits
/// the likelihood into the mean direction (eigenvalue `sigma2 (1 + (n-1) rho)`,
/// estimated by `n (xbar - mu)^2`) and its complement (eigenvalue
/// `sigma2 (1 - rho)`, estimated by the sample variance); mapping the free
/// per-direction maximizers back and clipping to [0, 1 - 1e-9] gives the
/// constrained MLE.
pub fn rho_mle_known_mu(x: &[f64], mu: f64) -> Result<RhoEstimate> {
    let n = x.len();
    if n < 2 {
        return Err(Error::InvalidSpec("need at least two observations".into()));
    }
    let nf = n as f64;
    let xbar = x.iter().sum::<f64>() / nf;
    let lambda1_hat = nf * (xbar - mu) * (xbar - mu);
    let ss = x.iter().map(|v| (v - xbar) * (v - xbar)).sum::<f64>();
    let lambda2_hat = ss / (nf - 1.0);
    if lambda1_hat == 0.0 && lambda2_hat == 0.0 {
        return Err(Error::DegenerateSample);
    }
    let rho_hat =
        ((lambda1_hat - lambda2_hat) / (lambda1_hat + (nf - 1.0) * lambda2_hat)).clamp(0.0, RHO_CLIP_MAX);
    Ok(RhoEstimate {
        rho_hat,
        lambda1_hat,
        lambda2_hat,
    })
}

/// Profile log-likelihood of `(sigma2, rho)` for an equicorrelated vector
/// with known mean, up to a constant. Grid-search oracle material.
pub fn equicorr_loglik_known_mu(x: &[f64], mu: f64, sigma2: f64, rho: f64) -> f64 {
    let n = x.len() as f64;
    let xbar = x.iter().sum::<f64>() / n;
    let u1_sq = n * (xbar - mu) * (xbar - mu);
    let ss = x.iter().map(|v| (v - xbar) * (v - xbar)).sum::<f64>();
    let l1 = sigma2 * (1.0 + (n - 1.0) * rho);
    let l2 = sigma2 * (1.0 - rho);
    -0.5 * (l1.ln() + u1_sq / l1 + (n - 1.0) * l2.ln() + ss / l2)
}

// ---------------------------------------------------------------------------
// Variance components in M2
// ---------------------------------------------------------------------------

/// Pooled within-group variance plus the mean estimates it does not help.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarCompEstimate {
    pub tau2_2_hat: f64,
    pub grand_mean: f64,
    pub group_means: Vec<f64>,
}

/// `tau2_2_hat = sum_i sum_j (x_ij - xbar_i)^2 / (n - m)`, the standard
/// consistent estimator of the within-group variance.
pub fn var_components_m2(groups: &[Vec<f64>]) -> Result<VarCompEstimate> {
    if groups.is_empty() || groups.iter().all(|g| g.len() < 2) {
        return Err(Error::InsufficientData);
    }
    if groups.iter().any(|g| g.is_empty()) {
        return Err(Error::InvalidSpec("empty group".into()));
    }
    let m = groups.len();
    let n: usize = groups.iter().map(Vec::len).sum();
    let mut within = 0.0;
    let mut total = 0.0;
    let mut group_means = Vec::with_capacity(m);
    for g in groups {
        let mean = g.iter().sum::<f64>() / g.len() as f64;
        group_means.push(mean);
        within += g.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>();
        total += g.iter().sum::<f64>();
    }
    Ok(VarCompEstimate {
        tau2_2_hat: within / (n - m) as f64,
        grand_mean: total / n as f64,
        group_means,
    })
}

// ---------------------------------------------------------------------------
// Change-point scan
// ---------------------------------------------------------------------------

/// Scan outcome: the maximal standardized split statistic, where it occurred,
/// and its Monte-Carlo p-value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub statistic: f64,
    /// Number of observations before the best split (0 when degenerate).
    pub split_index: usize,
    pub p_value: f64,
}

/// Minimum Monte-Carlo calibration size for the scan p-value.
pub const MIN_NULL_REPS: usize = 2000;

/// Max over splits of the absolute difference in means before/after,
/// standardized by the pooled Bernoulli variance. Returns (statistic, split).
pub fn scan_statistic(x: &[u8]) -> (f64, usize) {
    let n = x.len();
    let total: usize = x.iter().map(|&b| b as usize).sum();
    let p_hat = total as f64 / n as f64;
    let pooled = p_hat * (1.0 - p_hat);
    if pooled == 0.0 {
        return (0.0, 0);
    }
    let mut best = (0.0f64, 0usize);
    let mut prefix = 0usize;
    for t in 1..n {
        prefix += x[t - 1] as usize;
        let (tf, nf) = (t as f64, n as f64);
        let left = prefix as f64 / tf;
        let right = (total - prefix) as f64 / (nf - tf);
        let z = (left - right).abs() / (pooled * (1.0 / tf + 1.0 / (nf - tf))).sqrt();
        if z > best.0 {
            best = (z, t);
        }
    }
    best
}

/// Scan a binary sequence for a single change point. The p-value is the
/// fraction of `null_reps` i.i.d. Bernoulli(p_hat) sequences whose scan
/// statistic reaches the observed one (parametric bootstrap calibration).
pub fn changepoint_scan(x: &[u8], null_reps: usize, stream: Stream) -> Result<ScanResult> {
    if x.len() < 4 {
        return Err(Error::InvalidSpec("need at least 4 observations".into()));
    }
    if null_reps < MIN_NULL_REPS {
        return Err(Error::InvalidSpec(format!(
            "null_reps must be at least {MIN_NULL_REPS}"
        )));
    }
    debug_assert!(x.iter().all(|&b| b <= 1));
    let n = x.len();
    let total: usize = x.iter().map(|&b| b as usize).sum();
    if total == 0 || total == n {
        // All observations equal: no split statistic is defined.
        return Ok(ScanResult {
            statistic: 0.0,
            split_index: 0,
            p_value: 1.0,
        });
    }
    let (statistic, split_index) = scan_statistic(x);
    let p_hat = total as f64 / n as f64;
    let bern = rand::distr::Bernoulli::new(p_hat).expect("p_hat in (0,1)");
    let hits: usize = (0..null_reps)
        .into_par_iter()
        .map(|r| {
            use rand::distr::Distribution;
            let mut rng = stream.child(r as u64).rng();
            let null: Vec<u8> = (0..n).map(|_| bern.sample(&mut rng) as u8).collect();
            usize::from(scan_statistic(&null).0 >= statistic)
        })
        .sum();
    Ok(ScanResult {
        statistic,
        split_index,
        p_value: hits as f64 / null_reps as f64,
    })
}

/// Interquartile range of `rho_hat` over replicated draws; shared by the
/// non-consistency experiments.
pub fn rho_hat_iqr<F>(replicates: usize, stream: Stream, draw: F) -> (f64, Moments)
where
    F: Fn(Stream) -> f64 + Sync,
{
    let vals: Vec<f64> = (0..replicates)
        .into_par_iter()
        .map(|r| draw(stream.child(r as u64)))
        .collect();
    let mut acc = Moments::new();
    acc.extend(vals.iter().copied());
    (crate::stats::iqr(&vals), acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn xbar_equal_mu_clips_rho_to_zero() {
        // xbar = 0 = mu, so lambda1_hat = 0 and the clip lands on 0.
        let est = rho_mle_known_mu(&[-1.0, 1.0, -2.0, 2.0], 0.0).unwrap();
        assert_eq!(est.lambda1_hat, 0.0);
        assert_eq!(est.rho_hat, 0.0);
    }

    #[test]
    fn degenerate_sample_is_an_error() {
        assert!(matches!(
            rho_mle_known_mu(&[3.0, 3.0, 3.0], 3.0),
            Err(Error::DegenerateSample)
        ));
        // All equal but away from mu is fine: rho clips to the upper bound.
        let est = rho_mle_known_mu(&[3.0, 3.0, 3.0], 0.0).unwrap();
        assert_relative_eq!(est.rho_hat, RHO_CLIP_MAX, epsilon = 1e-15);
    }

    /// Oracle log-likelihood: the multivariate normal density evaluated
    /// through the generic covariance Cholesky, independent of the
    /// eigen-decomposition algebra the estimator uses.
    fn dense_loglik(x: &[f64], mu: f64, sigma2: f64, rho: f64) -> f64 {
        use crate::gaussian::{equicorr_mvn, EquicorrSpec};
        use crate::mat::cholesky;
        let spec = EquicorrSpec::new(x.len(), mu, sigma2, rho).unwrap();
        let d = equicorr_mvn(&spec).unwrap();
        let f = cholesky(d.cov()).unwrap();
        let centered: Vec<f64> = x.iter().map(|v| v - mu).collect();
        let solved = f.solve(&centered);
        let quad: f64 = centered.iter().zip(&solved).map(|(a, b)| a * b).sum();
        let logdet: f64 = (0..x.len()).map(|i| f.lower()[(i, i)].ln()).sum::<f64>() * 2.0;
        -0.5 * (logdet + quad)
    }

    #[test]
    fn estimator_matches_grid_refine_likelihood_oracle() {
        // Grid over (sigma2, rho) with six rounds of local refinement.
        for x in [
            vec![-1.0, 0.0, 1.0, 4.0],
            vec![2.0, 3.0, 2.5, 2.8],
            vec![0.3, -0.2, 0.8, 1.4, 0.1],
        ] {
            let est = rho_mle_known_mu(&x, 0.0).unwrap();
            let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
            let mut lo = (1e-3, 0.0);
            let mut hi = (50.0, 1.0 - 1e-9);
            for _ in 0..6 {
                let g = 200;
                for i in 0..=g {
                    for j in 0..=g {
                        let s2 = lo.0 + (hi.0 - lo.0) * i as f64 / g as f64;
                        let rho = lo.1 + (hi.1 - lo.1) * j as f64 / g as f64;
                        if s2 <= 0.0 || !(0.0..1.0).contains(&rho) {
                            continue;
                        }
                        let ll = dense_loglik(&x, 0.0, s2, rho);
                        if ll > best.0 {
                            best = (ll, s2, rho);
                        }
                    }
                }
                let ds = (hi.0 - lo.0) / 20.0;
                let dr = (hi.1 - lo.1) / 20.0;
                lo = ((best.1 - ds).max(1e-6), (best.2 - dr).max(0.0));
                hi = ((best.1 + ds).min(100.0), (best.2 + dr).min(1.0 - 1e-9));
            }
            assert!(
                (est.rho_hat - best.2).abs() < 1e-6,
                "closed form {} vs oracle {} on {x:?}",
                est.rho_hat,
                best.2
            );
            // The closed form must not lose likelihood against the oracle.
            let implied_sigma2 = if est.rho_hat == 0.0 {
                (est.lambda1_hat + (x.len() as f64 - 1.0) * est.lambda2_hat) / x.len() as f64
            } else {
                est.lambda2_hat / (1.0 - est.rho_hat)
            };
            let ll_closed = dense_loglik(&x, 0.0, implied_sigma2, est.rho_hat);
            assert!(
                ll_closed >= best.0 - 1e-9,
                "closed-form likelihood {ll_closed} below oracle {}",
                best.0
            );
        }
    }

    #[test]
    fn rho_estimate_is_permutation_invariant() {
        // Equal up to summation-order rounding.
        let x = [0.4, -1.2, 3.3, 0.0, 2.2];
        let mut perm = x;
        perm.reverse();
        perm.swap(1, 3);
        let a = rho_mle_known_mu(&x, 0.5).unwrap();
        let b = rho_mle_known_mu(&perm, 0.5).unwrap();
        assert_relative_eq!(a.rho_hat, b.rho_hat, max_relative = 1e-12);
        assert_relative_eq!(a.lambda1_hat, b.lambda1_hat, max_relative = 1e-12);
        assert_relative_eq!(a.lambda2_hat, b.lambda2_hat, max_relative = 1e-12);
    }

    #[test]
    fn single_pair_variance() {
        let est = var_components_m2(&[vec![0.0, 2.0]]).unwrap();
        assert_relative_eq!(est.tau2_2_hat, 2.0, epsilon = 1e-15);
        assert_relative_eq!(est.grand_mean, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn within_variance_ignores_group_shifts() {
        let base = vec![vec![0.1, -0.4, 0.9], vec![1.2, 0.3]];
        let shifted: Vec<Vec<f64>> = base
            .iter()
            .enumerate()
            .map(|(i, g)| g.iter().map(|x| x + 100.0 * (i as f64 + 1.0)).collect())
            .collect();
        let a = var_components_m2(&base).unwrap();
        let b = var_components_m2(&shifted).unwrap();
        assert_relative_eq!(a.tau2_2_hat, b.tau2_2_hat, epsilon = 1e-9);
    }

    #[test]
    fn singleton_groups_are_insufficient() {
        assert!(matches!(
            var_components_m2(&[vec![1.0], vec![2.0]]),
            Err(Error::InsufficientData)
        ));
    }

    #[test]
    fn scan_finds_the_obvious_split() {
        let x = [0, 0, 0, 0, 1, 1, 1, 1];
        let res = changepoint_scan(&x, 2000, Stream::new(3)).unwrap();
        assert_eq!(res.split_index, 4);
        assert!(res.p_value < 0.1, "p = {}", res.p_value);
    }

    #[test]
    fn constant_sequence_gets_p_one() {
        let x = [1u8; 16];
        let res = changepoint_scan(&x, 2000, Stream::new(4)).unwrap();
        assert_eq!(res.p_value, 1.0);
        assert_eq!(res.statistic, 0.0);
    }

    #[test]
    fn undersized_calibration_is_rejected() {
        let x = [0, 1, 0, 1, 1];
        assert!(changepoint_scan(&x, 100, Stream::new(5)).is_err());
    }
}
