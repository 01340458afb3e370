use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ContinuousCDF};

/// Two-sided confidence interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

/// Clopper-Pearson exact binomial interval at the given two-sided level.
///
/// Endpoints are the usual Beta quantiles, with the conventional closed
/// endpoints at k = 0 and k = n.
pub fn clopper_pearson(successes: u64, trials: u64, level: f64) -> Interval {
    assert!(successes <= trials && trials > 0);
    assert!((0.0..1.0).contains(&level) && level > 0.0);
    let alpha = 1.0 - level;
    let (k, n) = (successes as f64, trials as f64);
    let lo = if successes == 0 {
        0.0
    } else {
        Beta::new(k, n - k + 1.0)
            .expect("valid Beta")
            .inverse_cdf(alpha / 2.0)
    };
    let hi = if successes == trials {
        1.0
    } else {
        Beta::new(k + 1.0, n - k)
            .expect("valid Beta")
            .inverse_cdf(1.0 - alpha / 2.0)
    };
    Interval { lo, hi }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn zero_successes_has_closed_lower_endpoint() {
        let ci = clopper_pearson(0, 100, 0.99);
        assert_eq!(ci.lo, 0.0);
        // Upper bound solves (1-p)^n = alpha/2.
        assert_relative_eq!(ci.hi, 1.0 - (0.005f64).powf(1.0 / 100.0), epsilon = 1e-9);
    }

    #[test]
    fn symmetric_case() {
        let ci = clopper_pearson(50, 100, 0.95);
        assert!(ci.lo < 0.5 && 0.5 < ci.hi);
        // R: binom.test(50, 100)$conf.int -> [0.3983211, 0.6016789]
        assert_relative_eq!(ci.lo, 0.3983211, epsilon = 1e-4);
        assert_relative_eq!(ci.hi, 0.6016789, epsilon = 1e-4);
    }

    #[test]
    fn interval_always_brackets_the_point_estimate() {
        for &(k, n) in &[(0u64, 10u64), (1, 10), (5, 10), (10, 10), (250, 1000)] {
            let ci = clopper_pearson(k, n, 0.99);
            let p_hat = k as f64 / n as f64;
            assert!(ci.contains(p_hat), "CI {ci:?} misses p_hat {p_hat}");
        }
    }
}
