use serde::{Deserialize, Serialize};

/// Two-sample Kolmogorov-Smirnov result.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct KsReport {
    pub statistic: f64,
    pub p_value: f64,
    pub n1: usize,
    pub n2: usize,
}

impl KsReport {
    pub fn rejects_at(&self, level: f64) -> bool {
        self.p_value < level
    }
}

/// Two-sample KS statistic: sup over x of |F1(x) - F2(x)|.
pub fn ks2_statistic(xs: &[f64], ys: &[f64]) -> f64 {
    assert!(!xs.is_empty() && !ys.is_empty());
    let mut xs: Vec<f64> = xs.to_vec();
    let mut ys: Vec<f64> = ys.to_vec();
    xs.sort_unstable_by(|a, b| a.partial_cmp(b).expect("no NaN"));
    ys.sort_unstable_by(|a, b| a.partial_cmp(b).expect("no NaN"));

    let (n1, n2) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < xs.len() && j < ys.len() {
        let t = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] <= t {
            i += 1;
        }
        while j < ys.len() && ys[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / n1 - j as f64 / n2).abs());
    }
    d
}

/// Two-sample KS test with the asymptotic Kolmogorov p-value
/// (Stephens' small-sample correction on the effective sample size).
pub fn ks2_test(xs: &[f64], ys: &[f64]) -> KsReport {
    let statistic = ks2_statistic(xs, ys);
    let ne = (xs.len() * ys.len()) as f64 / (xs.len() + ys.len()) as f64;
    let sqrt_ne = ne.sqrt();
    let lambda = (sqrt_ne + 0.12 + 0.11 / sqrt_ne) * statistic;
    KsReport {
        statistic,
        p_value: kolmogorov_sf(lambda),
        n1: xs.len(),
        n2: ys.len(),
    }
}

/// Survival function of the Kolmogorov distribution,
/// `Q(lambda) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2)`.
fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=100 {
        let term = (-2.0 * (k as f64).powi(2) * lambda * lambda).exp();
        sum += sign * term;
        sign = -sign;
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn identical_samples_give_zero_statistic() {
        let xs = vec![1.0, 2.0, 3.0, 4.0];
        let ys = vec![4.0, 3.0, 2.0, 1.0];
        assert_eq!(ks2_statistic(&xs, &ys), 0.0);
    }

    #[test]
    fn known_statistic_values() {
        let xs = vec![1.0, 1.0, 4.0, 4.0];
        let ys = vec![1.0, 1.0, 1.0, 4.0];
        assert_relative_eq!(ks2_statistic(&xs, &ys), 0.25, epsilon = 1e-12);

        let xs = vec![0.42, 0.24, 0.86, 0.85, 0.82, 0.82, 0.25, 0.78, 0.13, 0.27];
        let ys = vec![0.24, 0.27, 0.87, 0.29, 0.57, 0.44, 0.5, 0.00, 0.56, 0.03];
        assert_relative_eq!(ks2_statistic(&xs, &ys), 0.4, epsilon = 1e-12);
    }

    #[test]
    fn disjoint_samples_give_statistic_one_and_tiny_p() {
        let xs: Vec<f64> = (0..200).map(f64::from).collect();
        let ys: Vec<f64> = (0..200).map(|i| f64::from(i) + 1000.0).collect();
        let report = ks2_test(&xs, &ys);
        assert_eq!(report.statistic, 1.0);
        assert!(report.p_value < 1e-10);
    }

    #[test]
    fn statistic_is_symmetric() {
        let xs = vec![0.1, 0.5, 0.9, 1.4];
        let ys = vec![0.2, 0.3, 1.1];
        assert_eq!(ks2_statistic(&xs, &ys), ks2_statistic(&ys, &xs));
    }
}
