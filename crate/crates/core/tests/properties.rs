//! Property tests for the deterministic cores: factorization, conditioning,
//! interval and ordering invariants.

use identlab_core::distinguish::{estimate_set_prob, Arity, SetSpec};
use identlab_core::gaussian::{
    conditional_given_mean, conditional_given_mean_schur, equicorr_mvn, EquicorrSpec,
};
use identlab_core::kmeans::{lex_cmp, lloyd, LloydConfig};
use identlab_core::mat::{cholesky, Mat};
use identlab_core::stats::{clopper_pearson, ks2_statistic};
use identlab_core::Stream;
use proptest::prelude::*;

fn small_dim() -> impl Strategy<Value = usize> {
    2usize..8
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cholesky_reconstructs_random_pd_matrices(
        n in small_dim(),
        entries in prop::collection::vec(-2.0f64..2.0, 64),
    ) {
        // A^T A + I is symmetric positive definite.
        let a = Mat::from_fn(n, n, |i, j| entries[i * n + j]);
        let s = Mat::from_fn(n, n, |i, j| {
            let mut acc = if i == j { 1.0 } else { 0.0 };
            for k in 0..n {
                acc += a[(k, i)] * a[(k, j)];
            }
            acc
        });
        let f = cholesky(&s).unwrap();
        let err = f.reconstruct().max_abs_diff(&s);
        prop_assert!(err < 1e-9 * s.max_abs().max(1.0));
    }

    #[test]
    fn closed_form_conditional_equals_schur_conditioning(
        n in 2usize..40,
        rho in 0.0f64..0.95,
        sigma2 in 0.05f64..5.0,
        mu in -5.0f64..5.0,
        xbar in -5.0f64..5.0,
    ) {
        let spec = EquicorrSpec::new(n, mu, sigma2, rho).unwrap();
        let direct = conditional_given_mean(&spec, xbar).unwrap();
        let schur = conditional_given_mean_schur(&spec, xbar).unwrap();
        let mean_dev = direct
            .mean()
            .iter()
            .zip(schur.mean())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        prop_assert!(mean_dev < 1e-9);
        prop_assert!(direct.cov().max_abs_diff(schur.cov()) < 1e-9);
    }

    #[test]
    fn conditional_is_mu_invariant_and_rows_sum_to_zero(
        n in 2usize..20,
        rho in 0.0f64..0.95,
        sigma2 in 0.05f64..5.0,
        mu in -10.0f64..10.0,
        xbar in -5.0f64..5.0,
    ) {
        let a = conditional_given_mean(&EquicorrSpec::new(n, 0.0, sigma2, rho).unwrap(), xbar).unwrap();
        let b = conditional_given_mean(&EquicorrSpec::new(n, mu, sigma2, rho).unwrap(), xbar).unwrap();
        prop_assert_eq!(a.clone(), b);
        for i in 0..n {
            let row_sum: f64 = (0..n).map(|j| a.cov()[(i, j)]).sum();
            prop_assert!(row_sum.abs() < 1e-12 * sigma2.max(1.0));
        }
    }

    #[test]
    fn matched_pairs_share_the_conditional(
        n in 2usize..20,
        rho1 in 0.0f64..0.9,
        rho2 in 0.0f64..0.9,
        sigma1_2 in 0.1f64..3.0,
        xbar in -3.0f64..3.0,
    ) {
        let sigma2_2 = identlab_core::models::matched_pair(rho1, rho2, sigma1_2).unwrap();
        let a = conditional_given_mean(&EquicorrSpec::new(n, 1.0, sigma1_2, rho1).unwrap(), xbar).unwrap();
        let b = conditional_given_mean(&EquicorrSpec::new(n, -2.0, sigma2_2, rho2).unwrap(), xbar).unwrap();
        prop_assert!(a.cov().max_abs_diff(b.cov()) < 1e-12);
    }

    #[test]
    fn equicorr_matrix_fields(
        n in 2usize..30,
        rho in 0.0f64..0.95,
        sigma2 in 0.05f64..5.0,
    ) {
        let d = equicorr_mvn(&EquicorrSpec::new(n, 0.3, sigma2, rho).unwrap()).unwrap();
        for i in 0..n {
            for j in 0..n {
                let want = if i == j { sigma2 } else { rho * sigma2 };
                prop_assert!((d.cov()[(i, j)] - want).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn clopper_pearson_brackets_and_nests(
        k in 0u64..200,
        extra in 1u64..200,
    ) {
        let n = k + extra;
        let narrow = clopper_pearson(k, n, 0.9);
        let wide = clopper_pearson(k, n, 0.99);
        let p_hat = k as f64 / n as f64;
        prop_assert!(narrow.contains(p_hat));
        prop_assert!(wide.lo <= narrow.lo && narrow.hi <= wide.hi);
    }

    #[test]
    fn ks_statistic_bounded_and_symmetric(
        xs in prop::collection::vec(-5.0f64..5.0, 2..40),
        ys in prop::collection::vec(-5.0f64..5.0, 2..40),
    ) {
        let d = ks2_statistic(&xs, &ys);
        prop_assert!((0.0..=1.0).contains(&d));
        prop_assert_eq!(d, ks2_statistic(&ys, &xs));
    }

    #[test]
    fn lloyd_centers_come_out_lex_sorted(
        seed in 0u64..500,
        n in 4usize..16,
        k in 2usize..4,
    ) {
        prop_assume!(n >= k);
        let mut rng = Stream::new(seed).rng();
        use rand::Rng;
        let data: Mat<f64> = Mat::from_fn(n, 2, |_, _| rng.random::<f64>() * 10.0 - 5.0);
        let fit = lloyd(&data, k, &LloydConfig { restarts: 4, ..Default::default() }, Stream::new(seed ^ 7)).unwrap();
        for w in fit.centers.windows(2) {
            prop_assert_ne!(lex_cmp(&w[0], &w[1]), std::cmp::Ordering::Greater);
        }
        // Labels are nearest-center assignments; objective is consistent.
        let recomputed = fit.recompute_objective(&data);
        prop_assert!((recomputed - fit.objective).abs() <= 1e-9 * fit.objective.max(1e-12));
    }

    #[test]
    fn set_probability_estimates_stay_in_unit_interval(
        seed in 0u64..100,
        threshold in -1.0f64..1.0,
    ) {
        let set = SetSpec::new("mean-above", Arity::Any, move |x: &[f64]| {
            x.iter().sum::<f64>() / x.len() as f64 > threshold
        });
        let sampler = |n: usize, rng: &mut rand_chacha::ChaCha8Rng| -> Vec<f64> {
            use rand::Rng;
            (0..n).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect()
        };
        let (p, ci) = estimate_set_prob(sampler, &set, 7, 200, 0.95, Stream::new(seed)).unwrap();
        prop_assert!((0.0..=1.0).contains(&p));
        prop_assert!(ci.lo <= p && p <= ci.hi);
    }
}
