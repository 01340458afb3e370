//! Monte Carlo law-equality invariants: the decomposition sampler against the
//! Cholesky sampler, matched-pair indistinguishability for location-invariant
//! statistics, interval coverage, and scan p-value calibration.

use identlab_core::distinguish::{
    check_distinguishing, estimate_set_prob, estimator_set, find_distinguishing_alpha,
    residual_law_equality, sum_sq_dev, Arity, SetSpec, Verdict,
};
use identlab_core::estimators::{changepoint_scan, rho_mle_known_mu};
use identlab_core::gaussian::{equicorr_mvn, EquicorrSpec};
use identlab_core::models::{sample_binary, sample_m1, BinarySpec, BinaryVariant, MatchedPair};
use identlab_core::stats::{clopper_pearson, ks2_test, Moments};
use identlab_core::Stream;
use rand::Rng;

#[test]
fn decomposition_sampler_matches_cholesky_sampler_in_law() {
    let spec = EquicorrSpec::new(5, 0.7, 1.3, 0.4).unwrap();
    let d = equicorr_mvn(&spec).unwrap();
    let reps = 10_000;
    let stream = Stream::new(101);

    let mut coord_a = Vec::with_capacity(reps);
    let mut mean_a = Vec::with_capacity(reps);
    let mut rng_a = stream.child(0).rng();
    for _ in 0..reps {
        let x = sample_m1(&spec, &mut rng_a).unwrap();
        coord_a.push(x[0]);
        mean_a.push(x.iter().sum::<f64>() / x.len() as f64);
    }

    let mut rng_b = stream.child(1).rng();
    let draws = d.sample(reps, &mut rng_b).unwrap();
    let coord_b: Vec<f64> = (0..reps).map(|r| draws[(r, 0)]).collect();
    let mean_b: Vec<f64> = (0..reps)
        .map(|r| draws.row(r).iter().sum::<f64>() / 5.0)
        .collect();

    let ks_coord = ks2_test(&coord_a, &coord_b);
    let ks_mean = ks2_test(&mean_a, &mean_b);
    assert!(ks_coord.p_value > 0.001, "coordinate KS rejected: {ks_coord:?}");
    assert!(ks_mean.p_value > 0.001, "mean KS rejected: {ks_mean:?}");
}

#[test]
fn cholesky_sampler_moments_converge() {
    // Each covariance entry within 4 MC standard errors at 1e5 draws.
    let spec = EquicorrSpec::new(3, 0.0, 1.0, 0.5).unwrap();
    let d = equicorr_mvn(&spec).unwrap();
    let reps = 100_000;
    let draws = d.sample(reps, &mut Stream::new(103).rng()).unwrap();
    let nf = reps as f64;
    for i in 0..3 {
        for j in 0..3 {
            let (mut si, mut sj, mut sij) = (0.0, 0.0, 0.0);
            for r in 0..reps {
                si += draws[(r, i)];
                sj += draws[(r, j)];
                sij += draws[(r, i)] * draws[(r, j)];
            }
            let cov = sij / nf - (si / nf) * (sj / nf);
            let want = d.cov()[(i, j)];
            // Var of a sample covariance entry ~ (s_ii s_jj + s_ij^2) / n.
            let se = ((d.cov()[(i, i)] * d.cov()[(j, j)] + want * want) / nf).sqrt();
            assert!(
                (cov - want).abs() < 4.0 * se,
                "cov[{i}{j}] = {cov} vs {want} (se {se})"
            );
        }
    }
}

#[test]
fn location_invariant_sets_cannot_separate_matched_pairs() {
    let pair = MatchedPair::new(0.2, 1.0, 0.6).unwrap();
    let reps = 10_000;
    for (set_idx, n) in [(0u64, 10usize), (1, 100), (2, 1000)] {
        let (s1, s2) = pair.specs(n, 0.0).unwrap();
        // Residual second moment crossing a threshold near its median.
        let threshold = 0.8 * (n as f64 - 1.0);
        let set = SetSpec::new(
            "residual-energy-above-median",
            Arity::Exact(n),
            move |x: &[f64]| sum_sq_dev(x) > threshold,
        );
        let stream = Stream::new(200 + set_idx);
        let (p1, _) = estimate_set_prob(
            |_n, rng: &mut rand_chacha::ChaCha8Rng| sample_m1(&s1, rng).unwrap(),
            &set,
            n,
            reps,
            0.99,
            stream.child(1),
        )
        .unwrap();
        let (p2, _) = estimate_set_prob(
            |_n, rng: &mut rand_chacha::ChaCha8Rng| sample_m1(&s2, rng).unwrap(),
            &set,
            n,
            reps,
            0.99,
            stream.child(2),
        )
        .unwrap();
        let se = ((p1 * (1.0 - p1) + p2 * (1.0 - p2)) / reps as f64).sqrt();
        assert!(
            (p1 - p2).abs() < 3.0 * se.max(1e-4),
            "n={n}: p1={p1} p2={p2} differ beyond 3 SE"
        );
    }
}

#[test]
fn residual_threshold_sets_never_reach_a_verdict_on_matched_pairs() {
    // 20-point threshold grid over the residual variance statistic.
    let pair = MatchedPair::new(0.2, 1.0, 0.6).unwrap();
    let n = 100;
    let (s1, s2) = pair.specs(n, 0.0).unwrap();
    let reps = 4000;
    for (i, c) in (0..20).map(|i| (i, 0.4 + 0.05 * i as f64)).collect::<Vec<_>>() {
        let set = SetSpec::new(
            format!("residual-var-above-{c:.2}"),
            Arity::Exact(n),
            move |x: &[f64]| sum_sq_dev(x) / (x.len() as f64 - 1.0) > c,
        );
        let stream = Stream::new(300 + i as u64);
        let (_, ci1) = estimate_set_prob(
            |_n, rng: &mut rand_chacha::ChaCha8Rng| sample_m1(&s1, rng).unwrap(),
            &set,
            n,
            reps,
            0.99,
            stream.child(1),
        )
        .unwrap();
        let (_, ci2) = estimate_set_prob(
            |_n, rng: &mut rand_chacha::ChaCha8Rng| sample_m1(&s2, rng).unwrap(),
            &set,
            n,
            reps,
            0.99,
            stream.child(2),
        )
        .unwrap();
        assert!(
            find_distinguishing_alpha(ci1, ci2).is_none()
                && find_distinguishing_alpha(ci2, ci1).is_none(),
            "threshold {c} separated a matched pair"
        );
    }
}

#[test]
fn known_mu_rho_estimates_do_distinguish_matched_pairs() {
    // With mu known the mean direction is informative: the rho_hat laws under
    // a matched pair differ, unlike any location-invariant statistic.
    let pair = MatchedPair::new(0.2, 1.0, 0.6).unwrap();
    let n = 1000;
    let (s1, s2) = pair.specs(n, 0.0).unwrap();
    let reps = 4000;
    let stream = Stream::new(401);
    let draw = |spec: &EquicorrSpec, side: u64| -> Vec<f64> {
        let mut rng = stream.child(side).rng();
        (0..reps)
            .map(|_| {
                let x = sample_m1(spec, &mut rng).unwrap();
                rho_mle_known_mu(&x, 0.0).unwrap().rho_hat
            })
            .collect()
    };
    let ks = ks2_test(&draw(&s1, 1), &draw(&s2, 2));
    assert!(ks.p_value < 0.001, "rho_hat laws did not separate: {ks:?}");

    // Contrast: the location-invariant residual statistic must not separate.
    let ks_residual = residual_law_equality(&s1, &s2, sum_sq_dev, reps, stream.child(3)).unwrap();
    assert!(ks_residual.p_value > 0.001, "{ks_residual:?}");
}

#[test]
fn clopper_pearson_simulated_coverage() {
    // Coverage at p in {0.01, 0.5} at least nominal - 1% over 2000 trials.
    let level = 0.99;
    let trials = 2000;
    let n = 500;
    for (case, p) in [(0u64, 0.01f64), (1, 0.5)] {
        let mut rng = Stream::new(500 + case).rng();
        let mut covered = 0usize;
        for _ in 0..trials {
            let k = (0..n).filter(|_| rng.random::<f64>() < p).count();
            if clopper_pearson(k as u64, n as u64, level).contains(p) {
                covered += 1;
            }
        }
        let coverage = covered as f64 / trials as f64;
        assert!(
            coverage >= level - 0.01,
            "coverage {coverage} below {} at p={p}",
            level - 0.01
        );
    }
}

#[test]
fn scan_p_values_are_conservative_under_m3() {
    // P(p_value <= level) <= level + 2 SE on a grid of levels.
    let spec = BinarySpec::new(BinaryVariant::M3, 0.4);
    let sequences = 400;
    let len = 100;
    let stream = Stream::new(601);
    let p_values: Vec<f64> = (0..sequences)
        .map(|i| {
            let mut rng = stream.child(i as u64).rng();
            let x = sample_binary(&spec, len, &mut rng).unwrap();
            changepoint_scan(&x, 2000, stream.child(10_000 + i as u64))
                .unwrap()
                .p_value
        })
        .collect();
    for level in [0.01, 0.05, 0.1, 0.2] {
        let rate = p_values.iter().filter(|&&p| p <= level).count() as f64 / sequences as f64;
        let se = (level * (1.0 - level) / sequences as f64).sqrt();
        assert!(
            rate <= level + 2.0 * se,
            "rate {rate} at level {level} exceeds {level} + 2 SE"
        );
    }
}

#[test]
fn consistent_estimator_sets_reach_verdicts_on_a_doubling_ladder() {
    // Sample mean of i.i.d. N(theta, 1), theta = 0 vs 3: the epsilon-ball set
    // around lambda2 becomes (0.01, 0.01, n)-distinguishing and stays so.
    let set = estimator_set(
        "mean-in-ball-around-3",
        |x: &[f64]| x.iter().sum::<f64>() / x.len() as f64,
        0.0,
        3.0,
        |a, b| (a - b).abs(),
    )
    .unwrap();
    let sampler = |theta: f64| {
        move |n: usize, rng: &mut rand_chacha::ChaCha8Rng| -> Vec<f64> {
            (0..n)
                .map(|_| theta + rng.sample::<f64, _>(rand_distr::StandardNormal))
                .collect()
        }
    };
    let mut attained = Vec::new();
    for (i, n) in [25usize, 50, 100, 200].into_iter().enumerate() {
        let report = check_distinguishing(
            &set,
            sampler(0.0),
            sampler(3.0),
            n,
            0.01,
            0.01,
            10_000,
            0.99,
            Stream::new(700 + i as u64),
        )
        .unwrap();
        attained.push(matches!(report.verdict, Verdict::Distinguishing { .. }));
    }
    // Monotone attainment: once reached, the verdict persists up the ladder.
    let first = attained.iter().position(|&b| b).expect("never attained");
    assert!(attained[first..].iter().all(|&b| b));
    assert!(attained[attained.len() - 1], "largest n must qualify");
}

#[test]
fn moments_accumulator_agrees_with_direct_mean() {
    let mut rng = Stream::new(801).rng();
    let xs: Vec<f64> = (0..10_000).map(|_| rng.random::<f64>()).collect();
    let mut acc = Moments::new();
    acc.extend(xs.iter().copied());
    assert!((acc.mean() - 0.5).abs() < 0.02);
    assert!((acc.variance() - 1.0 / 12.0).abs() < 0.005);
}
