//! Acceptance suite: every criterion runs its preset end to end at the
//! stated tolerances and prints one pass/fail line. Criteria include wall
//! time limits; replicate substreams make every run reproducible.

use std::collections::HashMap;
use std::time::Instant;

use identlab::{presets, report::RunSummary};

struct Criterion {
    summary: RunSummary,
    elapsed_secs: f64,
}

fn run_preset(name: &str) -> Criterion {
    let config = presets::by_name(name).expect("preset exists");
    let dir = tempfile::tempdir().expect("tempdir");
    let start = Instant::now();
    let summary = identlab::run_to_dir(&config, dir.path(), None, false).expect("run succeeds");
    Criterion {
        summary,
        elapsed_secs: start.elapsed().as_secs_f64(),
    }
}

fn assert_checks(criterion: &str, run: &Criterion, names: &[&str], limit_secs: f64) {
    let by_name: HashMap<&str, bool> = run
        .summary
        .checks
        .iter()
        .map(|c| (c.name.as_str(), c.passed))
        .collect();
    let mut all_ok = true;
    for name in names {
        match by_name.get(name) {
            Some(true) => {}
            Some(false) => {
                all_ok = false;
                let detail = run
                    .summary
                    .checks
                    .iter()
                    .find(|c| c.name == *name)
                    .map(|c| c.detail.clone())
                    .unwrap_or_default();
                println!("ACCEPTANCE {criterion} FAIL: {name}: {detail}");
            }
            None => panic!("{criterion}: expected check '{name}' was not produced"),
        }
    }
    let in_time = run.elapsed_secs < limit_secs;
    if !in_time {
        all_ok = false;
        println!(
            "ACCEPTANCE {criterion} FAIL: runtime {:.1}s over the {limit_secs}s limit",
            run.elapsed_secs
        );
    }
    assert!(all_ok, "{criterion} failed; see lines above");
    println!(
        "ACCEPTANCE {criterion} PASS ({} checks, {:.1}s)",
        names.len(),
        run.elapsed_secs
    );
}

#[test]
fn criterion_01_lemma1_closed_form() {
    let run = run_preset("verify-lemma1");
    assert_checks(
        "C1 lemma1-closed-form",
        &run,
        &["lemma1-closed-form-vs-schur", "lemma1-mu-invariance"],
        5.0,
    );
}

#[test]
fn criterion_02_mean_law_inflation() {
    let run = run_preset("mean-variance");
    assert_checks(
        "C2 mean-law-inflation",
        &run,
        &["mean-variance-n10", "mean-variance-n10000"],
        60.0,
    );
}

#[test]
fn criterion_03_matched_pair_residual_equality() {
    let run = run_preset("matched-pair");
    assert_checks(
        "C3 matched-pair-residual-equality",
        &run,
        &["matched-pair-ks-accepts", "unmatched-control-ks-rejects"],
        60.0,
    );
}

#[test]
fn criterion_04_integral_identity() {
    let run = run_preset("matched-pair");
    assert_checks(
        "C4 integral-identity",
        &run,
        &["integral-identity-zero", "pointwise-difference-significant"],
        300.0,
    );
}

#[test]
fn criterion_05_rho_nonconsistency() {
    let run = run_preset("rho-nonconsistency");
    assert_checks(
        "C5 rho-nonconsistency",
        &run,
        &["rho-iqr-does-not-concentrate", "iid-replication-concentrates"],
        300.0,
    );
}

#[test]
fn criterion_06_mu_distinguishing_set() {
    let run = run_preset("mu-distinguish");
    assert_checks(
        "C6 mu-distinguishing-set",
        &run,
        &[
            "mu-distinguish-rho-0",
            "mu-distinguish-rho-0.5",
            "mu-distinguish-rho-0.9",
        ],
        60.0,
    );
}

#[test]
fn criterion_07_m2_components() {
    let run = run_preset("m2-components");
    assert_checks(
        "C7 m2-components",
        &run,
        &[
            "tau2-consistent",
            "grand-mean-sd-matches-group-effect-floor",
            "grand-mean-sd-does-not-vanish",
        ],
        120.0,
    );
}

#[test]
fn criterion_08_binary_sets() {
    let run = run_preset("binary-distinguish");
    assert_checks(
        "C8 binary-sets",
        &run,
        &[
            "m3-all-equal-matches-exact",
            "m4-all-equal-certain",
            "m3-vs-m4-distinguishing",
            "m5-marginals-bernoulli-p",
        ],
        60.0,
    );
}

#[test]
fn criterion_09_changepoint_calibration() {
    let run = run_preset("changepoint-calibration");
    assert_checks(
        "C9 changepoint-calibration",
        &run,
        &[
            "type-i-rate-calibrated",
            "power-at-q-0.5",
            "power-at-q-0.6",
            "power-at-q-0.7",
            "power-at-q-0.8",
        ],
        300.0,
    );
}

#[test]
fn criterion_10_kmeans_dichotomy() {
    let run = run_preset("kmeans-consistency");
    assert_checks(
        "C10 kmeans-dichotomy",
        &run,
        &[
            "mixture-membership-identifiable",
            "gaussian-membership-hits-floor",
            "lloyd-matches-enumeration-oracle",
        ],
        600.0,
    );
}
