//! Lloyd's algorithm with random restarts, an exact enumeration oracle,
//! Voronoi assignment, and the cluster-membership consistency experiment.
//!
//! Cluster labels are 1-based everywhere, matching the model specs; centers
//! are reported in strict lexicographic order with labels remapped to match.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mat::Mat;
use crate::models::{sample_fixed_class_prefix, FixedClassSpec, MixtureFixedClassSpec};
use crate::rng::Stream;
use crate::scalar::Scalar;
use crate::stats::{clopper_pearson, std_normal_cdf};

/// Enumeration cap for the brute-force oracle: `k^n` assignments at most.
pub const BRUTE_FORCE_CAP: f64 = 1e7;

/// Lexicographic order on points: first coordinate, ties broken by the next.
pub fn lex_cmp<T: Scalar>(a: &[T], b: &[T]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.partial_cmp(y).expect("finite coordinates") {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    a.len().cmp(&b.len())
}

/// Nearest center in squared Euclidean distance, 1-based; ties go to the
/// lowest index.
pub fn voronoi_assign<T: Scalar>(x: &[T], centers: &[Vec<T>]) -> usize {
    assert!(!centers.is_empty());
    let mut best = 0usize;
    let mut best_d = T::infinity();
    for (j, c) in centers.iter().enumerate() {
        let d = sq_dist(x, c);
        if d < best_d {
            best_d = d;
            best = j;
        }
    }
    best + 1
}

#[inline]
fn sq_dist<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (&x, &y)| acc + (x - y) * (x - y))
}

/// A k-means solution: lexicographically ordered centers, 1-based labels with
/// every label an argmin of distance to the centers, and the within-cluster
/// sum of squares.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansFit<T = f64> {
    pub centers: Vec<Vec<T>>,
    pub labels: Vec<usize>,
    pub objective: T,
}

impl<T: Scalar> KMeansFit<T> {
    /// Recompute the objective from centers and labels (consistency check).
    pub fn recompute_objective(&self, data: &Mat<T>) -> T {
        (0..data.nrows()).fold(T::zero(), |acc, i| {
            acc + sq_dist(data.row(i), &self.centers[self.labels[i] - 1])
        })
    }
}

/// Lloyd iteration settings.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LloydConfig {
    /// Independent random-subset initializations; best objective wins.
    pub restarts: usize,
    pub max_iter: usize,
    /// Relative objective-change convergence threshold.
    pub tol: f64,
}

impl Default for LloydConfig {
    fn default() -> Self {
        LloydConfig {
            restarts: 32,
            max_iter: 500,
            tol: 1e-10,
        }
    }
}

/// Best-of-restarts Lloyd. Restarts run in parallel on child streams, so the
/// result does not depend on thread count; ties in the final objective go to
/// the lowest restart index.
pub fn lloyd<T: Scalar>(
    data: &Mat<T>,
    k: usize,
    cfg: &LloydConfig,
    stream: Stream,
) -> Result<KMeansFit<T>> {
    let n = data.nrows();
    if k == 0 {
        return Err(Error::InvalidSpec("k must be positive".into()));
    }
    if n < k {
        return Err(Error::TooFewPoints { n, k });
    }
    let runs: Vec<(T, usize, Vec<Vec<T>>, Vec<usize>)> = (0..cfg.restarts.max(1))
        .into_par_iter()
        .map(|r| {
            let mut rng = stream.child(r as u64).rng();
            let (centers, labels, obj) = lloyd_single(data, k, cfg, &mut rng);
            (obj, r, centers, labels)
        })
        .collect();
    let best = runs
        .into_iter()
        .min_by(|a, b| {
            a.0.partial_cmp(&b.0)
                .expect("finite objective")
                .then(a.1.cmp(&b.1))
        })
        .expect("at least one restart");
    Ok(finalize(data, best.2, best.3))
}

/// One Lloyd run from a uniform random k-subset initialization.
fn lloyd_single<T: Scalar, R: rand::Rng + ?Sized>(
    data: &Mat<T>,
    k: usize,
    cfg: &LloydConfig,
    rng: &mut R,
) -> (Vec<Vec<T>>, Vec<usize>, T) {
    let n = data.nrows();
    let idx = rand::seq::index::sample(rng, n, k);
    let mut centers: Vec<Vec<T>> = idx.iter().map(|i| data.row(i).to_vec()).collect();
    let mut labels = vec![0usize; n];
    let mut prev_obj = T::infinity();
    for _ in 0..cfg.max_iter {
        let obj = assign_points(data, &centers, &mut labels);
        // The objective never increases across Lloyd iterations.
        debug_assert!(
            obj <= prev_obj * (T::one() + T::from_f64_lossy(1e-9))
                || (prev_obj - obj).abs() <= T::from_f64_lossy(1e-12),
            "objective increased: {prev_obj} -> {obj}"
        );
        fix_empty_clusters(data, &centers, &mut labels, k);
        update_centers(data, &labels, &mut centers, k);
        let done = prev_obj.is_finite()
            && (prev_obj - obj) <= T::from_f64_lossy(cfg.tol) * prev_obj.max(T::min_positive_value());
        prev_obj = obj;
        if done {
            break;
        }
    }
    let obj = assign_points(data, &centers, &mut labels);
    (centers, labels, obj)
}

/// Nearest-center assignment (0-based here); returns the objective.
fn assign_points<T: Scalar>(data: &Mat<T>, centers: &[Vec<T>], labels: &mut [usize]) -> T {
    let mut obj = T::zero();
    for i in 0..data.nrows() {
        let x = data.row(i);
        let mut best = 0usize;
        let mut best_d = T::infinity();
        for (j, c) in centers.iter().enumerate() {
            let d = sq_dist(x, c);
            if d < best_d {
                best_d = d;
                best = j;
            }
        }
        labels[i] = best;
        obj += best_d;
    }
    obj
}

/// Give every empty cluster the point farthest from its current center,
/// taken from clusters that can spare one; this never increases the objective.
fn fix_empty_clusters<T: Scalar>(
    data: &Mat<T>,
    centers: &[Vec<T>],
    labels: &mut [usize],
    k: usize,
) {
    loop {
        let mut counts = vec![0usize; k];
        for &l in labels.iter() {
            counts[l] += 1;
        }
        let Some(empty) = counts.iter().position(|&c| c == 0) else {
            return;
        };
        let mut donor: Option<(usize, T)> = None;
        for i in 0..data.nrows() {
            if counts[labels[i]] < 2 {
                continue;
            }
            let d = sq_dist(data.row(i), &centers[labels[i]]);
            if donor.as_ref().is_none_or(|&(_, dd)| d > dd) {
                donor = Some((i, d));
            }
        }
        let (i, _) = donor.expect("n >= k guarantees a donor");
        labels[i] = empty;
    }
}

fn update_centers<T: Scalar>(data: &Mat<T>, labels: &[usize], centers: &mut [Vec<T>], k: usize) {
    let p = data.ncols();
    let mut sums = vec![vec![T::zero(); p]; k];
    let mut counts = vec![0usize; k];
    for i in 0..data.nrows() {
        counts[labels[i]] += 1;
        for (s, &v) in sums[labels[i]].iter_mut().zip(data.row(i)) {
            *s += v;
        }
    }
    for j in 0..k {
        if counts[j] > 0 {
            let c = T::from_count(counts[j]);
            for (dst, s) in centers[j].iter_mut().zip(&sums[j]) {
                *dst = *s / c;
            }
        }
    }
}

/// Lex-sort centers, reassign every point to its nearest center (1-based,
/// ties to the lowest index) and recompute the objective.
fn finalize<T: Scalar>(data: &Mat<T>, mut centers: Vec<Vec<T>>, _labels: Vec<usize>) -> KMeansFit<T> {
    centers.sort_by(|a, b| lex_cmp(a, b));
    let labels: Vec<usize> = (0..data.nrows())
        .map(|i| voronoi_assign(data.row(i), &centers))
        .collect();
    let objective = (0..data.nrows()).fold(T::zero(), |acc, i| {
        acc + sq_dist(data.row(i), &centers[labels[i] - 1])
    });
    KMeansFit {
        centers,
        labels,
        objective,
    }
}

/// Exact global minimizer of the k-means objective by enumeration of all
/// onto assignments. Refuses inputs with `k^n` beyond the cap.
pub fn brute_force_kmeans<T: Scalar>(data: &Mat<T>, k: usize) -> Result<KMeansFit<T>> {
    let n = data.nrows();
    if k == 0 {
        return Err(Error::InvalidSpec("k must be positive".into()));
    }
    if n < k {
        return Err(Error::TooFewPoints { n, k });
    }
    let combinations = (k as f64).powi(n as i32);
    if combinations > BRUTE_FORCE_CAP {
        return Err(Error::TooLarge {
            combinations,
            cap: BRUTE_FORCE_CAP,
        });
    }
    let p = data.ncols();
    // W = sum_i |x_i|^2 - sum_j |s_j|^2 / c_j for cluster sums s_j.
    let total_sq: T = (0..n).fold(T::zero(), |acc, i| acc + sq_dist(data.row(i), &vec![T::zero(); p]));

    let mut assign = vec![0usize; n];
    let mut best: Option<(T, Vec<usize>)> = None;
    loop {
        let mut sums = vec![vec![T::zero(); p]; k];
        let mut counts = vec![0usize; k];
        for (i, &g) in assign.iter().enumerate() {
            counts[g] += 1;
            for (s, &v) in sums[g].iter_mut().zip(data.row(i)) {
                *s += v;
            }
        }
        // A minimizer always exists with no empty cluster; skip the rest.
        if counts.iter().all(|&c| c > 0) {
            let mut explained = T::zero();
            for j in 0..k {
                let c = T::from_count(counts[j]);
                let sq = sums[j].iter().fold(T::zero(), |acc, &s| acc + s * s);
                explained += sq / c;
            }
            let w = total_sq - explained;
            if best.as_ref().is_none_or(|(bw, _)| w < *bw) {
                best = Some((w, assign.clone()));
            }
        }
        // Odometer increment.
        let mut pos = 0usize;
        loop {
            if pos == n {
                let (_, assignment) = best.expect("full assignments exist");
                let mut centers = vec![vec![T::zero(); p]; k];
                let mut counts = vec![0usize; k];
                for (i, &g) in assignment.iter().enumerate() {
                    counts[g] += 1;
                    for (s, &v) in centers[g].iter_mut().zip(data.row(i)) {
                        *s += v;
                    }
                }
                for j in 0..k {
                    let c = T::from_count(counts[j]);
                    for v in centers[j].iter_mut() {
                        *v = *v / c;
                    }
                }
                return Ok(finalize(data, centers, assignment));
            }
            assign[pos] += 1;
            if assign[pos] == k {
                assign[pos] = 0;
                pos += 1;
            } else {
                break;
            }
        }
    }
}

/// `Phi(-delta / (2 sigma))`: the irreducible single-point misclassification
/// probability for two equal-mass spherical clusters at distance `delta` with
/// known centers.
pub fn misclassification_floor(delta: f64, sigma: f64) -> f64 {
    assert!(sigma > 0.0 && delta >= 0.0);
    std_normal_cdf(-delta / (2.0 * sigma))
}

// ---------------------------------------------------------------------------
// Membership consistency experiment
// ---------------------------------------------------------------------------

/// The two fixed classification model families the experiment runs on.
#[derive(Debug, Clone)]
pub enum ClassModel<'a> {
    Gaussian(&'a FixedClassSpec),
    Mixture(&'a MixtureFixedClassSpec),
}

impl ClassModel<'_> {
    pub fn k(&self) -> usize {
        match self {
            ClassModel::Gaussian(s) => s.k(),
            ClassModel::Mixture(s) => s.k,
        }
    }

    pub fn first_label(&self) -> usize {
        match self {
            ClassModel::Gaussian(s) => s.labels[0],
            ClassModel::Mixture(s) => s.labels[0],
        }
    }

    pub fn max_n(&self) -> usize {
        match self {
            ClassModel::Gaussian(s) => s.labels.len(),
            ClassModel::Mixture(s) => s.labels.len(),
        }
    }

    fn sample_prefix<R: rand::Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Mat<f64>> {
        match self {
            ClassModel::Gaussian(s) => sample_fixed_class_prefix(s, n, rng),
            ClassModel::Mixture(s) => s.sample_prefix(n, rng),
        }
    }
}

/// One row per sample size: how often the fitted membership of the first
/// observation recovered its fixed label.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ConsistencyRow {
    pub n: usize,
    pub reps: usize,
    pub frac_correct: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConsistencyTable {
    pub rows: Vec<ConsistencyRow>,
}

/// For each `n` in the grid, draw `reps` fresh datasets (the first label
/// stays fixed by construction), fit k-means, and record how often the first
/// observation's fitted cluster equals its true label.
pub fn membership_consistency_experiment(
    model: &ClassModel<'_>,
    n_grid: &[usize],
    reps: usize,
    cfg: &LloydConfig,
    ci_level: f64,
    stream: Stream,
) -> Result<ConsistencyTable> {
    let k = model.k();
    let gamma1 = model.first_label();
    if n_grid.iter().any(|&n| n > model.max_n()) {
        return Err(Error::InvalidSpec(
            "n grid exceeds the number of fixed labels".into(),
        ));
    }
    let mut rows = Vec::with_capacity(n_grid.len());
    for (gi, &n) in n_grid.iter().enumerate() {
        let grid_stream = stream.child(gi as u64);
        let correct: usize = (0..reps)
            .into_par_iter()
            .map(|r| {
                let rep_stream = grid_stream.child(r as u64);
                let mut rng = rep_stream.child(0).rng();
                let data = model.sample_prefix(n, &mut rng).expect("validated model");
                let fit =
                    lloyd(&data, k, cfg, rep_stream.child(1)).expect("n >= k in consistency grid");
                usize::from(voronoi_assign(data.row(0), &fit.centers) == gamma1)
            })
            .sum();
        let frac = correct as f64 / reps as f64;
        let ci = clopper_pearson(correct as u64, reps as u64, ci_level);
        rows.push(ConsistencyRow {
            n,
            reps,
            frac_correct: frac,
            ci_lo: ci.lo,
            ci_hi: ci.hi,
        });
    }
    Ok(ConsistencyTable { rows })
}
