//! Samplers for the generative models under study: the equicorrelated model
//! in random-effect form, the two-level random effects model, the binary
//! dependence models, fixed classification models, and the associated-mixture
//! construction.

use num_rational::Ratio;
use rand::distr::Bernoulli;
use rand::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::EquicorrSpec;
use crate::kmeans::{lex_cmp, lloyd, voronoi_assign, LloydConfig};
use crate::mat::Mat;
use crate::rng::Stream;

// ---------------------------------------------------------------------------
// M1 in random-effect form
// ---------------------------------------------------------------------------

/// One draw of the equicorrelated model via its random-effect decomposition
/// `X_i = mu + Z + E_i` with `Var(Z) = rho sigma2`, `Var(E_i) = (1-rho) sigma2`.
///
/// O(n) per draw, unlike the Cholesky route, and identical in law.
pub fn sample_m1<R: Rng + ?Sized>(spec: &EquicorrSpec, rng: &mut R) -> Result<Vec<f64>> {
    spec.validate()?;
    let tau1 = (spec.rho * spec.sigma2).sqrt();
    let tau2 = spec.sigma_star2().sqrt();
    let z: f64 = tau1 * rng.sample::<f64, _>(rand_distr::StandardNormal);
    Ok((0..spec.n)
        .map(|_| spec.mu + z + tau2 * rng.sample::<f64, _>(rand_distr::StandardNormal))
        .collect())
}

/// Draw only the sample mean of an M1 vector; same law as averaging
/// `sample_m1`, in O(1).
pub fn sample_m1_mean<R: Rng + ?Sized>(spec: &EquicorrSpec, rng: &mut R) -> Result<f64> {
    spec.validate()?;
    let law = crate::gaussian::mean_law(spec)?;
    Ok(law.mean + law.variance.sqrt() * rng.sample::<f64, _>(rand_distr::StandardNormal))
}

// ---------------------------------------------------------------------------
// M2: two-level random effects
// ---------------------------------------------------------------------------

/// Parameters of `X_ij = mu + Z_i + E_j` with `m` fixed groups of sizes `n_i`,
/// `Z_i ~ N(0, tau1_2)`, `E_j ~ N(0, tau2_2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoLevelSpec {
    pub mu: f64,
    pub tau1_2: f64,
    pub tau2_2: f64,
    pub group_sizes: Vec<usize>,
}

impl TwoLevelSpec {
    pub fn validate(&self) -> Result<()> {
        if self.tau1_2 < 0.0 {
            return Err(Error::InvalidSpec("tau1_2 must be >= 0".into()));
        }
        if self.tau2_2 <= 0.0 {
            return Err(Error::InvalidSpec("tau2_2 must be > 0".into()));
        }
        if self.group_sizes.is_empty() || self.group_sizes.contains(&0) {
            return Err(Error::InvalidSpec(
                "need at least one group, all sizes positive".into(),
            ));
        }
        Ok(())
    }

    pub fn total_n(&self) -> usize {
        self.group_sizes.iter().sum()
    }
}

/// One dataset from M2: a vector of groups, one shared `Z_i` per group.
pub fn sample_m2<R: Rng + ?Sized>(spec: &TwoLevelSpec, rng: &mut R) -> Result<Vec<Vec<f64>>> {
    spec.validate()?;
    let tau1 = spec.tau1_2.sqrt();
    let tau2 = spec.tau2_2.sqrt();
    Ok(spec
        .group_sizes
        .iter()
        .map(|&ni| {
            let z: f64 = tau1 * rng.sample::<f64, _>(rand_distr::StandardNormal);
            (0..ni)
                .map(|_| spec.mu + z + tau2 * rng.sample::<f64, _>(rand_distr::StandardNormal))
                .collect()
        })
        .collect())
}

// ---------------------------------------------------------------------------
// Binary models M3, M4, M5, change point
// ---------------------------------------------------------------------------

/// Which binary dependence model to draw from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BinaryVariant {
    M3,
    M4,
    M5,
    ChangePoint,
}

/// Binary model parameters. `m_cp` applies to `ChangePoint` only,
/// `r_override` to `M5` only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinarySpec {
    pub variant: BinaryVariant,
    pub p: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_cp: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_override: Option<f64>,
}

impl BinarySpec {
    pub fn new(variant: BinaryVariant, p: f64) -> Self {
        BinarySpec {
            variant,
            p,
            m_cp: None,
            r_override: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 0.0 && self.p < 1.0) {
            return Err(Error::InvalidP(self.p));
        }
        match self.variant {
            BinaryVariant::ChangePoint => {
                if self.m_cp.is_none_or(|m| m == 0) {
                    return Err(Error::InvalidSpec(
                        "ChangePoint needs a positive m_cp".into(),
                    ));
                }
            }
            _ if self.m_cp.is_some() => {
                return Err(Error::InvalidSpec("m_cp only applies to ChangePoint".into()));
            }
            _ => {}
        }
        if let Some(r) = self.r_override {
            if self.variant != BinaryVariant::M5 {
                return Err(Error::InvalidSpec("r_override only applies to M5".into()));
            }
            if !(0.0..=1.0).contains(&r) {
                return Err(Error::InvalidSpec("r_override must lie in [0, 1]".into()));
            }
        }
        Ok(())
    }
}

/// Number of leading positions the M5 marginal oracle certifies.
pub const M5_ORACLE_HORIZON: usize = 12;

/// Exact P(X_j = 1 | Y = 1) for the mirrored M5 branch, by enumeration over
/// the fair coins at odd positions (positions are 1-based; even positions are
/// the complement of their predecessor). Dyadic rational, no rounding.
pub fn m5_branch1_marginal(j: usize) -> Ratio<u64> {
    assert!(j >= 1);
    let coins = j.div_ceil(2);
    let mut hits = 0u64;
    for outcome in 0u64..(1u64 << coins) {
        let coin_of = |pos: usize| -> u64 {
            // coin index for 1-based position: odd pos 2i-1 and even pos 2i share coin i-1
            let idx = (pos + 1) / 2 - 1;
            (outcome >> idx) & 1
        };
        let x_j = if j % 2 == 1 { coin_of(j) } else { 1 - coin_of(j) };
        if x_j == 1 {
            hits += 1;
        }
    }
    Ratio::new(hits, 1u64 << coins)
}

/// Mixing probability `r` for M5 such that every marginal is Bernoulli(p).
///
/// Solves `(1 - r) * q/2 + r * b_j = q` per position `j` up to the oracle
/// horizon, where `q = min(p, 1-p)` and `b_j` is the exact branch-1 marginal
/// from enumeration; fails with `NoValidR` if the positions disagree.
pub fn solve_m5_r(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidP(p));
    }
    let q = p.min(1.0 - p);
    let mut r = None;
    for j in 1..=M5_ORACLE_HORIZON {
        let b_j = ratio_to_f64(m5_branch1_marginal(j));
        let denom = b_j - q / 2.0;
        if denom <= 0.0 {
            return Err(Error::NoValidR { p, position: j });
        }
        let r_j = (q - q / 2.0) / denom;
        if !(-1e-12..=1.0 + 1e-12).contains(&r_j) {
            return Err(Error::NoValidR { p, position: j });
        }
        match r {
            None => r = Some(r_j),
            Some(r0) if (r_j - r0).abs() > 1e-12 => {
                return Err(Error::NoValidR { p, position: j });
            }
            _ => {}
        }
    }
    Ok(r.expect("horizon >= 1").clamp(0.0, 1.0))
}

/// Marginal P(X_j = 1) implied by mixing the two M5 branches with weight `r`,
/// for the reflected probability `q`; used by tests as the oracle side.
pub fn m5_mixture_marginal(q: f64, r: f64, j: usize) -> f64 {
    (1.0 - r) * (q / 2.0) + r * ratio_to_f64(m5_branch1_marginal(j))
}

fn ratio_to_f64(r: Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Exact P(all n observations equal) under i.i.d. Bernoulli(p): `p^n + (1-p)^n`.
pub fn m3_all_equal_prob(p: f64, n: usize) -> f64 {
    p.powi(n as i32) + (1.0 - p).powi(n as i32)
}

/// One binary sequence of length `n`.
///
/// M3: i.i.d. Bernoulli(p). M4: a single Bernoulli(p) draw repeated. M5: with
/// probability `1 - r` all positions i.i.d. Bernoulli(q/2); with probability
/// `r` odd positions are fair coins and each even position mirrors its
/// predecessor (so the running mean at even n is exactly 1/2); for p > 1/2
/// the construction runs on q = 1-p and the bits are flipped. ChangePoint:
/// positions before `m_cp` are Bernoulli(q) with `q ~ U(0, 1)` drawn once per
/// sequence, the rest Bernoulli(p).
pub fn sample_binary<R: Rng + ?Sized>(spec: &BinarySpec, n: usize, rng: &mut R) -> Result<Vec<u8>> {
    spec.validate()?;
    assert!(n >= 1);
    let bern = |p: f64| Bernoulli::new(p).expect("validated p");
    match spec.variant {
        BinaryVariant::M3 => {
            let d = bern(spec.p);
            Ok((0..n).map(|_| d.sample(rng) as u8).collect())
        }
        BinaryVariant::M4 => {
            let first = bern(spec.p).sample(rng) as u8;
            Ok(vec![first; n])
        }
        BinaryVariant::M5 => {
            let q = spec.p.min(1.0 - spec.p);
            let flip = spec.p > 0.5;
            let r = match spec.r_override {
                Some(r) => r,
                None => solve_m5_r(spec.p)?,
            };
            let mut x: Vec<u8> = if bern(r).sample(rng) {
                // Mirrored branch: fair coin at odd positions, complement at even.
                let coin = bern(0.5);
                let mut seq = Vec::with_capacity(n);
                for i in 0..n {
                    if i % 2 == 0 {
                        seq.push(coin.sample(rng) as u8);
                    } else {
                        seq.push(1 - seq[i - 1]);
                    }
                }
                seq
            } else {
                let d = bern(q / 2.0);
                (0..n).map(|_| d.sample(rng) as u8).collect()
            };
            if flip {
                for b in &mut x {
                    *b = 1 - *b;
                }
            }
            Ok(x)
        }
        BinaryVariant::ChangePoint => {
            let m_cp = spec.m_cp.expect("validated");
            let post = bern(spec.p);
            let mut x = Vec::with_capacity(n);
            if m_cp > 1 {
                let q: f64 = rng.random();
                let pre = bern(q);
                for _ in 0..(m_cp - 1).min(n) {
                    x.push(pre.sample(rng) as u8);
                }
            }
            while x.len() < n {
                x.push(post.sample(rng) as u8);
            }
            Ok(x)
        }
    }
}

// ---------------------------------------------------------------------------
// Matched pairs
// ---------------------------------------------------------------------------

/// The variance that makes `(rho2, sigma2_2)` residual-matched to
/// `(rho1, sigma1_2)`: `sigma2_2 = (1 - rho1) / (1 - rho2) * sigma1_2`,
/// so `(1 - rho1) sigma1_2 = (1 - rho2) sigma2_2`.
pub fn matched_pair(rho1: f64, rho2: f64, sigma1_2: f64) -> Result<f64> {
    for rho in [rho1, rho2] {
        if !(0.0..1.0).contains(&rho) {
            return Err(Error::InvalidRho(rho));
        }
    }
    if sigma1_2 <= 0.0 {
        return Err(Error::InvalidSpec("sigma1_2 must be positive".into()));
    }
    Ok((1.0 - rho1) / (1.0 - rho2) * sigma1_2)
}

/// A residual-matched parameter pair for the equicorrelated model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchedPair {
    pub rho1: f64,
    pub sigma1_2: f64,
    pub rho2: f64,
    pub sigma2_2: f64,
}

impl MatchedPair {
    pub fn new(rho1: f64, sigma1_2: f64, rho2: f64) -> Result<Self> {
        Ok(MatchedPair {
            rho1,
            sigma1_2,
            rho2,
            sigma2_2: matched_pair(rho1, rho2, sigma1_2)?,
        })
    }

    /// The two model specs at a common mean and length.
    pub fn specs(&self, n: usize, mu: f64) -> Result<(EquicorrSpec, EquicorrSpec)> {
        Ok((
            EquicorrSpec::new(n, mu, self.sigma1_2, self.rho1)?,
            EquicorrSpec::new(n, mu, self.sigma2_2, self.rho2)?,
        ))
    }
}

// ---------------------------------------------------------------------------
// Fixed classification models
// ---------------------------------------------------------------------------

/// Gaussian fixed classification model: observation `i` is drawn from the
/// spherical Gaussian at `centers[labels[i] - 1]`. Labels are 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedClassSpec {
    pub centers: Vec<Vec<f64>>,
    pub sigma2: f64,
    pub labels: Vec<usize>,
}

impl FixedClassSpec {
    pub fn validate(&self) -> Result<()> {
        let k = self.centers.len();
        if k == 0 {
            return Err(Error::InvalidSpec("need at least one center".into()));
        }
        let dim = self.centers[0].len();
        if dim == 0 || self.centers.iter().any(|c| c.len() != dim) {
            return Err(Error::InvalidSpec("centers must share a positive dim".into()));
        }
        for w in self.centers.windows(2) {
            if lex_cmp(&w[0], &w[1]) != std::cmp::Ordering::Less {
                return Err(Error::InvalidSpec(
                    "centers must be strictly lexicographically ordered".into(),
                ));
            }
        }
        if self.sigma2 < 0.0 {
            return Err(Error::InvalidSpec("sigma2 must be >= 0".into()));
        }
        if self.labels.is_empty() || self.labels.iter().any(|&g| g < 1 || g > k) {
            return Err(Error::InvalidSpec("labels must lie in 1..=k".into()));
        }
        Ok(())
    }

    pub fn k(&self) -> usize {
        self.centers.len()
    }

    pub fn dim(&self) -> usize {
        self.centers[0].len()
    }
}

/// Sample the first `n` observations (rows) of the fixed classification model.
pub fn sample_fixed_class_prefix<R: Rng + ?Sized>(
    spec: &FixedClassSpec,
    n: usize,
    rng: &mut R,
) -> Result<Mat<f64>> {
    spec.validate()?;
    if n > spec.labels.len() {
        return Err(Error::InvalidSpec(format!(
            "requested {n} rows but only {} labels are fixed",
            spec.labels.len()
        )));
    }
    let p = spec.dim();
    let sigma = spec.sigma2.sqrt();
    let mut out = Mat::zeros(n, p);
    for i in 0..n {
        let center = &spec.centers[spec.labels[i] - 1];
        let row = out.row_mut(i);
        for j in 0..p {
            row[j] = center[j] + sigma * rng.sample::<f64, _>(rand_distr::StandardNormal);
        }
    }
    Ok(out)
}

/// Sample one row per fixed label.
pub fn sample_fixed_class<R: Rng + ?Sized>(
    spec: &FixedClassSpec,
    rng: &mut R,
) -> Result<Mat<f64>> {
    sample_fixed_class_prefix(spec, spec.labels.len(), rng)
}

// ---------------------------------------------------------------------------
// Associated mixture of a base distribution
// ---------------------------------------------------------------------------

/// A sampleable base distribution with finite second moment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BaseDist {
    /// Mixture of spherical Gaussians.
    GaussMixture {
        weights: Vec<f64>,
        means: Vec<Vec<f64>>,
        sigmas: Vec<f64>,
    },
    /// Finite set of weighted atoms.
    Atoms {
        weights: Vec<f64>,
        points: Vec<Vec<f64>>,
    },
}

impl BaseDist {
    pub fn validate(&self) -> Result<()> {
        let (weights, dims) = match self {
            BaseDist::GaussMixture {
                weights,
                means,
                sigmas,
            } => {
                if means.len() != weights.len() || sigmas.len() != weights.len() {
                    return Err(Error::InvalidSpec("component counts differ".into()));
                }
                if sigmas.iter().any(|s| *s <= 0.0) {
                    return Err(Error::InvalidSpec("component sigmas must be > 0".into()));
                }
                (weights, means.iter().map(Vec::len).collect::<Vec<_>>())
            }
            BaseDist::Atoms { weights, points } => {
                if points.len() != weights.len() {
                    return Err(Error::InvalidSpec("component counts differ".into()));
                }
                (weights, points.iter().map(Vec::len).collect::<Vec<_>>())
            }
        };
        if weights.is_empty() || weights.iter().any(|w| *w < 0.0) {
            return Err(Error::InvalidSpec("weights must be nonnegative".into()));
        }
        if (weights.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidSpec("weights must sum to 1".into()));
        }
        let d0 = dims.first().copied().unwrap_or(0);
        if d0 == 0 || dims.iter().any(|&d| d != d0) {
            return Err(Error::InvalidSpec("components must share a positive dim".into()));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match self {
            BaseDist::GaussMixture { means, .. } => means[0].len(),
            BaseDist::Atoms { points, .. } => points[0].len(),
        }
    }

    fn pick_component<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (i, w) in weights.iter().enumerate() {
            acc += w;
            if u < acc {
                return i;
            }
        }
        weights.len() - 1
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        match self {
            BaseDist::GaussMixture {
                weights,
                means,
                sigmas,
            } => {
                let c = Self::pick_component(weights, rng);
                means[c]
                    .iter()
                    .map(|&m| m + sigmas[c] * rng.sample::<f64, _>(rand_distr::StandardNormal))
                    .collect()
            }
            BaseDist::Atoms { weights, points } => {
                points[Self::pick_component(weights, rng)].clone()
            }
        }
    }
}

/// Default reference-sample size for approximating the population centers.
pub const DEFAULT_APPROX_BUDGET: usize = 1_000_000;

/// Minimum reference points per Voronoi cell before the construction is
/// declared degenerate.
pub const MIN_CELL_POINTS: usize = 10;

/// Fixed classification model associated to the mixture decomposition of a
/// base distribution over the Voronoi cells of its population k-means centers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureFixedClassSpec {
    pub base: BaseDist,
    pub k: usize,
    /// Approximate population centers, lexicographically ordered.
    pub pop_centers: Vec<Vec<f64>>,
    /// Empirical Voronoi cell masses.
    pub proportions: Vec<f64>,
    /// Fixed 1-based labels, drawn i.i.d. categorical(proportions) once.
    pub labels: Vec<usize>,
}

/// Build the associated fixed classification model: approximate the
/// population centers by k-means on a reference sample of size
/// `approx_budget`, measure the cell masses, and fix `label_count` labels
/// drawn i.i.d. from those masses.
pub fn associated_mixture(
    base: &BaseDist,
    k: usize,
    approx_budget: usize,
    label_count: usize,
    stream: Stream,
) -> Result<MixtureFixedClassSpec> {
    base.validate()?;
    if k < 2 {
        return Err(Error::InvalidSpec("k must exceed 1".into()));
    }
    let budget = approx_budget.max(k);
    let mut rng = stream.child(0).rng();
    let dim = base.dim();
    let mut reference = Mat::zeros(budget, dim);
    for i in 0..budget {
        let x = base.sample(&mut rng);
        reference.row_mut(i).copy_from_slice(&x);
    }

    let fit = lloyd(&reference, k, &LloydConfig::default(), stream.child(1))?;
    let pop_centers = fit.centers.clone();

    // Cell masses plus the condition-(5) tie check on the reference sample.
    let mut counts = vec![0usize; k];
    let mut ties = 0usize;
    for i in 0..budget {
        let x = reference.row(i);
        let (label, tied) = nearest_with_tie(x, &pop_centers);
        counts[label - 1] += 1;
        ties += tied as usize;
    }
    if ties as f64 / budget as f64 > 1e-6 {
        return Err(Error::InvalidSpec(
            "equidistant boundary has positive mass; tie condition violated".into(),
        ));
    }
    for (cell, &c) in counts.iter().enumerate() {
        if c < MIN_CELL_POINTS {
            return Err(Error::DegenerateBase {
                cell: cell + 1,
                points: c,
                min: MIN_CELL_POINTS,
            });
        }
    }
    let proportions: Vec<f64> = counts.iter().map(|&c| c as f64 / budget as f64).collect();

    let mut label_rng = stream.child(2).rng();
    let labels = (0..label_count)
        .map(|_| BaseDist::pick_component(&proportions, &mut label_rng) + 1)
        .collect();

    Ok(MixtureFixedClassSpec {
        base: base.clone(),
        k,
        pop_centers,
        proportions,
        labels,
    })
}

fn nearest_with_tie(x: &[f64], centers: &[Vec<f64>]) -> (usize, bool) {
    let mut best = 0usize;
    let mut best_d = f64::INFINITY;
    let mut tied = false;
    for (j, c) in centers.iter().enumerate() {
        let d: f64 = x.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum();
        if d < best_d {
            best_d = d;
            best = j;
            tied = false;
        } else if d == best_d {
            tied = true;
        }
    }
    (best + 1, tied)
}

impl MixtureFixedClassSpec {
    /// Sample the first `n` rows: row `i` is a base draw rejected into the
    /// Voronoi cell of its fixed label.
    pub fn sample_prefix<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Mat<f64>> {
        if n > self.labels.len() {
            return Err(Error::InvalidSpec(format!(
                "requested {n} rows but only {} labels are fixed",
                self.labels.len()
            )));
        }
        let dim = self.base.dim();
        let mut out = Mat::zeros(n, dim);
        for i in 0..n {
            let want = self.labels[i];
            let mut tries = 0usize;
            loop {
                let x = self.base.sample(rng);
                if voronoi_assign(&x, &self.pop_centers) == want {
                    out.row_mut(i).copy_from_slice(&x);
                    break;
                }
                tries += 1;
                if tries > 1_000_000 {
                    return Err(Error::InvalidSpec(format!(
                        "rejection sampler stalled on cell {want}"
                    )));
                }
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::Moments;
    use approx::assert_relative_eq;

    fn rng(seed: u64) -> rand_chacha::ChaCha8Rng {
        Stream::new(seed).rng()
    }

    #[test]
    fn m1_sample_has_requested_length_and_determinism() {
        let spec = EquicorrSpec::new(5, 1.0, 2.0, 0.3).unwrap();
        let a = sample_m1(&spec, &mut rng(3)).unwrap();
        let b = sample_m1(&spec, &mut rng(3)).unwrap();
        assert_eq!(a.len(), 5);
        assert_eq!(a, b);
    }

    #[test]
    fn m1_mean_variance_matches_mean_law() {
        // Var(Xbar_10) = 0.55 for sigma2=1, rho=0.5.
        let spec = EquicorrSpec::new(10, 0.0, 1.0, 0.5).unwrap();
        let mut r = rng(11);
        let mut acc = Moments::new();
        for _ in 0..100_000 {
            let x = sample_m1(&spec, &mut r).unwrap();
            acc.push(x.iter().sum::<f64>() / x.len() as f64);
        }
        let se = 0.55 * (2.0 / 100_000f64).sqrt();
        assert!((acc.variance() - 0.55).abs() < 3.0 * se);
    }

    #[test]
    fn m1_pairwise_correlation_matches_rho() {
        let spec = EquicorrSpec::new(2, 0.0, 1.0, 0.5).unwrap();
        let mut r = rng(5);
        let (mut sx, mut sy, mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0, 0.0, 0.0);
        let reps = 100_000;
        for _ in 0..reps {
            let x = sample_m1(&spec, &mut r).unwrap();
            sx += x[0];
            sy += x[1];
            sxy += x[0] * x[1];
            sxx += x[0] * x[0];
            syy += x[1] * x[1];
        }
        let nf = reps as f64;
        let cov = sxy / nf - (sx / nf) * (sy / nf);
        let corr = cov / ((sxx / nf - (sx / nf).powi(2)) * (syy / nf - (sy / nf).powi(2))).sqrt();
        // SE of a correlation estimate ~ (1 - rho^2) / sqrt(reps)
        assert!((corr - 0.5).abs() < 3.0 * 0.75 / nf.sqrt());
    }

    #[test]
    fn m2_tau1_zero_gives_iid_groups() {
        let spec = TwoLevelSpec {
            mu: 2.0,
            tau1_2: 0.0,
            tau2_2: 1.0,
            group_sizes: vec![4000, 4000],
        };
        let groups = sample_m2(&spec, &mut rng(2)).unwrap();
        let mut acc = Moments::new();
        for g in &groups {
            acc.extend(g.iter().copied());
        }
        assert!((acc.mean() - 2.0).abs() < 0.05);
        assert!((acc.variance() - 1.0).abs() < 0.05);
    }

    #[test]
    fn m4_sequences_are_constant_with_all_ones_rate_p() {
        let spec = BinarySpec::new(BinaryVariant::M4, 0.3);
        let mut r = rng(7);
        let reps = 100_000;
        let mut ones = 0usize;
        for _ in 0..reps {
            let x = sample_binary(&spec, 20, &mut r).unwrap();
            assert!(x.iter().all(|&b| b == x[0]));
            ones += (x[0] == 1) as usize;
        }
        let frac = ones as f64 / reps as f64;
        let se = (0.3 * 0.7 / reps as f64).sqrt();
        assert!((frac - 0.3).abs() < 3.0 * se);
    }

    #[test]
    fn m5_conditional_mean_is_half_on_mirrored_branch() {
        // Force the mirrored branch with r_override = 1.
        let spec = BinarySpec {
            variant: BinaryVariant::M5,
            p: 0.3,
            m_cp: None,
            r_override: Some(1.0),
        };
        let mut r = rng(13);
        for _ in 0..500 {
            let x = sample_binary(&spec, 10, &mut r).unwrap();
            let mean = x.iter().map(|&b| b as f64).sum::<f64>() / 10.0;
            assert_eq!(mean, 0.5);
        }
    }

    #[test]
    fn m5_oracle_r_values() {
        assert_relative_eq!(solve_m5_r(1.0 / 3.0).unwrap(), 0.5, epsilon = 1e-12);
        assert_relative_eq!(solve_m5_r(0.25).unwrap(), 1.0 / 3.0, epsilon = 1e-12);
        // p -> 0 gives r -> 0.
        assert!(solve_m5_r(1e-9).unwrap() < 1e-8);
        // Reflection: p and 1-p share r.
        assert_relative_eq!(
            solve_m5_r(0.7).unwrap(),
            solve_m5_r(0.3).unwrap(),
            epsilon = 1e-12
        );
        assert!(matches!(solve_m5_r(0.0), Err(Error::InvalidP(_))));
    }

    #[test]
    fn m5_oracle_marginals_are_p_at_every_position() {
        for p in [0.1, 0.25, 1.0 / 3.0, 0.5] {
            let r = solve_m5_r(p).unwrap();
            for j in 1..=M5_ORACLE_HORIZON {
                assert_relative_eq!(m5_mixture_marginal(p, r, j), p, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn m5_empirical_marginals_match_p() {
        let p = 0.25;
        let spec = BinarySpec::new(BinaryVariant::M5, p);
        let mut r = rng(17);
        let reps = 100_000;
        let n = 12;
        let mut counts = vec![0usize; n];
        for _ in 0..reps {
            let x = sample_binary(&spec, n, &mut r).unwrap();
            for (c, &b) in counts.iter_mut().zip(&x) {
                *c += b as usize;
            }
        }
        let se = (p * (1.0 - p) / reps as f64).sqrt();
        for (j, &c) in counts.iter().enumerate() {
            let frac = c as f64 / reps as f64;
            assert!(
                (frac - p).abs() < 4.0 * se,
                "position {} marginal {frac} vs {p}",
                j + 1
            );
        }
    }

    #[test]
    fn changepoint_with_mcp_one_matches_m3_exactly() {
        let cp = BinarySpec {
            variant: BinaryVariant::ChangePoint,
            p: 0.4,
            m_cp: Some(1),
            r_override: None,
        };
        let m3 = BinarySpec::new(BinaryVariant::M3, 0.4);
        let a = sample_binary(&cp, 50, &mut rng(23)).unwrap();
        let b = sample_binary(&m3, 50, &mut rng(23)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn matched_pair_formula() {
        assert_relative_eq!(matched_pair(0.2, 0.6, 1.0).unwrap(), 2.0, epsilon = 1e-15);
        assert_relative_eq!(matched_pair(0.0, 0.5, 1.0).unwrap(), 2.0, epsilon = 1e-15);
        assert_relative_eq!(matched_pair(0.3, 0.3, 1.7).unwrap(), 1.7, epsilon = 1e-15);
        assert!(matched_pair(-0.1, 0.5, 1.0).is_err());
        let pair = MatchedPair::new(0.2, 1.0, 0.6).unwrap();
        assert_relative_eq!(
            (1.0 - pair.rho1) * pair.sigma1_2,
            (1.0 - pair.rho2) * pair.sigma2_2,
            epsilon = 1e-12
        );
    }

    #[test]
    fn fixed_class_zero_variance_reproduces_centers() {
        let spec = FixedClassSpec {
            centers: vec![vec![0.0, 0.0], vec![2.0, 1.0]],
            sigma2: 0.0,
            labels: vec![1, 2, 2, 1],
        };
        let data = sample_fixed_class(&spec, &mut rng(1)).unwrap();
        assert_eq!(data.row(0), &[0.0, 0.0]);
        assert_eq!(data.row(1), &[2.0, 1.0]);
        assert_eq!(data.row(3), &[0.0, 0.0]);
    }

    #[test]
    fn fixed_class_rejects_unordered_centers() {
        let spec = FixedClassSpec {
            centers: vec![vec![2.0], vec![0.0]],
            sigma2: 1.0,
            labels: vec![1],
        };
        assert!(spec.validate().is_err());
    }

    #[test]
    fn fixed_class_within_cluster_moments() {
        let n = 10_000;
        let spec = FixedClassSpec {
            centers: vec![vec![0.0], vec![2.0]],
            sigma2: 1.0,
            labels: (0..n).map(|i| 1 + i % 2).collect(),
        };
        let data = sample_fixed_class(&spec, &mut rng(29)).unwrap();
        let mut acc = Moments::new();
        for i in (0..n).step_by(2) {
            acc.push(data[(i, 0)]);
        }
        assert!(acc.mean().abs() < 3.0 / (n as f64 / 2.0).sqrt());
        assert!((acc.variance() - 1.0).abs() < 3.0 * 2.0f64.sqrt() / (n as f64 / 2.0).sqrt());
    }

    #[test]
    fn two_point_atoms_associated_mixture() {
        let base = BaseDist::Atoms {
            weights: vec![0.5, 0.5],
            points: vec![vec![-1.0], vec![1.0]],
        };
        let spec = associated_mixture(&base, 2, 10_000, 100, Stream::new(31)).unwrap();
        assert_relative_eq!(spec.pop_centers[0][0], -1.0, epsilon = 1e-12);
        assert_relative_eq!(spec.pop_centers[1][0], 1.0, epsilon = 1e-12);
        assert!((spec.proportions[0] - 0.5).abs() < 0.02);
        let data = spec.sample_prefix(50, &mut rng(37)).unwrap();
        for i in 0..50 {
            let want = if spec.labels[i] == 1 { -1.0 } else { 1.0 };
            assert_eq!(data[(i, 0)], want);
        }
    }

    #[test]
    fn binary_spec_serde_round_trip() {
        let spec = BinarySpec {
            variant: BinaryVariant::ChangePoint,
            p: 0.4,
            m_cp: Some(5),
            r_override: None,
        };
        let json = serde_json::to_string(&spec).unwrap();
        let back: BinarySpec = serde_json::from_str(&json).unwrap();
        assert_eq!(spec, back);
    }
}
