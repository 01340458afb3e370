//! Dense Gaussian laws: equicorrelated covariance construction, sampling,
//! exact conditioning, and the closed-form conditional given the sample mean.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mat::{cholesky, cholesky_psd, Mat};
use crate::scalar::Scalar;

/// Dense covariance dimension cap; experiments are desk scale.
pub const MAX_DENSE_DIM: usize = 10_000;

/// Absolute tolerance for covariance symmetry.
pub const SYMMETRY_TOL: f64 = 1e-12;

// ---------------------------------------------------------------------------
// Multivariate normal
// ---------------------------------------------------------------------------

/// Mean vector plus symmetric positive semi-definite covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct MvNormal<T = f64> {
    mean: Vec<T>,
    cov: Mat<T>,
}

impl<T: Scalar> MvNormal<T> {
    /// Validates symmetry (within 1e-12, relative to the largest entry) and
    /// positive semi-definiteness (jitter-free semi-definite Cholesky).
    pub fn new(mean: Vec<T>, cov: Mat<T>) -> Result<Self> {
        let n = mean.len();
        if cov.nrows() != n || cov.ncols() != n {
            return Err(Error::InvalidSpec(format!(
                "covariance is {}x{}, mean has length {}",
                cov.nrows(),
                cov.ncols(),
                n
            )));
        }
        if n > MAX_DENSE_DIM {
            return Err(Error::DimensionTooLarge {
                n,
                cap: MAX_DENSE_DIM,
            });
        }
        let tol = T::from_f64_lossy(SYMMETRY_TOL) * cov.max_abs().max(T::one());
        if !cov.is_symmetric(tol) {
            return Err(Error::InvalidSpec(
                "covariance is not symmetric within 1e-12".into(),
            ));
        }
        cholesky_psd(&cov)?;
        Ok(MvNormal { mean, cov })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[T] {
        &self.mean
    }

    pub fn cov(&self) -> &Mat<T> {
        &self.cov
    }

    /// Draws `count` samples as rows of a `count x n` matrix via `mean + L z`.
    pub fn sample<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Result<Mat<T>>
    where
        StandardNormal: Distribution<T>,
    {
        assert!(count >= 1);
        let n = self.dim();
        let factor = cholesky_psd(&self.cov)?;
        let l = factor.lower();
        let mut out = Mat::zeros(count, n);
        let mut z = vec![T::zero(); n];
        for r in 0..count {
            for zi in z.iter_mut() {
                *zi = StandardNormal.sample(rng);
            }
            let row = out.row_mut(r);
            for i in 0..n {
                let mut acc = self.mean[i];
                for k in 0..=i {
                    acc = acc + l[(i, k)] * z[k];
                }
                row[i] = acc;
            }
        }
        Ok(out)
    }

    /// Exact Gaussian conditioning on a subset of coordinates.
    ///
    /// Returns the law of the remaining coordinates given
    /// `self[observed] = values`: conditional mean
    /// `mu_1 + S_12 S_2^-1 (v - mu_2)` and Schur complement covariance
    /// `S_1 - S_12 S_2^-1 S_21`, solved through the Cholesky factor of `S_2`.
    pub fn condition(&self, observed: &[usize], values: &[T]) -> Result<MvNormal<T>> {
        let n = self.dim();
        assert_eq!(observed.len(), values.len());
        for &idx in observed {
            if idx >= n {
                return Err(Error::IndexOutOfRange { index: idx, dim: n });
            }
        }
        let mut seen = vec![false; n];
        for &idx in observed {
            if seen[idx] {
                return Err(Error::InvalidSpec(format!(
                    "observed index {idx} repeated"
                )));
            }
            seen[idx] = true;
        }
        let free: Vec<usize> = (0..n).filter(|i| !seen[*i]).collect();
        let (n1, n2) = (free.len(), observed.len());

        let sigma2 = Mat::from_fn(n2, n2, |a, b| self.cov[(observed[a], observed[b])]);
        let factor = cholesky(&sigma2)?;

        // w = S_2^-1 (v - mu_2)
        let delta: Vec<T> = (0..n2)
            .map(|a| values[a] - self.mean[observed[a]])
            .collect();
        let w = factor.solve(&delta);

        let mut cond_mean = Vec::with_capacity(n1);
        for &i in &free {
            let mut acc = self.mean[i];
            for (a, &j) in observed.iter().enumerate() {
                acc = acc + self.cov[(i, j)] * w[a];
            }
            cond_mean.push(acc);
        }

        // m_b = S_2^-1 S_21[:, b], one solve per free coordinate.
        let mut cond_cov = Mat::zeros(n1, n1);
        for (b, &jb) in free.iter().enumerate() {
            let col: Vec<T> = observed.iter().map(|&o| self.cov[(o, jb)]).collect();
            let m = factor.solve(&col);
            for (a, &ja) in free.iter().enumerate() {
                let mut acc = self.cov[(ja, jb)];
                for (idx, &o) in observed.iter().enumerate() {
                    acc = acc - self.cov[(ja, o)] * m[idx];
                }
                cond_cov[(a, b)] = acc;
            }
        }
        // Symmetrize away the last bits of solver noise.
        for a in 0..n1 {
            for b in (a + 1)..n1 {
                let avg = (cond_cov[(a, b)] + cond_cov[(b, a)]) / T::from_f64_lossy(2.0);
                cond_cov[(a, b)] = avg;
                cond_cov[(b, a)] = avg;
            }
        }
        MvNormal::new(cond_mean, cond_cov)
    }
}

// ---------------------------------------------------------------------------
// Equicorrelated model
// ---------------------------------------------------------------------------

/// Parameters of the constant-correlation Gaussian model: `n` exchangeable
/// coordinates with common mean `mu`, variance `sigma2` and pairwise
/// correlation `rho in [0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquicorrSpec<T = f64> {
    pub n: usize,
    pub mu: T,
    pub sigma2: T,
    pub rho: T,
}

impl<T: Scalar> EquicorrSpec<T> {
    pub fn new(n: usize, mu: T, sigma2: T, rho: T) -> Result<Self> {
        let spec = EquicorrSpec { n, mu, sigma2, rho };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidSpec("n must be positive".into()));
        }
        if !(self.sigma2 > T::zero()) {
            return Err(Error::InvalidSpec("sigma2 must be positive".into()));
        }
        if self.rho < T::zero() || self.rho >= T::one() {
            return Err(Error::InvalidRho(self.rho.to_f64().unwrap_or(f64::NAN)));
        }
        Ok(())
    }

    /// Residual variance `(1 - rho) sigma2`, shared by matched pairs.
    pub fn sigma_star2(&self) -> T {
        (T::one() - self.rho) * self.sigma2
    }
}

/// Law of the sample mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanLaw<T = f64> {
    pub mean: T,
    pub variance: T,
}

/// Full covariance form of the equicorrelated model: diagonal `sigma2`,
/// off-diagonals `rho * sigma2`, constant mean.
pub fn equicorr_mvn<T: Scalar>(spec: &EquicorrSpec<T>) -> Result<MvNormal<T>> {
    spec.validate()?;
    if spec.n > MAX_DENSE_DIM {
        return Err(Error::DimensionTooLarge {
            n: spec.n,
            cap: MAX_DENSE_DIM,
        });
    }
    let off = spec.rho * spec.sigma2;
    let cov = Mat::from_fn(spec.n, spec.n, |i, j| if i == j { spec.sigma2 } else { off });
    MvNormal::new(vec![spec.mu; spec.n], cov)
}

/// Law of `X_bar_n`: `N(mu, (1 - rho) sigma2 / n + rho sigma2)`.
pub fn mean_law<T: Scalar>(spec: &EquicorrSpec<T>) -> Result<MeanLaw<T>> {
    spec.validate()?;
    let n = T::from_count(spec.n);
    Ok(MeanLaw {
        mean: spec.mu,
        variance: spec.sigma_star2() / n + spec.rho * spec.sigma2,
    })
}

/// Closed-form conditional law of `(X_1, ..., X_n)` given `X_bar_n = xbar`:
/// constant mean `xbar`, covariance with diagonal `(1 - 1/n) sigma_star2` and
/// off-diagonals `-sigma_star2 / n`. Does not depend on `spec.mu`.
pub fn conditional_given_mean<T: Scalar>(spec: &EquicorrSpec<T>, xbar: T) -> Result<MvNormal<T>> {
    spec.validate()?;
    if spec.n > MAX_DENSE_DIM {
        return Err(Error::DimensionTooLarge {
            n: spec.n,
            cap: MAX_DENSE_DIM,
        });
    }
    let n = T::from_count(spec.n);
    let star = spec.sigma_star2();
    let diag = (T::one() - T::one() / n) * star;
    let off = -star / n;
    let cov = Mat::from_fn(spec.n, spec.n, |i, j| if i == j { diag } else { off });
    MvNormal::new(vec![xbar; spec.n], cov)
}

/// Joint law of `(X_1, ..., X_n, X_bar_n)`, the augmented system used to
/// cross-check the closed form: the extra row/column is
/// `sigma_tilde2 = sigma2 (1 + (n-1) rho) / n`, which is also the variance of
/// the mean coordinate. Singular by construction; condition on the last
/// coordinate only.
pub fn augmented_with_mean<T: Scalar>(spec: &EquicorrSpec<T>) -> Result<MvNormal<T>> {
    spec.validate()?;
    if spec.n + 1 > MAX_DENSE_DIM {
        return Err(Error::DimensionTooLarge {
            n: spec.n + 1,
            cap: MAX_DENSE_DIM,
        });
    }
    let n = spec.n;
    let nf = T::from_count(n);
    let off = spec.rho * spec.sigma2;
    let tilde = spec.sigma2 * (T::one() + (nf - T::one()) * spec.rho) / nf;
    let cov = Mat::from_fn(n + 1, n + 1, |i, j| {
        if i == n || j == n {
            tilde
        } else if i == j {
            spec.sigma2
        } else {
            off
        }
    });
    MvNormal::new(vec![spec.mu; n + 1], cov)
}

/// Schur-complement route to the conditional given the mean: condition the
/// augmented `(X, X_bar)` system on its last coordinate.
pub fn conditional_given_mean_schur<T: Scalar>(
    spec: &EquicorrSpec<T>,
    xbar: T,
) -> Result<MvNormal<T>> {
    let augmented = augmented_with_mean(spec)?;
    augmented.condition(&[spec.n], &[xbar])
}
