//! Small dense matrices and Cholesky factorization.
//!
//! Covariances here are desk scale (n up to a few thousand), so everything is
//! plain row-major storage with unblocked algorithms.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Relative pivot tolerance for positive definiteness: `1e-12 * max diagonal`.
pub const PIVOT_RTOL: f64 = 1e-12;

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat<T = f64> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { T::one() } else { T::zero() })
    }

    /// Build from nested rows; all rows must have equal length.
    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Mat {
            rows: r,
            cols: c,
            data: rows.iter().flatten().copied().collect(),
        }
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn max_abs(&self) -> T {
        self.data
            .iter()
            .fold(T::zero(), |acc, &x| acc.max(x.abs()))
    }

    /// Max-norm of the elementwise difference.
    pub fn max_abs_diff(&self, other: &Mat<T>) -> T {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |acc, (&a, &b)| acc.max((a - b).abs()))
    }

    pub fn is_symmetric(&self, tol: T) -> bool {
        if self.rows != self.cols {
            return false;
        }
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                if (self[(i, j)] - self[(j, i)]).abs() > tol {
                    return false;
                }
            }
        }
        true
    }

    pub fn mat_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(T::zero(), |acc, (&a, &b)| acc + a * b)
        })
            .collect()
    }

    /// `self * other^T` is not needed; plain product suffices here.
    pub fn mat_mul(&self, other: &Mat<T>) -> Mat<T> {
        assert_eq!(self.cols, other.rows);
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self[(i, l)];
                if a == T::zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(l, j)];
                }
            }
        }
        out
    }
}

impl<T> Index<(usize, usize)> for Mat<T> {
    type Output = T;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Mat<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

/// Lower-triangular Cholesky factor with `L * L^T = S`.
#[derive(Debug, Clone)]
pub struct CholFactor<T = f64> {
    l: Mat<T>,
}

impl<T: Scalar> CholFactor<T> {
    pub fn lower(&self) -> &Mat<T> {
        &self.l
    }

    pub fn dim(&self) -> usize {
        self.l.nrows()
    }

    /// `L * L^T`, for reconstruction checks.
    pub fn reconstruct(&self) -> Mat<T> {
        let n = self.dim();
        Mat::from_fn(n, n, |i, j| {
            let m = i.min(j);
            (0..=m).fold(T::zero(), |acc, k| acc + self.l[(i, k)] * self.l[(j, k)])
        })
    }

    /// Solve `L y = b`.
    pub fn forward(&self, b: &[T]) -> Vec<T> {
        let n = self.dim();
        assert_eq!(b.len(), n);
        let mut y = vec![T::zero(); n];
        for i in 0..n {
            let mut s = b[i];
            for k in 0..i {
                s = s - self.l[(i, k)] * y[k];
            }
            y[i] = s / self.l[(i, i)];
        }
        y
    }

    /// Solve `L^T x = y`.
    pub fn backward(&self, y: &[T]) -> Vec<T> {
        let n = self.dim();
        assert_eq!(y.len(), n);
        let mut x = vec![T::zero(); n];
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in (i + 1)..n {
                s = s - self.l[(k, i)] * x[k];
            }
            x[i] = s / self.l[(i, i)];
        }
        x
    }

    /// Solve `(L L^T) x = b`.
    pub fn solve(&self, b: &[T]) -> Vec<T> {
        self.backward(&self.forward(b))
    }
}

fn pivot_tolerance<T: Scalar>(s: &Mat<T>) -> T {
    let max_diag = (0..s.nrows()).fold(T::zero(), |acc, i| acc.max(s[(i, i)].abs()));
    // 1e-12 is calibrated for f64; scale by the epsilon ratio for other scalars.
    let rtol = T::from_f64_lossy(PIVOT_RTOL * (T::epsilon().to_f64().unwrap() / f64::EPSILON));
    rtol * max_diag.max(T::one())
}

/// Cholesky factorization of a symmetric positive definite matrix.
///
/// Fails with `NotPositiveDefinite` as soon as a pivot drops to the
/// tolerance `1e-12 * max diagonal`.
pub fn cholesky<T: Scalar>(s: &Mat<T>) -> Result<CholFactor<T>> {
    cholesky_impl(s, false)
}

/// Cholesky variant for positive *semi*-definite matrices (singular
/// conditional covariances): a pivot within tolerance of zero zeroes out its
/// column instead of failing. Pivots below `-tolerance` still fail.
pub fn cholesky_psd<T: Scalar>(s: &Mat<T>) -> Result<CholFactor<T>> {
    cholesky_impl(s, true)
}

fn cholesky_impl<T: Scalar>(s: &Mat<T>, allow_semidefinite: bool) -> Result<CholFactor<T>> {
    assert_eq!(s.nrows(), s.ncols(), "cholesky needs a square matrix");
    let n = s.nrows();
    let tol = pivot_tolerance(s);
    let mut l = Mat::zeros(n, n);
    for j in 0..n {
        let mut d = s[(j, j)];
        for k in 0..j {
            d = d - l[(j, k)] * l[(j, k)];
        }
        if d <= tol {
            // For PSD inputs a vanishing pivot means the whole remaining
            // column is linearly dependent; record a zero column.
            let neg_tol =
                T::from_f64_lossy(1e-10 * (T::epsilon().to_f64().unwrap() / f64::EPSILON));
            if allow_semidefinite && d >= -tol.max(neg_tol) {
                continue;
            }
            return Err(Error::NotPositiveDefinite {
                index: j,
                pivot: d.to_f64().unwrap_or(f64::NAN),
            });
        }
        let dj = d.sqrt();
        l[(j, j)] = dj;
        for i in (j + 1)..n {
            let mut v = s[(i, j)];
            for k in 0..j {
                v = v - l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = v / dj;
        }
    }
    Ok(CholFactor { l })
}
