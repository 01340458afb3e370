//! Shared statistical utilities: normal CDF helpers, exact binomial
//! confidence intervals, two-sample Kolmogorov-Smirnov, moment accumulators.

mod binom;
mod ks;
mod normal;
mod summary;

pub use binom::{clopper_pearson, Interval};
pub use ks::{ks2_statistic, ks2_test, KsReport};
pub use normal::{erf, erfc, normal_pdf, std_normal_cdf, std_normal_quantile};
pub use summary::{iqr, quantile, Moments};
