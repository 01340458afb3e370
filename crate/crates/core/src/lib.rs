//! Simulation laboratory for identifiability-from-data experiments:
//! equicorrelated Gaussian models and their exact conditionals, two-level
//! random effects, binary dependence models, distinguishing-set probability
//! estimation, and the k-means fixed-classification experiments.
//!
//! The dense linear algebra and the k-means core are generic over the scalar
//! type (f32/f64 via `Scalar`); model specs, estimators and the Monte Carlo
//! layer run in f64. Concrete aliases for the generic types live at the
//! crate root.
//!
//! Everything consuming randomness takes either an explicit `&mut Rng` or a
//! [`Stream`] value; replicated computations derive one child stream per
//! replicate, so results are reproducible regardless of thread count.

pub mod distinguish;
pub mod error;
pub mod estimators;
pub mod gaussian;
pub mod kmeans;
pub mod mat;
pub mod models;
pub mod rng;
pub mod scalar;
pub mod stats;

pub use error::{Error, Result};
pub use rng::Stream;
pub use scalar::Scalar;

/// f64 aliases for the scalar-generic cores.
pub type Mat64 = mat::Mat<f64>;
pub type CholFactor64 = mat::CholFactor<f64>;
pub type MvNormal64 = gaussian::MvNormal<f64>;
pub type EquicorrSpec64 = gaussian::EquicorrSpec<f64>;
pub type MeanLaw64 = gaussian::MeanLaw<f64>;
pub type KMeansFit64 = kmeans::KMeansFit<f64>;
