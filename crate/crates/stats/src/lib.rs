//! Statistical tests for comparing harm-category distributions and
//! per-stakeholder diversity counts.
//!
//! Every routine is generic over [`Scalar`] (`f32` or `f64`). The `*64`
//! aliases at the crate root fix the scalar to `f64`, which is what the
//! rest of the workspace uses.

pub mod chi2;
pub mod contingency;
pub mod contrast;
pub mod error;
pub mod holm;
pub mod result;
pub mod scalar;
pub mod special;
pub mod summary;
pub mod ttest;

pub use chi2::{chi_square_test, expected_counts};
pub use contingency::{ContingencyTable, DroppedLevels};
pub use contrast::percentage_point_contrast;
pub use error::StatsError;
pub use holm::holm_adjust;
pub use result::{TestMethod, TestResult};
pub use scalar::Scalar;
pub use summary::{mean, sample_std_dev, standard_error, unique_per_unit, DiversitySummary};
pub use ttest::{paired_t_test, paired_t_test_keyed};

pub type TestResult64 = TestResult<f64>;
pub type TestResult32 = TestResult<f32>;
pub type DiversitySummary64 = DiversitySummary<f64>;
pub type DiversitySummary32 = DiversitySummary<f32>;
