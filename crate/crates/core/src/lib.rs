//! Self-normalized conditional predictive ability (SN-CPA) statistics.
//!
//! Every test in this crate operates on a [`TransformedSeries`]: the loss
//! differential of two competing forecasts multiplied by a test function
//! that is known at the forecast origin. The self-normalized statistics
//! studentize the sample mean of that series by a functional of its own
//! centered partial-sum (CUSUM) path, so no long-run variance estimate is
//! needed:
//!
//! * [`q_scalar`] / [`q_scalar_onestep`]: `n·Z̄² / R²`, with `R` the adjusted
//!   range of the CUSUM path.
//! * [`q_vector`]: `n·Z̄ᵀ U⁻¹ Z̄`, with `U` the matrix CUSUM normalizer.
//! * [`q_vector_onestep`]: LDL-decorrelated, componentwise range-normalized.
//!
//! The [`hac`] module provides the HAC-based Diebold–Mariano and
//! Giacomini–White benchmarks together with the Shao-type unconditional
//! self-normalized DM statistic.
//!
//! All numerics are generic over [`Scalar`] (`f32` or `f64`); the `*64`
//! aliases below name the common double-precision instantiations.

pub mod error;
pub mod hac;
pub mod ldl;
pub mod matrix;
pub mod result;
pub mod scalar;
pub mod selfnorm;
pub mod series;

pub use error::{Error, Result};
pub use hac::{
    chi2_quantile, hac_lrv, normal_two_sided_critical, t_dm, t_gw, t_sn, Bandwidth, HacConfig,
    Kernel,
};
pub use ldl::{ldl, LdlFactors};
pub use matrix::Matrix;
pub use result::{Decision, StatFamily, TestResult};
pub use scalar::Scalar;
pub use selfnorm::{
    adjusted_range, matrix_normalizer, q_scalar, q_scalar_onestep, q_vector, q_vector_onestep,
    HorizonCheck,
};
pub use series::{cusum, transform, CusumPath, TransformedSeries};

pub type Matrix64 = Matrix<f64>;
pub type TransformedSeries64 = TransformedSeries<f64>;
pub type CusumPath64 = CusumPath<f64>;
pub type TestResult64 = TestResult<f64>;
pub type LdlFactors64 = LdlFactors<f64>;

pub type Matrix32 = Matrix<f32>;
pub type TransformedSeries32 = TransformedSeries<f32>;
pub type TestResult32 = TestResult<f32>;
