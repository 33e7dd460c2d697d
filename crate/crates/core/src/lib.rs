//! Goodness-of-fit testing for data that may have been partially sorted.
//!
//! A sample is run through `k = round(beta n)` bubble sort passes and the
//! running maximum of the result is compared with its limit curve under
//! the null distribution. The scaled sup distance has a generalized
//! Kolmogorov law that depends only on `beta`.

// `!(x > 0.0)` style checks are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod error;

pub mod curves;
pub mod gkdist;
pub mod psort;
pub mod simlab;
pub mod testkit;

pub use error::{Error, Result};
