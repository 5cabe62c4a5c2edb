//! Wind and photovoltaic power scenario generation under consecutive
//! anomalous weather (strong wind with heavy rain).
//!
//! The pipeline fits parametric marginals and a Frank copula to hourly
//! weather history, builds the 16-cell anomalous-weather scenario tree,
//! generates Monte-Carlo power scenarios and reduces them by probability
//! distance, and propagates input moments through the power curves with the
//! unscented transform.

// `!(x > 0.0)` is how parameter checks reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod copula;
pub mod engine;
pub mod error;
pub mod gof;
pub mod marginal;
pub mod numeric;
pub mod pipeline;
pub mod power;
pub mod rng;
pub mod tree;
pub mod ut;

pub use error::{Error, ExitCode, Result};
