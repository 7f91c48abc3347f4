//! Distributed robust learning: robust PCA and robust linear regression on
//! simulated nodes, fused by the geometric median of the node estimates.
//!
//! The crate is organized bottom-up:
//!
//! - [`estimate`]: the vector/matrix estimate type and its CSV form
//! - [`geom_median`]: Weiszfeld aggregation
//! - [`trimmed`]: trimmed inner products, covariances and correlations
//! - [`rpca`], [`rlr`]: single-node learners
//! - [`drl`]: partitioning, fault injection and aggregation
//! - [`synth`]: seeded synthetic scenarios
//! - [`theory`]: robustness constants and error bounds
//! - [`harness`]: config-driven sweeps producing CSV reports

// `!(x > 0.0)` style checks are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod drl;
pub mod error;
pub mod estimate;
pub mod geom_median;
pub mod harness;
pub mod linalg;
pub mod matrix;
pub mod metrics;
pub mod par;
pub mod rlr;
pub mod rng;
pub mod rpca;
pub mod synth;
pub mod theory;
pub mod trimmed;

pub use error::{DrlError, Result};
pub use estimate::{Estimate, EstimateKind};
pub use matrix::{Matrix, MatrixView};
