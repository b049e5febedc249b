//! Stable/unstable combustor classification from acoustic pressure signals.
//!
//! The library extracts six nonlinear time-series features from sliding
//! windows of a pressure signal — RMS, SNR, Hurst exponent, box-counting
//! fractal dimension, laminarity, and trapping time — and trains
//! entropy-based decision trees to separate stable combustion noise from
//! unstable limit-cycle oscillation.
//!
//! Modules follow the analysis chain:
//!
//! * [`signal_io`] — load, synthesize, and window pressure records
//! * [`spectral`] — amplitude spectra, dominant peak, RMS, SNR
//! * [`embedding`] — AMI delay, FNN dimension, delay embedding
//! * [`rqa`] — recurrence matrices, laminarity, trapping time
//! * [`complexity`] — box-counting dimension and rescaled-range Hurst
//! * [`classifier`] — entropy/information-gain decision trees, K-fold
//! * [`pipeline`] — window-level feature tables, the three two-feature
//!   models, reports, and plot-data export

// `!(x > 0.0)` validation guards reject NaN along with non-positive
// values; the negated form is intentional.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classifier;
pub mod complexity;
pub mod embedding;
pub mod error;
pub mod pipeline;
pub mod rqa;
pub mod signal_io;
pub mod spectral;

pub use error::{Error, Result};
