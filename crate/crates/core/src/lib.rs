//! Bayesian VAR-X forecasting toolkit: conjugate posterior and samplers,
//! stability-filtered forecast simulation with truncated credible intervals,
//! hyperparameter search, accuracy metrics and comparison tests, nonlinear
//! local projections, and wavelet coherence with FDR control.

// `!(x > y)` is used deliberately so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bvar;
pub mod commands;
pub mod compare;
pub mod config;
pub mod error;
pub mod forecast;
pub mod io;
pub mod linalg;
pub mod lp;
pub mod metrics;
pub mod panel;
pub mod sim;
pub mod svg;
pub mod tuner;
pub mod wavelet;

pub use error::{Error, Result};
