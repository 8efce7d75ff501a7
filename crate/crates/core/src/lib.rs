//! Forecasting toolkit for job application counts (JACs).
//!
//! A job posting carries text, categorical, skill, location, and numeric
//! fields; the number of applications it has accumulated by day `t` is the
//! regression target. This crate provides the whole desk-scale pipeline:
//!
//! - [`datamodel`]: domain types plus JSONL/TSV ingestion and validation.
//! - [`synthgen`]: a deterministic synthetic corpus generator with a
//!   long-tailed count distribution and a plantable feature signal.
//! - [`featfusion`]: per-modality embeddings concatenated into one fused
//!   feature vector per `(job, day)` pair.
//! - [`lmserialize`]: renders every modality as sentences in a single
//!   paragraph for external language-model encoders, and imports their
//!   embeddings back.
//! - [`mlptrain`]: a from-scratch MLP regressor (Glorot init, ReLU, L1 loss,
//!   Adam, early stopping).
//! - [`tsforecast`]: feature-agnostic intermittent-demand baselines (SES,
//!   Croston family, TSB, ADIDA, IMAPA, window average, autoregressive).
//! - [`evalreport`]: MAE/MALE metrics with per-day, per-count, and overall
//!   grouping, plus plot-ready CSV emission.

pub mod datamodel;
pub mod error;
pub mod evalreport;
pub mod featfusion;
pub(crate) mod hashing;
pub mod lmserialize;
pub mod mlptrain;
pub mod synthgen;
pub mod tsforecast;

pub use error::{Error, Result};
