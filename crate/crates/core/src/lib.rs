//! Maximum-likelihood estimation and asymptotic inference for general
//! pairwise comparison models on random comparison graphs.
//!
//! The pipeline is: pick a [`model::ModelSpec`], build or sample a
//! [`graph::ComparisonGraph`], attach outcomes as a [`data::Dataset`], fit
//! with [`mle::fit`], then use [`inference`] for plug-in variances,
//! confidence intervals and tests. [`spectral`] exposes the normalized
//! Laplacian objects behind the theory, and [`simulation`] runs the
//! Monte-Carlo coverage study.

// `!(x > 0.0)` is used on purpose so NaN falls into the rejection branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod data;
pub mod error;
pub mod graph;
pub mod inference;
pub mod mle;
pub mod model;
pub mod normal;
pub mod quadrature;
pub mod simulation;
pub mod spectral;

pub use error::{Error, Result};
