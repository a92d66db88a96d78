//! Population-graph construction and GNN brain-age regression.
//!
//! - [`cohort`]: subject tables, synthetic cohorts, CSV I/O and splits.
//! - [`builders`]: the six edge-construction strategies.
//! - [`metrics`]: label homophily and degree statistics.
//! - [`models`]: MLP, GCN, GraphSAGE, GAT and Chebyshev regressors.
//! - [`harness`]: training, benchmarking, export and configuration.
//! - [`numeric`]: tensors, CSR matrices, reverse-mode autodiff, AdamW.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod builders;
pub mod cohort;
mod error;
pub mod graph;
pub mod harness;
pub mod metrics;
pub mod models;
pub mod numeric;

pub use error::{Error, Result};
pub use graph::{BuilderMethod, PopulationGraph};
