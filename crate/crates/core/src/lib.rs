//! Online sparse signal recovery with generalized thresholding.
//!
//! The estimator processes one measurement `(u_n, y_n)` at a time. Each
//! measurement defines a hyperslab of estimates consistent with it; the
//! recursion averages projections onto recently violated slabs, extrapolates,
//! and applies a generalized thresholding operator that keeps the `K` largest
//! components and shrinks the rest.
//!
//! Modules:
//! - [`model`]: samples, hyperslabs, support tuples, parameters.
//! - [`thresholding`]: the thresholding operator and its shrinkage rules.
//! - [`projections`]: hyperslab projection and distance.
//! - [`apgt`]: the online recursion, probes and reference oracles.
//! - [`scenarios`]: synthetic compressed-sensing streams.
//! - [`harness`]: Monte-Carlo experiments, CSV export and scaling benchmarks.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod apgt;
pub mod error;
pub mod harness;
pub mod model;
pub mod projections;
pub mod scenarios;
pub mod thresholding;

pub use apgt::{run, run_with, ApgtState, ProbeConfig, StepReport};
pub use error::{Error, Result};
pub use model::{in_subspace, support, AlgoParams, Hyperslab, Sample, SupportTuple};
pub use thresholding::{apply_gt, GtContext, Lambda, ShrinkageRule};
