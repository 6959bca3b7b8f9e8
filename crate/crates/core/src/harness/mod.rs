//! Monte-Carlo experiments over synthetic streams, CSV export and scaling benchmarks.

pub mod bench;
pub mod config;
pub mod experiment;

pub use bench::{bench_linear_scaling, ScalingRow};
pub use config::{ConfigPairs, ExperimentConfig};
pub use experiment::{mse_curve, render_csv, run_experiment, write_csv, ExperimentOutput, Summary};
