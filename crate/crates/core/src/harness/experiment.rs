use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

use super::config::ExperimentConfig;
use crate::apgt::{run_with, StepReport};
use crate::error::{Error, Result};
use crate::model::check_dim;
use crate::scenarios::{
    default_epsilons, generate_ground_truth, generate_stream, TruthTimeline, GENERATOR_NAME,
};

/// Version of the CSV layout written by [`render_csv`].
pub const CSV_FORMAT_VERSION: u32 = 1;

/// `MSE_n = (1/(τL)) Σ_i ‖a*_i(n) − a_n(i)‖²` for `τ` runs of equal length.
///
/// `runs[i][n]` is the estimate of realization `i` after processing sample `n`;
/// `truths[i]` is that realization's ground truth.
pub fn mse_curve(runs: &[Vec<Vec<f64>>], truths: &[TruthTimeline]) -> Result<Vec<f64>> {
    if runs.is_empty() {
        return Err(Error::InvalidParameter("no runs to average".into()));
    }
    check_dim(runs.len(), truths.len())?;
    let len = runs[0].len();
    let dim = truths[0].initial.len();
    let mut mse = vec![0.0; len];
    for (run, truth) in runs.iter().zip(truths) {
        check_dim(len, run.len())?;
        for (n, estimate) in run.iter().enumerate() {
            check_dim(dim, estimate.len())?;
            mse[n] += squared_error(truth.at(n), estimate);
        }
    }
    let scale = 1.0 / (runs.len() * dim) as f64;
    Ok(mse.into_iter().map(|v| v * scale).collect())
}

fn squared_error(truth: &[f64], estimate: &[f64]) -> f64 {
    truth
        .iter()
        .zip(estimate)
        .map(|(a, b)| (a - b) * (a - b))
        .sum()
}

/// Per-realization trace; only what the reduction needs is kept.
struct Trace {
    sq_err: Vec<f64>,
    /// `probes[n][j]`: value of probe column `j` at iteration `n`, NaN if undefined.
    probes: Vec<Vec<f64>>,
    elapsed_ns: u128,
}

fn probe_values(report: &StepReport, cfg: &ExperimentConfig) -> Vec<f64> {
    let p = &report.probes;
    let mut row = Vec::new();
    if cfg.probes.slab_distance {
        row.push(p.slab_distance.unwrap_or(f64::NAN));
    }
    if cfg.probes.omega_distance {
        row.push(match &p.omega {
            Some(o) if o.is_feasible() => o.after,
            _ => f64::NAN,
        });
    }
    if cfg.probes.sparsity {
        row.push(p.sparsity.map_or(f64::NAN, |s| s as f64));
    }
    if cfg.probes.theta_equivalence {
        row.push(p.theta_gap.unwrap_or(f64::NAN));
    }
    row
}

fn run_realization(cfg: &ExperimentConfig, index: usize) -> Result<Trace> {
    let scenario = cfg.scenario.realization(index);
    let a_star = generate_ground_truth(&scenario)?;
    let stream = generate_stream(&scenario, &a_star)?;
    let epsilons = default_epsilons(&scenario, cfg.eps_multiplier)?;
    let truth = stream.truth;

    zero_estimator_check(&truth, scenario.len)?;

    let mut sq_err = Vec::with_capacity(scenario.len);
    let mut probes = Vec::with_capacity(if cfg.probes == Default::default() {
        0
    } else {
        scenario.len
    });
    let start = Instant::now();
    run_with(
        vec![0.0; scenario.dim],
        stream.samples,
        epsilons,
        &cfg.algo,
        &cfg.probes,
        |report| {
            sq_err.push(squared_error(truth.at(report.n), &report.a_next));
            let row = probe_values(report, cfg);
            if !row.is_empty() {
                probes.push(row);
            }
            Ok(())
        },
    )?;
    Ok(Trace {
        sq_err,
        probes,
        elapsed_ns: start.elapsed().as_nanos(),
    })
}

/// The zero estimator must reproduce the analytic `‖a*(n)‖² / L`.
fn zero_estimator_check(truth: &TruthTimeline, len: usize) -> Result<()> {
    let dim = truth.initial.len();
    let zero = vec![0.0; dim];
    let checkpoints = [0, truth.change.as_ref().map_or(0, |(at, _)| *at)];
    for &n in checkpoints.iter().filter(|&&n| n < len) {
        let a = truth.at(n);
        let curve = mse_curve(
            &[vec![zero.clone()]],
            &[TruthTimeline {
                initial: a.to_vec(),
                change: None,
            }],
        )?;
        let analytic = a.iter().map(|v| v * v).sum::<f64>() / dim as f64;
        if (curve[0] - analytic).abs() > 1e-12 * analytic.max(1.0) {
            return Err(Error::InvalidParameter(format!(
                "zero-estimator self-check failed at n = {n}: {} vs {analytic}",
                curve[0]
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Crossing {
    pub threshold: f64,
    /// First iteration with `MSE_n ≤ threshold`.
    pub iteration: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub iterations: usize,
    pub realizations: usize,
    pub final_mse: Option<f64>,
    pub crossings: Vec<Crossing>,
    /// Mean wall time of one recursion step, probes included.
    pub ns_per_iteration: f64,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub mse: Vec<f64>,
    /// Probe columns averaged over realizations (theta-equivalence takes the maximum).
    pub probes: Vec<Vec<f64>>,
    pub probe_columns: Vec<&'static str>,
    pub summary: Summary,
}

/// Runs `τ` independent realizations and averages them. Output is independent
/// of the thread count.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cfg.threads {
        builder = builder.num_threads(t);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let traces: Vec<Result<Trace>> = pool.install(|| {
        (0..cfg.realizations)
            .into_par_iter()
            .map(|i| run_realization(cfg, i))
            .collect()
    });

    let len = cfg.scenario.len;
    let columns = cfg.probes.columns();
    let theta_col = columns.iter().position(|c| *c == "theta-equivalence");
    let mut mse = vec![0.0; len];
    let mut probe_sum = vec![vec![0.0; columns.len()]; if columns.is_empty() { 0 } else { len }];
    let mut probe_count = probe_sum.clone();
    let mut elapsed_ns = 0u128;
    for (index, trace) in traces.into_iter().enumerate() {
        let trace = trace.map_err(|e| Error::Realization {
            index,
            source: Box::new(e),
        })?;
        for (acc, v) in mse.iter_mut().zip(&trace.sq_err) {
            *acc += v;
        }
        for (n, row) in trace.probes.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v.is_nan() {
                    continue;
                }
                if Some(j) == theta_col {
                    probe_sum[n][j] = f64::max(probe_sum[n][j], v);
                    probe_count[n][j] = 1.0;
                } else {
                    probe_sum[n][j] += v;
                    probe_count[n][j] += 1.0;
                }
            }
        }
        elapsed_ns += trace.elapsed_ns;
    }
    let scale = 1.0 / (cfg.realizations * cfg.scenario.dim) as f64;
    for v in &mut mse {
        *v *= scale;
    }
    let probes = probe_sum
        .iter()
        .zip(&probe_count)
        .map(|(sum, count)| {
            sum.iter()
                .zip(count)
                .map(|(s, &c)| if c > 0.0 { s / c } else { f64::NAN })
                .collect()
        })
        .collect();

    let crossings = cfg
        .thresholds
        .iter()
        .map(|&threshold| Crossing {
            threshold,
            iteration: mse.iter().position(|&m| m <= threshold),
        })
        .collect();
    let steps = (len * cfg.realizations).max(1);
    let summary = Summary {
        iterations: len,
        realizations: cfg.realizations,
        final_mse: mse.last().copied(),
        crossings,
        ns_per_iteration: elapsed_ns as f64 / steps as f64,
    };
    Ok(ExperimentOutput {
        mse,
        probes,
        probe_columns: columns,
        summary,
    })
}

fn format_real(v: f64) -> String {
    format!("{v:.16e}")
}

/// CSV text: `#` metadata lines, the header `iteration,mse[,probes]`, one row per iteration.
pub fn render_csv(cfg: &ExperimentConfig, out: &ExperimentOutput) -> String {
    let mut text = String::new();
    let _ = writeln!(text, "# apgt experiment");
    let _ = writeln!(text, "# format-version: {CSV_FORMAT_VERSION}");
    let _ = writeln!(text, "# generator: {GENERATOR_NAME}");
    let _ = writeln!(text, "# seed: {}", cfg.scenario.seed);
    for (key, value) in cfg.to_pairs() {
        let _ = writeln!(text, "# config: {key}={value}");
    }
    if let Some(at) = cfg.scenario.change_at {
        let _ = writeln!(
            text,
            "# change: {} zero coefficients become nonzero at iteration {at}",
            cfg.scenario.change_count
        );
    }
    let mut header = vec!["iteration", "mse"];
    header.extend(&out.probe_columns);
    let _ = writeln!(text, "{}", header.join(","));
    for (n, m) in out.mse.iter().enumerate() {
        text.push_str(&n.to_string());
        text.push(',');
        text.push_str(&format_real(*m));
        if let Some(row) = out.probes.get(n) {
            for v in row {
                text.push(',');
                text.push_str(&format_real(*v));
            }
        }
        text.push('\n');
    }
    text
}

pub fn write_csv(path: &Path, cfg: &ExperimentConfig, out: &ExperimentOutput) -> Result<()> {
    fs::write(path, render_csv(cfg, out)).map_err(|e| Error::io(path, e))
}
