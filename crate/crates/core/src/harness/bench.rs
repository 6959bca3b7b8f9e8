use std::time::Instant;

use super::config::ExperimentConfig;
use crate::apgt::ApgtState;
use crate::error::{Error, Result};
use crate::scenarios::{default_epsilons, generate_ground_truth, generate_stream};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingRow {
    pub dim: usize,
    /// Median wall time of one recursion step after warm-up.
    pub ns_per_iteration: f64,
}

/// Times the recursion at each `L` in `dims`.
///
/// Window size and the remaining settings come from `base`; true and estimated
/// sparsity keep their ratio to `base.scenario.dim`. The first `max(q, N/10)`
/// steps, during which the window fills, are excluded.
pub fn bench_linear_scaling(base: &ExperimentConfig, dims: &[usize]) -> Result<Vec<ScalingRow>> {
    if dims.len() < 2 {
        return Err(Error::Config(format!(
            "scaling benchmark needs at least two dimensions, got {}",
            dims.len()
        )));
    }
    if dims.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config(
            "dimensions must be strictly ascending".into(),
        ));
    }
    let warmup = base.algo.window.max(base.scenario.len / 10);
    if base.scenario.len <= warmup {
        return Err(Error::Config(format!(
            "iters = {} leaves no timed steps after a warm-up of {warmup}",
            base.scenario.len
        )));
    }
    dims.iter()
        .map(|&dim| time_dim(base, dim, warmup))
        .collect()
}

fn scaled(k: usize, dim: usize, base_dim: usize) -> usize {
    ((k * dim + base_dim / 2) / base_dim).clamp(1, dim - 1)
}

fn time_dim(base: &ExperimentConfig, dim: usize, warmup: usize) -> Result<ScalingRow> {
    let mut cfg = base.clone();
    cfg.scenario.dim = dim;
    cfg.scenario.sparsity = scaled(base.scenario.sparsity, dim, base.scenario.dim);
    cfg.algo.sparsity = scaled(base.algo.sparsity, dim, base.scenario.dim);
    cfg.validate()?;

    let a_star = generate_ground_truth(&cfg.scenario)?;
    let stream = generate_stream(&cfg.scenario, &a_star)?;
    let epsilons = default_epsilons(&cfg.scenario, cfg.eps_multiplier)?;
    let mut state = ApgtState::new(vec![0.0; dim], cfg.algo.clone())?;
    let mut times = Vec::with_capacity(cfg.scenario.len - warmup);
    for (n, (sample, eps)) in stream.samples.into_iter().zip(epsilons).enumerate() {
        let start = Instant::now();
        let (next, _) = state.step(sample, eps)?;
        let elapsed = start.elapsed().as_nanos() as f64;
        state = next;
        if n >= warmup {
            times.push(elapsed);
        }
    }
    times.sort_by(f64::total_cmp);
    Ok(ScalingRow {
        dim,
        ns_per_iteration: times[times.len() / 2],
    })
}
