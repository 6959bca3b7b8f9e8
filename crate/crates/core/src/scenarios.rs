//! Synthetic compressed-sensing streams: Gaussian sensing vectors, a sparse
//! ground truth, additive white Gaussian noise and an optional abrupt change.
//!
//! All randomness comes from ChaCha8 seeded with the configured seed; the ground
//! truth, the sample stream and the change event use separate ChaCha streams so
//! each can be regenerated on its own.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::model::{check_dim, Sample};

/// Name recorded in experiment output alongside the seed.
pub const GENERATOR_NAME: &str = "ChaCha8Rng/rand_chacha-0.9+StandardNormal/rand_distr-0.5";

const TRUTH_STREAM: u64 = 0;
const SAMPLE_STREAM: u64 = 1;
const CHANGE_STREAM: u64 = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    /// Ambient dimension `L`.
    pub dim: usize,
    /// True sparsity `K*`.
    pub sparsity: usize,
    /// Noise variance `σ²`.
    pub noise_var: f64,
    /// Stream length `N`.
    pub len: usize,
    pub seed: u64,
    /// Time index at which the unknown vector changes.
    pub change_at: Option<usize>,
    /// Number of zero coefficients that become nonzero at `change_at`.
    pub change_count: usize,
}

impl ScenarioConfig {
    pub fn new(dim: usize, sparsity: usize, noise_var: f64, len: usize, seed: u64) -> Self {
        ScenarioConfig {
            dim,
            sparsity,
            noise_var,
            len,
            seed,
            change_at: None,
            change_count: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(Error::InvalidParameter(format!(
                "dimension must be at least 2, got {}",
                self.dim
            )));
        }
        if self.sparsity < 1 || self.sparsity > self.dim {
            return Err(Error::SparsityOutOfRange {
                k: self.sparsity,
                max: self.dim,
            });
        }
        if !(self.noise_var >= 0.0) || !self.noise_var.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "noise variance must be finite and >= 0, got {}",
                self.noise_var
            )));
        }
        if let Some(at) = self.change_at {
            if at >= self.len {
                return Err(Error::InvalidParameter(format!(
                    "change time {at} must precede the stream end {}",
                    self.len
                )));
            }
            if self.change_count > self.dim - self.sparsity {
                return Err(Error::InvalidParameter(format!(
                    "cannot activate {} coefficients: only {} are zero",
                    self.change_count,
                    self.dim - self.sparsity
                )));
            }
        }
        Ok(())
    }

    /// The same scenario with the seed of realization `index`.
    pub fn realization(&self, index: usize) -> Self {
        ScenarioConfig {
            seed: self.seed.wrapping_add(index as u64),
            ..self.clone()
        }
    }

    pub fn sigma(&self) -> f64 {
        self.noise_var.sqrt()
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }
}

/// Ground truth as a function of time.
#[derive(Debug, Clone, PartialEq)]
pub struct TruthTimeline {
    pub initial: Vec<f64>,
    /// `(time, vector)`: from `time` on, samples are generated from `vector`.
    pub change: Option<(usize, Vec<f64>)>,
}

impl TruthTimeline {
    pub fn at(&self, n: usize) -> &[f64] {
        match &self.change {
            Some((at, after)) if n >= *at => after,
            _ => &self.initial,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GeneratedStream {
    pub samples: Vec<Sample>,
    pub truth: TruthTimeline,
}

/// `K*` nonzeros at uniformly random positions with standard normal values.
pub fn generate_ground_truth(cfg: &ScenarioConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    let mut rng = cfg.rng(TRUTH_STREAM);
    let mut positions = index::sample(&mut rng, cfg.dim, cfg.sparsity).into_vec();
    positions.sort_unstable();
    let mut a = vec![0.0; cfg.dim];
    for l in positions {
        // a zero draw would silently lower the sparsity
        a[l] = loop {
            let v: f64 = rng.sample(StandardNormal);
            if v != 0.0 {
                break v;
            }
        };
    }
    Ok(a)
}

/// Samples `y_n = u_nᵀ a*(n) + v_n` with `u_n ~ N(0, I)` and `v_n ~ N(0, σ²)`.
pub fn generate_stream(cfg: &ScenarioConfig, a_star: &[f64]) -> Result<GeneratedStream> {
    cfg.validate()?;
    check_dim(cfg.dim, a_star.len())?;

    let change = match cfg.change_at {
        Some(at) => {
            let zeros: Vec<usize> = (0..cfg.dim).filter(|&l| a_star[l] == 0.0).collect();
            if cfg.change_count > zeros.len() {
                return Err(Error::InvalidParameter(format!(
                    "cannot activate {} coefficients: only {} are zero",
                    cfg.change_count,
                    zeros.len()
                )));
            }
            let mut rng = cfg.rng(CHANGE_STREAM);
            let mut picked = index::sample(&mut rng, zeros.len(), cfg.change_count).into_vec();
            picked.sort_unstable();
            let mut after = a_star.to_vec();
            for p in picked {
                after[zeros[p]] = loop {
                    let v: f64 = rng.sample(StandardNormal);
                    if v != 0.0 {
                        break v;
                    }
                };
            }
            Some((at, after))
        }
        None => None,
    };
    let truth = TruthTimeline {
        initial: a_star.to_vec(),
        change,
    };

    let mut rng = cfg.rng(SAMPLE_STREAM);
    let sigma = cfg.sigma();
    let mut samples = Vec::with_capacity(cfg.len);
    for n in 0..cfg.len {
        let u: Vec<f64> = (0..cfg.dim).map(|_| rng.sample(StandardNormal)).collect();
        let noise: f64 = rng.sample::<f64, _>(StandardNormal) * sigma;
        let a = truth.at(n);
        let y = u.iter().zip(a).map(|(x, w)| x * w).sum::<f64>() + noise;
        samples.push(Sample::new(n, u, y)?);
    }
    Ok(GeneratedStream { samples, truth })
}

pub const DEFAULT_EPS_MULTIPLIER: f64 = 1.3;

/// Constant tolerances `ε_n = multiplier · σ`.
pub fn default_epsilons(cfg: &ScenarioConfig, multiplier: f64) -> Result<Vec<f64>> {
    if !(multiplier >= 0.0) || !multiplier.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "tolerance multiplier must be finite and >= 0, got {multiplier}"
        )));
    }
    Ok(vec![multiplier * cfg.sigma(); cfg.len])
}
