//! The adaptive projection-based generalized thresholding recursion.
//!
//! Each step observes one sample, turns it into a hyperslab, and moves the
//! estimate towards the average projection onto the currently violated slabs
//! of a sliding window before applying the generalized thresholding operator.

mod oracle;

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

pub use oracle::{least_distance, probe_omega_distance, step_theta_form, OmegaSet};

use crate::error::{Error, Result};
use crate::model::{check_dim, l0_norm, AlgoParams, Hyperslab, Sample};
use crate::projections::projection_coefficient;
use crate::thresholding::{apply_gt_in_place, GtContext};

/// Below this norm the averaged projection is treated as coinciding with the estimate.
pub const DEGENERATE_AGGREGATE_NORM: f64 = 1e-14;

/// Largest dimension and window for which the `Ω_n` distance probe is supported.
pub const OMEGA_PROBE_MAX_DIM: usize = 64;
pub const OMEGA_PROBE_MAX_WINDOW: usize = 8;

/// Current estimate `a_n` with the sliding window of hyperslabs.
///
/// Between steps the window holds the slabs with time indices `< n`. After
/// [`ApgtState::observe`] it also holds `S_n`, i.e. the index set
/// `{max(0, n−q+1), …, n}`, and the per-step quantities become defined.
#[derive(Debug, Clone)]
pub struct ApgtState {
    a: Vec<f64>,
    window: VecDeque<(usize, Hyperslab)>,
    n: usize,
    params: AlgoParams,
}

/// Everything computed by one step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub n: usize,
    /// Time indices of the active slabs, ascending.
    pub active: Vec<usize>,
    /// Uniform weights over `active`.
    pub weights: Vec<f64>,
    /// Extrapolation bound `ℳ_n ≥ 1`.
    pub m_n: f64,
    /// Relaxation `μ_n` actually used.
    pub mu: f64,
    /// `Σ ω_i P_i(a_n)`; equals `a_n` when no slab is active.
    pub aggregate: Vec<f64>,
    pub a_next: Vec<f64>,
    pub ctx: GtContext,
    /// `d(a_n, S_n)` for the newest slab.
    pub slab_distance: f64,
    /// `max_{j ∈ 𝒥_n} d(a_n, S_j)`.
    pub max_window_distance: f64,
    pub probes: ProbeRecord,
}

/// Optional per-step diagnostics, filled according to [`ProbeConfig`].
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ProbeRecord {
    pub slab_distance: Option<f64>,
    pub omega: Option<OmegaProbe>,
    pub sparsity: Option<usize>,
    pub theta_gap: Option<f64>,
}

/// Distances of the estimates before and after a step to `Ω_n`.
/// `f64::INFINITY` marks an empty `Ω_n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmegaProbe {
    pub before: f64,
    pub after: f64,
}

impl OmegaProbe {
    pub fn is_feasible(&self) -> bool {
        self.before.is_finite()
    }
}

/// Which diagnostics to record per iteration. MSE is always recorded by the harness.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ProbeConfig {
    pub slab_distance: bool,
    pub omega_distance: bool,
    pub sparsity: bool,
    pub theta_equivalence: bool,
}

impl ProbeConfig {
    pub fn all() -> Self {
        ProbeConfig {
            slab_distance: true,
            omega_distance: true,
            sparsity: true,
            theta_equivalence: true,
        }
    }

    /// CSV column names in output order.
    pub fn columns(&self) -> Vec<&'static str> {
        let mut cols = Vec::new();
        if self.slab_distance {
            cols.push("slab-distance");
        }
        if self.omega_distance {
            cols.push("omega-distance");
        }
        if self.sparsity {
            cols.push("sparsity");
        }
        if self.theta_equivalence {
            cols.push("theta-equivalence");
        }
        cols
    }
}

impl FromStr for ProbeConfig {
    type Err = Error;

    /// Comma-separated probe names; `mse` is accepted and always on, `none` selects nothing.
    fn from_str(s: &str) -> Result<Self> {
        let mut cfg = ProbeConfig::default();
        for name in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            match name {
                "mse" | "none" => {}
                "slab-distance" => cfg.slab_distance = true,
                "omega-distance" => cfg.omega_distance = true,
                "sparsity" => cfg.sparsity = true,
                "theta-equivalence" => cfg.theta_equivalence = true,
                "all" => cfg = ProbeConfig::all(),
                other => return Err(Error::Config(format!("unknown probe `{other}`"))),
            }
        }
        Ok(cfg)
    }
}

impl fmt::Display for ProbeConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut cols = vec!["mse"];
        cols.extend(self.columns());
        write!(f, "{}", cols.join(","))
    }
}

/// `ℳ_n = Σ ω_i ‖P_i − a‖² / ‖Σ ω_i P_i − a‖²`, or 1 when the average coincides with `a`.
pub fn extrapolation_mn(a: &[f64], projections: &[Vec<f64>], weights: &[f64]) -> Result<f64> {
    if projections.is_empty() || projections.len() != weights.len() {
        return Err(Error::WeightContract);
    }
    let total: f64 = weights.iter().sum();
    if weights.iter().any(|&w| !(w >= 0.0)) || (total - 1.0).abs() > 1e-12 {
        return Err(Error::WeightContract);
    }
    let mut average = vec![0.0; a.len()];
    let mut numerator = 0.0;
    for (p, &w) in projections.iter().zip(weights) {
        check_dim(a.len(), p.len())?;
        let mut sq = 0.0;
        for ((avg, &pl), &al) in average.iter_mut().zip(p).zip(a) {
            *avg += w * pl;
            sq += (pl - al).powi(2);
        }
        numerator += w * sq;
    }
    let denominator: f64 = average.iter().zip(a).map(|(m, x)| (m - x).powi(2)).sum();
    if denominator.sqrt() <= DEGENERATE_AGGREGATE_NORM {
        Ok(1.0)
    } else {
        Ok(numerator / denominator)
    }
}

impl ApgtState {
    pub fn new(initial: Vec<f64>, params: AlgoParams) -> Result<Self> {
        params.validate(initial.len())?;
        Ok(ApgtState {
            window: VecDeque::with_capacity(params.window),
            a: initial,
            n: 0,
            params,
        })
    }

    pub fn estimate(&self) -> &[f64] {
        &self.a
    }

    pub fn time(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    pub fn params(&self) -> &AlgoParams {
        &self.params
    }

    /// Slabs in the window, oldest first, with their time indices.
    pub fn window(&self) -> impl ExactSizeIterator<Item = (usize, &Hyperslab)> {
        self.window.iter().map(|(i, s)| (*i, s))
    }

    fn is_observed(&self) -> bool {
        self.window.back().is_some_and(|(i, _)| *i == self.n)
    }

    /// Pushes `S_n[ε_n]` built from `sample` into the window, evicting the oldest slab if full.
    pub fn observe(&mut self, sample: Sample, epsilon: f64) -> Result<()> {
        check_dim(self.dim(), sample.dim())?;
        if self.is_observed() {
            return Err(Error::InvalidParameter(format!(
                "sample for time {} already observed",
                self.n
            )));
        }
        let slab = Hyperslab::from_sample(sample, epsilon)?;
        if self.window.len() == self.params.window {
            self.window.pop_front();
        }
        self.window.push_back((self.n, slab));
        Ok(())
    }

    /// Time indices of the window slabs that `a_n` violates.
    pub fn active_set(&self) -> Vec<usize> {
        self.window
            .iter()
            .filter(|(_, s)| s.residual(&self.a).abs() > s.epsilon())
            .map(|(i, _)| *i)
            .collect()
    }

    /// Computes `a_{n+1}` from an observed state without advancing it.
    pub fn compute_step(&self) -> Result<StepReport> {
        if !self.is_observed() {
            return Err(Error::InvalidParameter(format!(
                "no sample observed for time {}",
                self.n
            )));
        }
        let a = &self.a;
        let mut active = Vec::with_capacity(self.window.len());
        let mut coefficients = Vec::with_capacity(self.window.len());
        let mut max_window_distance = 0.0f64;
        let mut slab_distance = 0.0;
        for (i, slab) in &self.window {
            let residual = slab.residual(a);
            let distance = (residual.abs() - slab.epsilon()).max(0.0) / slab.u_norm_sq().sqrt();
            max_window_distance = max_window_distance.max(distance);
            if *i == self.n {
                slab_distance = distance;
            }
            if residual.abs() > slab.epsilon() {
                active.push(*i);
                coefficients.push((projection_coefficient(residual, slab), slab));
            }
        }

        let weight = if active.is_empty() {
            0.0
        } else {
            1.0 / active.len() as f64
        };
        let weights = vec![weight; active.len()];

        // Σ ω_i P_i(a) − a = Σ ω_i c_i u_i, and ‖P_i(a) − a‖² = c_i² ‖u_i‖².
        let mut shift = vec![0.0; a.len()];
        let mut numerator = 0.0;
        for (c, slab) in &coefficients {
            let scaled = weight * c;
            for (s, &u) in shift.iter_mut().zip(slab.u()) {
                *s += scaled * u;
            }
            numerator += weight * c * c * slab.u_norm_sq();
        }
        let denominator: f64 = shift.iter().map(|s| s * s).sum();
        let m_n = if active.is_empty() || denominator.sqrt() <= DEGENERATE_AGGREGATE_NORM {
            1.0
        } else {
            numerator / denominator
        };
        let mu = self.params.mu_scale * m_n;

        let aggregate: Vec<f64> = a.iter().zip(&shift).map(|(x, s)| x + s).collect();
        let mut a_next: Vec<f64> = if active.is_empty() {
            a.clone()
        } else {
            a.iter().zip(&shift).map(|(x, s)| x + mu * s).collect()
        };
        let ctx = apply_gt_in_place(&mut a_next, &self.params)?;

        Ok(StepReport {
            n: self.n,
            active,
            weights,
            m_n,
            mu,
            aggregate,
            a_next,
            ctx,
            slab_distance,
            max_window_distance,
            probes: ProbeRecord::default(),
        })
    }

    fn advance(&mut self, a_next: Vec<f64>) {
        self.a = a_next;
        self.n += 1;
    }

    /// One full iteration: observe `sample`, compute `a_{n+1}`, advance to `n + 1`.
    pub fn step(mut self, sample: Sample, epsilon: f64) -> Result<(ApgtState, StepReport)> {
        self.observe(sample, epsilon)?;
        let report = self.compute_step()?;
        self.advance(report.a_next.clone());
        Ok((self, report))
    }

    fn step_probed(
        &mut self,
        sample: Sample,
        epsilon: f64,
        probes: &ProbeConfig,
    ) -> Result<StepReport> {
        self.observe(sample, epsilon)?;
        let mut report = self.compute_step()?;
        let omega = if probes.omega_distance {
            Some(OmegaSet::from_state(self)?)
        } else {
            None
        };
        report.probes = ProbeRecord {
            slab_distance: probes.slab_distance.then_some(report.slab_distance),
            omega: match &omega {
                Some(set) => Some(OmegaProbe {
                    before: set.distance(&self.a)?,
                    after: set.distance(&report.a_next)?,
                }),
                None => None,
            },
            sparsity: probes.sparsity.then(|| l0_norm(&report.a_next)),
            theta_gap: if probes.theta_equivalence {
                let oracle = step_theta_form(self)?;
                let gap: f64 = oracle
                    .iter()
                    .zip(&report.a_next)
                    .map(|(x, y)| (x - y).powi(2))
                    .sum();
                Some(gap.sqrt())
            } else {
                None
            },
        };
        self.advance(report.a_next.clone());
        Ok(report)
    }
}

/// Folds the recursion over `stream`, calling `on_step` with each report.
pub fn run_with<F>(
    initial: Vec<f64>,
    stream: impl IntoIterator<Item = Sample>,
    epsilons: impl IntoIterator<Item = f64>,
    params: &AlgoParams,
    probes: &ProbeConfig,
    mut on_step: F,
) -> Result<ApgtState>
where
    F: FnMut(&StepReport) -> Result<()>,
{
    let mut state = ApgtState::new(initial, params.clone())?;
    if probes.omega_distance
        && (state.dim() > OMEGA_PROBE_MAX_DIM || params.window > OMEGA_PROBE_MAX_WINDOW)
    {
        return Err(Error::Config(format!(
            "omega-distance probe requires L <= {OMEGA_PROBE_MAX_DIM} and q <= {OMEGA_PROBE_MAX_WINDOW}"
        )));
    }
    let mut samples = stream.into_iter();
    let mut epsilons = epsilons.into_iter();
    loop {
        match (samples.next(), epsilons.next()) {
            (Some(sample), Some(eps)) => {
                let report = state.step_probed(sample, eps, probes)?;
                on_step(&report)?;
            }
            (None, None) => return Ok(state),
            _ => {
                return Err(Error::InvalidParameter(
                    "sample stream and tolerance sequence differ in length".into(),
                ))
            }
        }
    }
}

/// Runs the recursion from `initial` over the whole stream and collects every report.
pub fn run(
    initial: Vec<f64>,
    stream: impl IntoIterator<Item = Sample>,
    epsilons: impl IntoIterator<Item = f64>,
    params: &AlgoParams,
    probes: &ProbeConfig,
) -> Result<Vec<StepReport>> {
    let mut reports = Vec::new();
    run_with(initial, stream, epsilons, params, probes, |r| {
        reports.push(r.clone());
        Ok(())
    })?;
    Ok(reports)
}
