//! Observation model, constraint sets and coordinate subspaces.
//!
//! Indices inside the library are 0-based. Anything that leaves the process
//! (CSV, CLI output, `Display`) is 1-based.

use std::fmt;

use crate::error::{Error, Result};
use crate::thresholding::ShrinkageRule;

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

pub(crate) fn check_dim(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, actual })
    }
}

/// One training pair `(u_n, y_n)` of the linear model `y_n = u_nᵀ a* + v_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub n: usize,
    pub u: Vec<f64>,
    pub y: f64,
}

impl Sample {
    pub fn new(n: usize, u: Vec<f64>, y: f64) -> Result<Self> {
        if u.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "ambient dimension must be at least 2, got {}",
                u.len()
            )));
        }
        if u.iter().all(|&v| v == 0.0) {
            return Err(Error::ZeroInput);
        }
        Ok(Sample { n, u, y })
    }

    pub fn dim(&self) -> usize {
        self.u.len()
    }
}

/// The closed set `{a : |uᵀa − y| ≤ ε}`.
///
/// `‖u‖²` is computed once on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperslab {
    u: Vec<f64>,
    y: f64,
    epsilon: f64,
    u_norm_sq: f64,
}

impl Hyperslab {
    pub fn new(u: Vec<f64>, y: f64, epsilon: f64) -> Result<Self> {
        if !(epsilon >= 0.0) || !epsilon.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "hyperslab tolerance must be finite and >= 0, got {epsilon}"
            )));
        }
        let u_norm_sq = norm_sq(&u);
        if u_norm_sq == 0.0 {
            return Err(Error::ZeroInput);
        }
        Ok(Hyperslab {
            u,
            y,
            epsilon,
            u_norm_sq,
        })
    }

    pub fn from_sample(sample: Sample, epsilon: f64) -> Result<Self> {
        Hyperslab::new(sample.u, sample.y, epsilon)
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn u_norm_sq(&self) -> f64 {
        self.u_norm_sq
    }

    pub fn dim(&self) -> usize {
        self.u.len()
    }

    /// Signed residual `uᵀa − y`.
    pub fn residual(&self, a: &[f64]) -> f64 {
        dot(&self.u, a) - self.y
    }

    pub fn contains(&self, a: &[f64]) -> bool {
        self.residual(a).abs() <= self.epsilon
    }
}

/// Strictly ascending tuple of coordinate indices, identifying the subspace
/// of vectors that vanish outside it.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct SupportTuple {
    indices: Vec<usize>,
}

impl SupportTuple {
    /// Builds a tuple from 0-based indices; they must be strictly ascending and below `dim`.
    pub fn new(indices: Vec<usize>, dim: usize) -> Result<Self> {
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(
                "support tuple must be strictly ascending".into(),
            ));
        }
        if let Some(&last) = indices.last() {
            if last >= dim {
                return Err(Error::InvalidParameter(format!(
                    "support index {} exceeds dimension {dim}",
                    last + 1
                )));
            }
        }
        Ok(SupportTuple { indices })
    }

    /// Builds a tuple from 1-based indices.
    pub fn from_one_based(indices: &[usize], dim: usize) -> Result<Self> {
        if indices.contains(&0) {
            return Err(Error::InvalidParameter("1-based index 0".into()));
        }
        SupportTuple::new(indices.iter().map(|i| i - 1).collect(), dim)
    }

    pub(crate) fn from_sorted_unchecked(indices: Vec<usize>) -> Self {
        debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
        SupportTuple { indices }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.indices.iter().map(|i| i + 1).collect()
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.indices.binary_search(&index).is_ok()
    }

    pub fn is_subset_of(&self, other: &SupportTuple) -> bool {
        self.indices.iter().all(|&i| other.contains(i))
    }

    pub fn intersection(&self, other: &SupportTuple) -> SupportTuple {
        SupportTuple {
            indices: self
                .indices
                .iter()
                .copied()
                .filter(|&i| other.contains(i))
                .collect(),
        }
    }
}

impl fmt::Display for SupportTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, i) in self.indices.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", i + 1)?;
        }
        write!(f, ")")
    }
}

/// True iff `a` vanishes (exactly) outside `support`.
pub fn in_subspace(a: &[f64], support: &SupportTuple, dim: usize) -> Result<bool> {
    check_dim(dim, a.len())?;
    let mut kept = support.indices().iter().peekable();
    for (l, &v) in a.iter().enumerate() {
        if kept.peek() == Some(&&l) {
            kept.next();
        } else if v != 0.0 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Indices of the exactly-nonzero components. The zero vector yields an empty tuple.
pub fn support(a: &[f64]) -> SupportTuple {
    SupportTuple::from_sorted_unchecked(
        a.iter()
            .enumerate()
            .filter(|(_, &v)| v != 0.0)
            .map(|(l, _)| l)
            .collect(),
    )
}

/// Number of exactly-nonzero components.
pub fn l0_norm(a: &[f64]) -> usize {
    a.iter().filter(|&&v| v != 0.0).count()
}

/// Parameters of one APGT run.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgoParams {
    /// Target sparsity level `K`.
    pub sparsity: usize,
    /// Number of hyperslabs processed concurrently.
    pub window: usize,
    /// Relaxation floor `ε′ ∈ (0, 1]`.
    pub eps_prime: f64,
    /// `μ_n = mu_scale · ℳ_n`, with `mu_scale ∈ [ε′, 2 − ε′]`.
    pub mu_scale: f64,
    /// Strict-shrinkage margin `δ > 0`.
    pub delta: f64,
    pub rule: ShrinkageRule,
}

pub const DEFAULT_DELTA: f64 = 1e-6;

impl AlgoParams {
    pub fn new(sparsity: usize, window: usize, rule: ShrinkageRule) -> Self {
        AlgoParams {
            sparsity,
            window,
            eps_prime: 1.0,
            mu_scale: 1.0,
            delta: DEFAULT_DELTA,
            rule,
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if dim < 2 {
            return Err(Error::InvalidParameter(format!(
                "ambient dimension must be at least 2, got {dim}"
            )));
        }
        if self.sparsity < 1 || self.sparsity > dim - 1 {
            return Err(Error::SparsityOutOfRange {
                k: self.sparsity,
                max: dim - 1,
            });
        }
        if self.window < 1 {
            return Err(Error::InvalidParameter("window size q must be >= 1".into()));
        }
        if !(self.eps_prime > 0.0 && self.eps_prime <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "eps_prime must lie in (0, 1], got {}",
                self.eps_prime
            )));
        }
        if !(self.mu_scale >= self.eps_prime && self.mu_scale <= 2.0 - self.eps_prime) {
            return Err(Error::InvalidParameter(format!(
                "mu_scale must lie in [{}, {}], got {}",
                self.eps_prime,
                2.0 - self.eps_prime,
                self.mu_scale
            )));
        }
        if !(self.delta > 0.0) || !self.delta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "delta must be positive, got {}",
                self.delta
            )));
        }
        self.rule.validate(dim, self.sparsity)
    }
}
