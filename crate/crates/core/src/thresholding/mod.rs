//! The generalized thresholding operator: keep the `K` largest components,
//! shrink the rest with a scalar rule.

mod select;
mod shrink;

use std::fmt;
use std::str::FromStr;

pub use select::{top_k_support, xi_value};
pub use shrink::{bridge_root, c_bt, shrink_bridge_half, shrink_hard, shrink_scad, shrink_soft};

use crate::error::{Error, Result};
use crate::model::{AlgoParams, SupportTuple};

/// Regularization parameter of a shrinkage rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Lambda {
    Fixed(f64),
    /// Recomputed from the input on every application.
    Adaptive,
}

impl Lambda {
    pub fn is_adaptive(&self) -> bool {
        matches!(self, Lambda::Adaptive)
    }
}

pub const DEFAULT_SCAD_ALPHA: f64 = 12.0;
pub const DEFAULT_BRIDGE_EXTRA: usize = 10;

/// Scalar rule applied outside the kept support.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ShrinkageRule {
    Hard {
        lambda: Lambda,
    },
    Soft {
        lambda: Lambda,
    },
    Scad {
        lambda: Lambda,
        alpha: f64,
    },
    /// Bridge rule with exponent 1/2. In adaptive mode the `extra` components
    /// ranked just after the kept ones are shrunk and everything smaller is zeroed.
    BridgeHalf {
        lambda: Lambda,
        extra: usize,
    },
}

impl ShrinkageRule {
    pub fn hard_adaptive() -> Self {
        ShrinkageRule::Hard {
            lambda: Lambda::Adaptive,
        }
    }

    pub fn scad_adaptive(alpha: f64) -> Self {
        ShrinkageRule::Scad {
            lambda: Lambda::Adaptive,
            alpha,
        }
    }

    pub fn bridge_adaptive(extra: usize) -> Self {
        ShrinkageRule::BridgeHalf {
            lambda: Lambda::Adaptive,
            extra,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ShrinkageRule::Hard { .. } => "hard",
            ShrinkageRule::Soft { .. } => "soft",
            ShrinkageRule::Scad { .. } => "scad",
            ShrinkageRule::BridgeHalf { .. } => "bridge",
        }
    }

    pub fn lambda(&self) -> Lambda {
        match *self {
            ShrinkageRule::Hard { lambda }
            | ShrinkageRule::Soft { lambda }
            | ShrinkageRule::Scad { lambda, .. }
            | ShrinkageRule::BridgeHalf { lambda, .. } => lambda,
        }
    }

    /// Upper bound on `‖T(x)‖₀` guaranteed by the rule, if any.
    pub fn sparsity_bound(&self, k: usize) -> Option<usize> {
        match *self {
            ShrinkageRule::Hard {
                lambda: Lambda::Adaptive,
            }
            | ShrinkageRule::Soft {
                lambda: Lambda::Adaptive,
            } => Some(k),
            ShrinkageRule::BridgeHalf {
                lambda: Lambda::Adaptive,
                extra,
            } => Some(k + extra),
            _ => None,
        }
    }

    pub fn validate(&self, dim: usize, k: usize) -> Result<()> {
        if let Lambda::Fixed(l) = self.lambda() {
            if !(l >= 0.0) || !l.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "lambda must be finite and >= 0, got {l}"
                )));
            }
        }
        match *self {
            ShrinkageRule::Scad { alpha, .. } if !(alpha > 2.0) => Err(Error::InvalidParameter(
                format!("SCAD alpha must exceed 2, got {alpha}"),
            )),
            ShrinkageRule::BridgeHalf { extra, .. } if extra < 1 || k + extra > dim => {
                Err(Error::InvalidParameter(format!(
                    "bridge P must lie in 1..={}, got {extra}",
                    dim.saturating_sub(k)
                )))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for ShrinkageRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())?;
        match self.lambda() {
            Lambda::Adaptive => write!(f, " adaptive=true")?,
            Lambda::Fixed(l) => write!(f, " lambda={l}")?,
        }
        match self {
            ShrinkageRule::Scad { alpha, .. } => write!(f, " alpha={alpha}"),
            ShrinkageRule::BridgeHalf { extra, .. } => write!(f, " p={extra}"),
            _ => Ok(()),
        }
    }
}

/// Parses `<name> [key=value]...`, keys separated by whitespace or commas.
///
/// Names: `hard`, `soft`, `scad`, `bridge`. Keys: `lambda`, `alpha`, `p`,
/// `adaptive`. Without `lambda=` the rule is adaptive.
impl FromStr for ShrinkageRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut tokens = s
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty());
        let name = tokens
            .next()
            .ok_or_else(|| Error::Config("empty shrinkage rule".into()))?
            .to_ascii_lowercase();

        let mut lambda = None;
        let mut adaptive = None;
        let mut alpha = None;
        let mut extra = None;
        for token in tokens {
            let (key, value) = token
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("expected key=value, got `{token}`")))?;
            let bad = || Error::Config(format!("invalid value for `{key}`: `{value}`"));
            match key {
                "lambda" => lambda = Some(value.parse::<f64>().map_err(|_| bad())?),
                "alpha" => alpha = Some(value.parse::<f64>().map_err(|_| bad())?),
                "p" => extra = Some(value.parse::<usize>().map_err(|_| bad())?),
                "adaptive" => adaptive = Some(value.parse::<bool>().map_err(|_| bad())?),
                _ => return Err(Error::Config(format!("unknown rule parameter `{key}`"))),
            }
        }

        let lambda = match (lambda, adaptive) {
            (Some(_), Some(true)) => {
                return Err(Error::Config(
                    "`lambda` conflicts with `adaptive=true`".into(),
                ))
            }
            (Some(l), _) => Lambda::Fixed(l),
            (None, Some(false)) => {
                return Err(Error::Config("`adaptive=false` requires `lambda`".into()))
            }
            (None, _) => Lambda::Adaptive,
        };
        let unused =
            |what: &str| Error::Config(format!("`{what}` does not apply to rule `{name}`"));
        let rule = match name.as_str() {
            "hard" | "soft" => {
                if alpha.is_some() {
                    return Err(unused("alpha"));
                }
                if extra.is_some() {
                    return Err(unused("p"));
                }
                if name == "hard" {
                    ShrinkageRule::Hard { lambda }
                } else {
                    ShrinkageRule::Soft { lambda }
                }
            }
            "scad" => {
                if extra.is_some() {
                    return Err(unused("p"));
                }
                ShrinkageRule::Scad {
                    lambda,
                    alpha: alpha.unwrap_or(DEFAULT_SCAD_ALPHA),
                }
            }
            "bridge" => {
                if alpha.is_some() {
                    return Err(unused("alpha"));
                }
                ShrinkageRule::BridgeHalf {
                    lambda,
                    extra: extra.unwrap_or(DEFAULT_BRIDGE_EXTRA),
                }
            }
            other => return Err(Error::Config(format!("unknown shrinkage rule `{other}`"))),
        };
        Ok(rule)
    }
}

/// Per-call quantities of one generalized-thresholding application.
#[derive(Debug, Clone, PartialEq)]
pub struct GtContext {
    /// `ξ^(K)`: smallest kept magnitude.
    pub xi_k: f64,
    /// `ξ^(K+P)`, only for the adaptive bridge rule.
    pub xi_kp: Option<f64>,
    /// Effective `λ` of this call.
    pub lambda: f64,
    /// The `K` kept indices `J_x^(K)`.
    pub support: SupportTuple,
}

fn lambda_from_xi(rule: &ShrinkageRule, xi_k: f64, xi_kp: Option<f64>) -> f64 {
    match *rule {
        ShrinkageRule::Hard { .. } | ShrinkageRule::Soft { .. } => xi_k,
        ShrinkageRule::Scad { alpha, .. } => xi_k / alpha,
        ShrinkageRule::BridgeHalf { .. } => {
            let xi = xi_kp.expect("bridge rule ranks K+P");
            4.0 * (xi / 3.0).powf(1.5)
        }
    }
}

fn extra_rank(rule: &ShrinkageRule) -> Option<usize> {
    match *rule {
        ShrinkageRule::BridgeHalf {
            lambda: Lambda::Adaptive,
            extra,
        } => Some(extra),
        _ => None,
    }
}

/// Time-adaptive `λ_n` for `rule`, computed from the magnitudes of `x`.
pub fn adaptive_lambda(x: &[f64], rule: &ShrinkageRule, k: usize) -> Result<f64> {
    if !rule.lambda().is_adaptive() {
        return Err(Error::InvalidParameter(format!(
            "rule `{rule}` does not use an adaptive lambda"
        )));
    }
    if k < 1 || k + 1 > x.len() {
        return Err(Error::SparsityOutOfRange {
            k,
            max: x.len().saturating_sub(1),
        });
    }
    let ranking = select::rank(x, k, extra_rank(rule))?;
    Ok(lambda_from_xi(rule, ranking.xi_k, ranking.xi_kp))
}

/// Applies `T_GT^(K)` to `x` in place and returns the context of the call.
pub fn apply_gt_in_place(x: &mut [f64], params: &AlgoParams) -> Result<GtContext> {
    let rule = &params.rule;
    let ranking = select::rank(x, params.sparsity, extra_rank(rule))?;
    let lambda = match rule.lambda() {
        Lambda::Adaptive => lambda_from_xi(rule, ranking.xi_k, ranking.xi_kp),
        Lambda::Fixed(l) => l,
    };
    let ctx = GtContext {
        xi_k: ranking.xi_k,
        xi_kp: ranking.xi_kp,
        lambda,
        support: ranking.support,
    };
    let delta = params.delta;
    let mut kept = ctx.support.indices().iter().peekable();
    for (l, value) in x.iter_mut().enumerate() {
        if kept.peek() == Some(&&l) {
            kept.next();
            continue;
        }
        let tau = *value;
        *value = match *rule {
            ShrinkageRule::Hard { .. } => shrink_hard(tau, &ctx, delta),
            ShrinkageRule::Soft { .. } => shrink_soft(tau, ctx.lambda, delta),
            ShrinkageRule::Scad { alpha, .. } => shrink_scad(tau, &ctx, alpha, delta)?,
            ShrinkageRule::BridgeHalf { .. } => shrink_bridge_half(tau, &ctx, delta)?,
        };
    }
    Ok(ctx)
}

/// Applies `T_GT^(K)`: the `K` largest-magnitude components are kept, the rest shrunk.
pub fn apply_gt(x: &[f64], params: &AlgoParams) -> Result<(Vec<f64>, GtContext)> {
    let mut z = x.to_vec();
    let ctx = apply_gt_in_place(&mut z, params)?;
    Ok((z, ctx))
}
