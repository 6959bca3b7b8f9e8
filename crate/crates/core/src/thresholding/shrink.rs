//! Scalar shrinkage rules applied to the components outside the kept support.
//!
//! Every rule is odd-symmetric and, for `δ > 0`, satisfies `τ·shr(τ) ≥ 0` and
//! `|shr(τ)| ≤ max(|τ| − δ, 0)` on its domain `|τ| ≤ ξ^(K)`.

use super::GtContext;
use crate::error::{Error, Result};

/// Bridge exponent; the only value with a closed-form root.
const GAMMA: f64 = 0.5;

fn signed(tau: f64, magnitude: f64) -> f64 {
    if magnitude <= 0.0 {
        0.0
    } else {
        magnitude.copysign(tau)
    }
}

/// Discontinuity boundary `c_BT(λ, 1/2)` of the bridge rule.
pub fn c_bt(lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "c_bt requires a positive lambda, got {lambda}"
        )));
    }
    let base = -1.0 / (lambda * GAMMA * (GAMMA - 1.0));
    Ok(base.powf(1.0 / (GAMMA - 2.0)) + lambda * GAMMA * base.powf((GAMMA - 1.0) / (GAMMA - 2.0)))
}

/// Modified hard thresholding.
pub fn shrink_hard(tau: f64, ctx: &GtContext, delta: f64) -> f64 {
    let t = tau.abs();
    if t <= ctx.lambda.min(ctx.xi_k) {
        0.0
    } else {
        signed(tau, t - delta)
    }
}

/// Soft thresholding with the extra strict-shrinkage margin.
pub fn shrink_soft(tau: f64, lambda: f64, delta: f64) -> f64 {
    signed(tau, tau.abs() - lambda - delta)
}

/// Modified SCAD rule. Beyond `αλ` (only reachable with a fixed `λ`) the
/// component is kept minus the margin `δ`.
pub fn shrink_scad(tau: f64, ctx: &GtContext, alpha: f64, delta: f64) -> Result<f64> {
    if !(alpha > 2.0) {
        return Err(Error::InvalidParameter(format!(
            "SCAD alpha must exceed 2, got {alpha}"
        )));
    }
    let t = tau.abs();
    let lambda = ctx.lambda;
    let magnitude = if t <= lambda {
        0.0
    } else if t <= 2.0 * lambda {
        t - lambda - delta
    } else if t <= alpha * lambda {
        ((alpha - 1.0) * t - alpha * lambda) / (alpha - 2.0) - delta
    } else {
        t - delta
    };
    Ok(signed(tau, magnitude))
}

/// Solves `z + (λ/2)·z^{-1/2} = t` for the root continuous in `t` (the largest one).
///
/// With `s = √z` this is the cubic `s³ − t·s + λ/2 = 0`; its largest real root is
/// taken from the trigonometric form and polished by a Newton step.
pub fn bridge_root(t: f64, lambda: f64) -> Result<f64> {
    if !(t >= 0.0) || !(lambda >= 0.0) || !t.is_finite() || !lambda.is_finite() {
        return Err(Error::BridgeNoRoot { tau: t, lambda });
    }
    if lambda == 0.0 {
        return Ok(t);
    }
    if t == 0.0 {
        return Err(Error::BridgeNoRoot { tau: t, lambda });
    }
    let q = 0.5 * lambda;
    let arg = -(3.0 * q / (2.0 * t)) * (3.0 / t).sqrt();
    // Slightly below −1 happens when t sits on c_bt up to rounding; the roots merge there.
    if arg < -1.0 - 1e-9 {
        return Err(Error::BridgeNoRoot { tau: t, lambda });
    }
    let theta = arg.clamp(-1.0, 1.0).acos() / 3.0;
    let mut s = 2.0 * (t / 3.0).sqrt() * theta.cos();

    let cubic = |s: f64| s * (s * s - t) + q;
    let slope = 3.0 * s * s - t;
    if slope.abs() > 1e-8 * t {
        let refined = s - cubic(s) / slope;
        if refined > 0.0 && cubic(refined).abs() <= cubic(s).abs() {
            s = refined;
        }
    }
    let z = s * s;
    let residual = z + q / s - t;
    if !(z > 0.0) || z > t * (1.0 + 1e-12) || residual.abs() > 1e-10 * t.max(1.0) {
        return Err(Error::BridgeNoRoot { tau: t, lambda });
    }
    Ok(z.min(t))
}

/// Modified bridge-ℓ0.5 rule.
///
/// With `ctx.xi_kp` present (adaptive `λ_n`), components with `|τ| ≤ ξ^(K+P)` are
/// zeroed. Otherwise the kill threshold is `min{c_BT(λ), ξ^(K)}`; magnitudes below
/// `c_BT(λ)` admit no root and are zeroed as well.
pub fn shrink_bridge_half(tau: f64, ctx: &GtContext, delta: f64) -> Result<f64> {
    let t = tau.abs();
    if t == 0.0 {
        return Ok(0.0);
    }
    let lambda = ctx.lambda;
    if let Some(xi_kp) = ctx.xi_kp {
        if t <= xi_kp {
            return Ok(0.0);
        }
    } else if lambda > 0.0 && t < c_bt(lambda)? {
        return Ok(0.0);
    }
    let z = bridge_root(t, lambda)?;
    Ok(signed(tau, z - delta))
}
