//! Independent reference computations used by probes and tests.
//!
//! Nothing here shares code with the fast path in the parent module beyond the
//! public projection and thresholding operators.

use nalgebra::{DMatrix, DVector};

use super::{ApgtState, OMEGA_PROBE_MAX_DIM, OMEGA_PROBE_MAX_WINDOW};
use crate::error::{Error, Result};
use crate::model::{check_dim, Hyperslab, SupportTuple};
use crate::projections::{distance_hyperslab, is_active, project_hyperslab};
use crate::thresholding::{apply_gt, top_k_support};

/// Next estimate through the subgradient-projection form of the recursion:
/// `T(a − λ_n Θ(a)/‖Θ′(a)‖² Θ′(a))` with `λ_n = μ_n/ℳ_n = mu_scale`, where
/// `Θ` is the distance-weighted average of the distances to the active slabs.
pub fn step_theta_form(state: &ApgtState) -> Result<Vec<f64>> {
    let a = state.estimate();
    let params = state.params();
    let mut active = Vec::new();
    for (_, slab) in state.window() {
        if is_active(a, slab)? {
            active.push((distance_hyperslab(a, slab)?, project_hyperslab(a, slab)?));
        }
    }
    if active.is_empty() {
        return Ok(apply_gt(a, params)?.0);
    }
    let weight = 1.0 / active.len() as f64;
    let normalizer: f64 = active.iter().map(|(d, _)| weight * d).sum();
    let theta: f64 = active.iter().map(|(d, _)| weight * d * d).sum::<f64>() / normalizer;
    let mut gradient = vec![0.0; a.len()];
    for (_, p) in &active {
        for ((g, &x), &pl) in gradient.iter_mut().zip(a).zip(p) {
            *g += weight * (x - pl) / normalizer;
        }
    }
    let grad_sq: f64 = gradient.iter().map(|g| g * g).sum();
    if grad_sq.sqrt() * normalizer <= super::DEGENERATE_AGGREGATE_NORM {
        return Ok(apply_gt(a, params)?.0);
    }
    let scale = params.mu_scale * theta / grad_sq;
    let x: Vec<f64> = a
        .iter()
        .zip(&gradient)
        .map(|(x, g)| x - scale * g)
        .collect();
    Ok(apply_gt(&x, params)?.0)
}

/// The set `M_J ∩ ⋂ S_i`, restricted to a coordinate subspace.
#[derive(Debug, Clone)]
pub struct OmegaSet {
    pub support: SupportTuple,
    pub slabs: Vec<Hyperslab>,
}

impl OmegaSet {
    /// `Ω_n = M_{J_{a_n}^(K)} ∩ ⋂_{i ∈ ℐ_n} S_i` for an observed state.
    pub fn from_state(state: &ApgtState) -> Result<Self> {
        let a = state.estimate();
        let support = top_k_support(a, state.params().sparsity)?;
        let mut slabs = Vec::new();
        for (_, slab) in state.window() {
            if is_active(a, slab)? {
                slabs.push(slab.clone());
            }
        }
        Ok(OmegaSet { support, slabs })
    }

    pub fn intersect(&self, other: &OmegaSet) -> OmegaSet {
        let mut slabs = self.slabs.clone();
        for slab in &other.slabs {
            if !slabs.contains(slab) {
                slabs.push(slab.clone());
            }
        }
        OmegaSet {
            support: self.support.intersection(&other.support),
            slabs,
        }
    }

    /// Distance from `point`, `f64::INFINITY` if the set is empty.
    pub fn distance(&self, point: &[f64]) -> Result<f64> {
        let slabs: Vec<&Hyperslab> = self.slabs.iter().collect();
        least_distance(point, &self.support, &slabs)
    }
}

/// `d(a_n, Ω_n)` for an observed desk-scale state; `f64::INFINITY` if `Ω_n = ∅`.
pub fn probe_omega_distance(state: &ApgtState) -> Result<f64> {
    if state.dim() > OMEGA_PROBE_MAX_DIM || state.params().window > OMEGA_PROBE_MAX_WINDOW {
        return Err(Error::InvalidParameter(format!(
            "omega-distance probe requires L <= {OMEGA_PROBE_MAX_DIM} and q <= {OMEGA_PROBE_MAX_WINDOW}"
        )));
    }
    OmegaSet::from_state(state)?.distance(state.estimate())
}

/// Outer iterations allowed per NNLS variable.
const NNLS_ITERATIONS_PER_VAR: usize = 3;
/// `‖r‖²` below this means the least-distance problem is infeasible (distances beyond ~1e6).
const INFEASIBLE_RESIDUAL_SQ: f64 = 1e-12;

/// Distance from `a` to `{x : x_l = 0 for l ∉ support, |u_iᵀx − y_i| ≤ ε_i for all i}`.
///
/// The least-distance problem in the free coordinates is reduced to a
/// nonnegative least-squares problem and solved with the Lawson–Hanson
/// active-set method.
/// A zero NNLS residual is a Farkas certificate of infeasibility and yields
/// `f64::INFINITY`.
pub fn least_distance(a: &[f64], support: &SupportTuple, slabs: &[&Hyperslab]) -> Result<f64> {
    let dim = a.len();
    for slab in slabs {
        check_dim(dim, slab.dim())?;
    }
    let free = support.indices();
    let outside_sq: f64 = (0..dim)
        .filter(|l| !support.contains(*l))
        .map(|l| a[l] * a[l])
        .sum();
    let k = free.len();

    // Rows g with g·z ≥ h, for z = x − a restricted to the free coordinates.
    let mut rows: Vec<(Vec<f64>, f64)> = Vec::with_capacity(2 * slabs.len());
    for slab in slabs {
        let g: Vec<f64> = free.iter().map(|&l| slab.u()[l]).collect();
        let centre: f64 = free.iter().map(|&l| slab.u()[l] * a[l]).sum();
        let lower = slab.y() - slab.epsilon() - centre;
        let upper = -(slab.y() + slab.epsilon() - centre);
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        for (sign, h) in [(1.0, lower), (-1.0, upper)] {
            if norm == 0.0 {
                if h > 0.0 {
                    return Ok(f64::INFINITY);
                }
                continue;
            }
            rows.push((g.iter().map(|v| sign * v / norm).collect(), h / norm));
        }
    }
    if rows.is_empty() || rows.iter().all(|(_, h)| *h <= 0.0) {
        return Ok(outside_sq.sqrt());
    }

    let m = rows.len();
    // E = [Gᵀ; hᵀ] is (k+1) × m, f = e_{k+1}.
    let e = DMatrix::from_fn(
        k + 1,
        m,
        |r, c| if r < k { rows[c].0[r] } else { rows[c].1 },
    );
    let mut f = DVector::zeros(k + 1);
    f[k] = 1.0;

    let w = nnls(&e, &f)?;
    let r = &e * &w - &f;
    if r.norm_squared() <= INFEASIBLE_RESIDUAL_SQ {
        return Ok(f64::INFINITY);
    }
    let ldp: Vec<f64> = (0..k).map(|j| -r[j] / r[k]).collect();
    let violation = |z: &[f64]| {
        let scale = 1.0 + z.iter().map(|v| v.abs()).sum::<f64>();
        rows.iter().any(|(g, h)| {
            let gz: f64 = g.iter().zip(z).map(|(x, y)| x * y).sum();
            gz < h - 1e-9 * (scale + h.abs())
        })
    };
    // minimum-norm point of the constraints the multipliers mark as binding
    let binding: Vec<usize> = (0..m).filter(|&j| w[j] > 0.0).collect();
    let z = match binding_point(&rows, &binding, k) {
        Some(z) if !violation(&z) => z,
        _ if !violation(&ldp) => ldp,
        _ => {
            return Err(Error::OracleNonConvergence {
                iterations: NNLS_ITERATIONS_PER_VAR * m,
            })
        }
    };
    let z_sq: f64 = z.iter().map(|v| v * v).sum();
    Ok((z_sq + outside_sq).sqrt())
}

/// `Gᵀλ` with `GGᵀλ = h` over the rows in `binding`.
fn binding_point(rows: &[(Vec<f64>, f64)], binding: &[usize], k: usize) -> Option<Vec<f64>> {
    if binding.is_empty() {
        return Some(vec![0.0; k]);
    }
    let g = DMatrix::from_fn(binding.len(), k, |r, c| rows[binding[r]].0[c]);
    let h = DVector::from_fn(binding.len(), |r, _| rows[binding[r]].1);
    let lambda = (&g * g.transpose()).svd(true, true).solve(&h, 1e-15).ok()?;
    Some((g.transpose() * lambda).iter().copied().collect())
}

/// `argmin_{w ≥ 0} ‖Ew − f‖` by the Lawson–Hanson active-set method.
fn nnls(e: &DMatrix<f64>, f: &DVector<f64>) -> Result<DVector<f64>> {
    let m = e.ncols();
    let tol = 10.0 * f64::EPSILON * e.nrows().max(m) as f64 * e.abs().column_sum().max().max(1.0);
    let max_iterations = NNLS_ITERATIONS_PER_VAR * m.max(1);
    let mut x = DVector::<f64>::zeros(m);
    let mut passive = vec![false; m];
    // columns whose entry would immediately turn nonpositive; cleared when x moves
    let mut rejected = vec![false; m];
    let mut iterations = 0;
    loop {
        let w = e.transpose() * (f - e * &x);
        let candidate = (0..m)
            .filter(|&j| !passive[j] && !rejected[j] && w[j] > tol)
            .max_by(|&a, &b| w[a].total_cmp(&w[b]));
        let Some(t) = candidate else {
            return Ok(x);
        };
        passive[t] = true;
        let mut entering = true;
        loop {
            iterations += 1;
            if iterations > max_iterations {
                return Err(Error::OracleNonConvergence { iterations });
            }
            let cols: Vec<usize> = (0..m).filter(|&j| passive[j]).collect();
            let s = passive_solution(e, f, &cols)?;
            if entering && s[t] <= tol {
                passive[t] = false;
                rejected[t] = true;
                break;
            }
            entering = false;
            rejected.iter_mut().for_each(|r| *r = false);
            if cols.iter().all(|&j| s[j] > tol) {
                x = s;
                break;
            }
            let alpha = cols
                .iter()
                .filter(|&&j| s[j] <= tol)
                .map(|&j| x[j] / (x[j] - s[j]))
                .fold(f64::INFINITY, f64::min);
            x += alpha * (&s - &x);
            for &j in &cols {
                if x[j] <= tol {
                    x[j] = 0.0;
                    passive[j] = false;
                }
            }
            if passive.iter().all(|p| !p) {
                break;
            }
        }
    }
}

/// Unconstrained least squares on the columns `cols`, zero elsewhere.
fn passive_solution(e: &DMatrix<f64>, f: &DVector<f64>, cols: &[usize]) -> Result<DVector<f64>> {
    let sub = e.select_columns(cols);
    let failed = |_| Error::OracleNonConvergence {
        iterations: NNLS_ITERATIONS_PER_VAR * e.ncols(),
    };
    let solution = if cols.len() <= e.nrows() {
        sub.svd(true, true).solve(f, 1e-14).map_err(failed)?
    } else {
        let normal = sub.transpose() * &sub;
        normal
            .svd(true, true)
            .solve(&(sub.transpose() * f), 1e-14)
            .map_err(failed)?
    };
    let mut full = DVector::zeros(e.ncols());
    for (&j, &v) in cols.iter().zip(solution.iter()) {
        full[j] = v;
    }
    Ok(full)
}
