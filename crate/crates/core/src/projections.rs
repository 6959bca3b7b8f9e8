//! Metric projection onto hyperslabs.

use crate::error::Result;
use crate::model::{check_dim, Hyperslab};

/// Scalar `c` such that `P_S(a) = a + c·u`; zero when `a ∈ S`.
pub(crate) fn projection_coefficient(residual: f64, slab: &Hyperslab) -> f64 {
    let eps = slab.epsilon();
    if residual > eps {
        (eps - residual) / slab.u_norm_sq()
    } else if residual < -eps {
        (-eps - residual) / slab.u_norm_sq()
    } else {
        0.0
    }
}

/// `P_S(a)`: unchanged inside the slab, otherwise moved along `u` onto the violated face.
pub fn project_hyperslab(a: &[f64], slab: &Hyperslab) -> Result<Vec<f64>> {
    check_dim(slab.dim(), a.len())?;
    let c = projection_coefficient(slab.residual(a), slab);
    Ok(a.iter().zip(slab.u()).map(|(x, u)| x + c * u).collect())
}

/// `d(a, S) = max{0, |uᵀa − y| − ε} / ‖u‖`.
pub fn distance_hyperslab(a: &[f64], slab: &Hyperslab) -> Result<f64> {
    check_dim(slab.dim(), a.len())?;
    let excess = (slab.residual(a).abs() - slab.epsilon()).max(0.0);
    Ok(excess / slab.u_norm_sq().sqrt())
}

/// True iff `a` violates the slab strictly; boundary points are inactive.
pub fn is_active(a: &[f64], slab: &Hyperslab) -> Result<bool> {
    check_dim(slab.dim(), a.len())?;
    Ok(slab.residual(a).abs() > slab.epsilon())
}
