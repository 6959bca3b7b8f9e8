//! Top-K support selection and ordered magnitudes.

use crate::error::{Error, Result};
use crate::model::SupportTuple;

fn check_k(k: usize, dim: usize) -> Result<()> {
    if k == 0 || k > dim {
        Err(Error::SparsityOutOfRange { k, max: dim })
    } else {
        Ok(())
    }
}

/// Orders indices by decreasing magnitude, ties broken by the smaller index.
fn by_magnitude(x: &[f64]) -> impl Fn(&usize, &usize) -> std::cmp::Ordering + '_ {
    move |&a, &b| x[b].abs().total_cmp(&x[a].abs()).then(a.cmp(&b))
}

/// Result of ranking a vector by magnitude.
pub(crate) struct Ranking {
    /// The `K` selected indices, ascending.
    pub support: SupportTuple,
    /// Smallest kept magnitude, `ξ^(K)`.
    pub xi_k: f64,
    /// `ξ^(K+P)` when a second rank was requested.
    pub xi_kp: Option<f64>,
}

/// Selects the top `k` indices in O(L), and optionally the magnitude of rank `k + extra`.
pub(crate) fn rank(x: &[f64], k: usize, extra: Option<usize>) -> Result<Ranking> {
    check_k(k, x.len())?;
    if let Some(p) = extra {
        if p == 0 {
            return Err(Error::InvalidParameter("P must be >= 1".into()));
        }
        check_k(k + p, x.len())?;
    }
    let cmp = by_magnitude(x);
    let mut idx: Vec<usize> = (0..x.len()).collect();
    let xi_k = {
        let (_, kth, _) = idx.select_nth_unstable_by(k - 1, &cmp);
        x[*kth].abs()
    };
    let xi_kp = match extra {
        Some(p) => {
            let (_, pth, _) = idx[k..].select_nth_unstable_by(p - 1, &cmp);
            Some(x[*pth].abs())
        }
        None => None,
    };
    idx.truncate(k);
    idx.sort_unstable();
    Ok(Ranking {
        support: SupportTuple::from_sorted_unchecked(idx),
        xi_k,
        xi_kp,
    })
}

/// Indices of the `k` largest-magnitude components, ties to the smallest index, ascending.
pub fn top_k_support(x: &[f64], k: usize) -> Result<SupportTuple> {
    Ok(rank(x, k, None)?.support)
}

/// Smallest magnitude among the `k` largest, `ξ_x^(K)`.
pub fn xi_value(x: &[f64], k: usize) -> Result<f64> {
    Ok(rank(x, k, None)?.xi_k)
}
