use super::{norm_sq, OrthonormalBasis};
use crate::error::{Error, Result};

/// `μ(U) = (n/d) max_j ‖𝒫_U e_j‖²`, which lies in `[1, n/d]`.
pub fn coherence_subspace(basis: &OrthonormalBasis) -> Result<f64> {
    let d = basis.dim();
    if d == 0 {
        return Err(Error::EmptyBasis);
    }
    let n = basis.ambient_dim();
    let max = (0..n).map(|j| basis.row_norm_sq(j)).fold(0.0, f64::max);
    Ok(n as f64 / d as f64 * max)
}

/// `μ(v) = n ‖v‖_∞² / ‖v‖₂²`, which lies in `[1, n]`.
pub fn coherence_vector(v: &[f64]) -> Result<f64> {
    let energy = norm_sq(v);
    if energy == 0.0 {
        return Err(Error::ZeroVector);
    }
    let inf = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    Ok(v.len() as f64 * inf * inf / energy)
}
