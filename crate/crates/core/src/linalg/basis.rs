use super::{axpy, dot, norm_sq, DenseMatrix};
use crate::error::{Error, Result};

/// Relative residual below which a vector is treated as already in span.
pub const DEFAULT_DROP_TOL: f64 = 1e-10;

/// An ordered set of `d` orthonormal vectors in `ℝⁿ` (`d` may be zero).
///
/// Vectors are only ever added through Gram-Schmidt with a full
/// reorthogonalisation pass, so `‖UᵀU − I‖_max` stays at rounding level.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthonormalBasis {
    ambient_dim: usize,
    vectors: Vec<Vec<f64>>,
}

impl OrthonormalBasis {
    pub fn empty(ambient_dim: usize) -> Self {
        Self { ambient_dim, vectors: Vec::new() }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    fn check_len(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.ambient_dim {
            return Err(Error::DimensionMismatch { expected: self.ambient_dim, found: v.len() });
        }
        Ok(())
    }

    /// Coordinates `Uᵀv`.
    pub fn coordinates(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.check_len(v)?;
        Ok(self.vectors.iter().map(|u| dot(u, v)).collect())
    }

    /// `Σ_k coef_k u_k`
    pub fn combine(&self, coef: &[f64]) -> Result<Vec<f64>> {
        if coef.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: coef.len() });
        }
        let mut out = vec![0.0; self.ambient_dim];
        for (u, &c) in self.vectors.iter().zip(coef) {
            axpy(c, u, &mut out);
        }
        Ok(out)
    }

    /// Orthogonal projection `U(Uᵀv)`.
    pub fn project(&self, v: &[f64]) -> Result<Vec<f64>> {
        let c = self.coordinates(v)?;
        self.combine(&c)
    }

    /// `v − 𝒫_U v`, computed with two Gram-Schmidt passes.
    pub fn residual(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.check_len(v)?;
        let mut r = v.to_vec();
        for _ in 0..2 {
            for u in &self.vectors {
                let c = dot(u, &r);
                axpy(-c, u, &mut r);
            }
        }
        Ok(r)
    }

    /// Appends the normalised component of `v` orthogonal to the current
    /// span. Returns `false` (leaving the basis unchanged) when that
    /// component is smaller than `drop_tol · ‖v‖`.
    pub fn extend(&mut self, v: &[f64], drop_tol: f64) -> Result<bool> {
        if !(drop_tol > 0.0) {
            return Err(Error::InvalidArgument(format!("drop_tol must be positive, got {drop_tol}")));
        }
        let original = norm_sq(v).sqrt();
        let mut r = self.residual(v)?;
        let rn = norm_sq(&r).sqrt();
        if original == 0.0 || rn < drop_tol * original || self.dim() == self.ambient_dim {
            return Ok(false);
        }
        r.iter_mut().for_each(|x| *x /= rn);
        self.vectors.push(r);
        Ok(true)
    }

    /// `n × d` matrix with the basis vectors as columns.
    pub fn to_matrix(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.ambient_dim, self.dim(), |i, k| self.vectors[k][i])
    }

    /// `‖UᵀU − I‖_max`
    pub fn orthonormality_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (a, u) in self.vectors.iter().enumerate() {
            for (b, w) in self.vectors.iter().enumerate().skip(a) {
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((dot(u, w) - target).abs());
            }
        }
        worst
    }

    /// Squared norm of row `j` of the basis matrix, i.e. `‖𝒫_U e_j‖²`.
    pub fn row_norm_sq(&self, j: usize) -> f64 {
        self.vectors.iter().map(|u| u[j] * u[j]).sum()
    }
}

/// Gram-Schmidt with one reorthogonalisation pass. Vectors whose residual
/// after projection falls below `drop_tol` times their own norm are
/// discarded, so the result spans the input up to `drop_tol`.
pub fn orthonormalize(vectors: &[Vec<f64>], drop_tol: f64) -> Result<OrthonormalBasis> {
    let n = vectors
        .first()
        .map(Vec::len)
        .ok_or_else(|| Error::InvalidArgument("orthonormalize needs at least one vector".into()))?;
    let mut basis = OrthonormalBasis::empty(n);
    for v in vectors {
        basis.extend(v, drop_tol)?;
    }
    Ok(basis)
}

/// `𝒫_U v` for an orthonormal `U`.
pub fn project(basis: &OrthonormalBasis, v: &[f64]) -> Result<Vec<f64>> {
    basis.project(v)
}
