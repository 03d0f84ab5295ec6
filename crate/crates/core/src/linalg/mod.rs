//! Dense numerical kernels: containers, orthonormal bases, projections,
//! least-squares reconstruction from row subsamples, and coherence.
//!
//! All routines are pure functions over immutable inputs and run in double
//! precision.

mod basis;
mod coherence;
mod dense;
mod index_set;
mod qr;
pub(crate) mod spectral;
mod subsample;

pub use basis::{orthonormalize, project, OrthonormalBasis, DEFAULT_DROP_TOL};
pub use coherence::{coherence_subspace, coherence_vector};
pub use dense::{DenseMatrix, DenseTensor};
pub use index_set::{IndexSet, SamplingMode};
pub use subsample::{
    reconstruct_from_subsample, subsampled_residual_energy, SubsampledProjector,
    RANK_DEFICIENCY_TOL,
};

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm_sq(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum()
}

/// `y += alpha * x`
pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}
