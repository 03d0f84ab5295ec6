//! Synthetic ground truth, index-set sampling, and the measurement oracle.
//!
//! Generators are deterministic in `(spec, seed)`: the same specification
//! reproduces the instance, its realised noise and therefore every oracle
//! answer bit for bit.

mod generate;
mod io;
mod oracle;
mod sampling;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

pub use generate::{gen_blockdiag, gen_matrix, gen_tensor};
pub use io::{read_instance, write_instance};
pub use oracle::{MeasurementOracle, SliceSelector};
pub use sampling::{sample_index_set, SamplingKind};

use crate::error::{Error, Result};
use crate::linalg::{coherence_subspace, orthonormalize, DenseTensor, OrthonormalBasis, DEFAULT_DROP_TOL};

/// Ground-truth family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    /// Orthonormalised i.i.d. Gaussian factors (CP factors for tensors).
    GaussianFactors,
    /// Block-diagonal adversarial family with constant block rows in
    /// `[1, √mu0]`.
    BlockDiagonal { mu0: f64 },
    /// Gaussian column space, row space swept from flat (`theta = 0`) to
    /// coordinate-aligned (`theta = 1`).
    CoherentRow { theta: f64 },
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::GaussianFactors => write!(f, "gaussian"),
            Family::BlockDiagonal { mu0 } => write!(f, "blockdiag:{mu0}"),
            Family::CoherentRow { theta } => write!(f, "coherent:{theta}"),
        }
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        let value = |what: &str| -> Result<f64> {
            arg.ok_or_else(|| Error::Parse(format!("family `{name}` needs a `:{what}` argument")))?
                .parse()
                .map_err(|_| Error::Parse(format!("bad {what} in family `{s}`")))
        };
        match name {
            "gaussian" => Ok(Family::GaussianFactors),
            "blockdiag" => Ok(Family::BlockDiagonal { mu0: value("mu0")? }),
            "coherent" => Ok(Family::CoherentRow { theta: value("theta")? }),
            _ => Err(Error::Parse(format!("unknown family `{s}`"))),
        }
    }
}

/// Parameters of a synthetic instance.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub dims: Vec<usize>,
    pub rank: usize,
    pub family: Family,
    /// Per-entry Gaussian noise standard deviation; `0` is noiseless.
    pub noise_sigma: f64,
    pub seed: u64,
    /// Rescale the low-rank part to unit Frobenius norm.
    pub unit_frobenius: bool,
}

impl SyntheticSpec {
    pub fn matrix(n1: usize, n2: usize, rank: usize, family: Family, seed: u64) -> Self {
        Self { dims: vec![n1, n2], rank, family, noise_sigma: 0.0, seed, unit_frobenius: false }
    }

    pub fn tensor(dims: &[usize], rank: usize, family: Family, seed: u64) -> Self {
        Self { dims: dims.to_vec(), rank, family, noise_sigma: 0.0, seed, unit_frobenius: false }
    }

    pub fn with_noise(mut self, sigma: f64) -> Self {
        self.noise_sigma = sigma;
        self
    }

    pub fn with_unit_frobenius(mut self) -> Self {
        self.unit_frobenius = true;
        self
    }

    pub fn order(&self) -> usize {
        self.dims.len()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSpec(msg));
        if self.dims.len() < 2 {
            return bad(format!("need at least 2 modes, got {}", self.dims.len()));
        }
        if self.dims.contains(&0) {
            return bad("dimensions must be positive".into());
        }
        let min_dim = *self.dims.iter().min().unwrap();
        if self.rank == 0 || self.rank > min_dim {
            return bad(format!("rank {} must lie in [1, {min_dim}]", self.rank));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return bad(format!("noise sigma {} must be finite and nonnegative", self.noise_sigma));
        }
        match self.family {
            Family::GaussianFactors => {}
            Family::CoherentRow { theta } => {
                if !(0.0..=1.0).contains(&theta) {
                    return bad(format!("theta {theta} outside [0, 1]"));
                }
            }
            Family::BlockDiagonal { mu0 } => {
                if !(mu0 >= 1.0 && mu0.is_finite()) {
                    return bad(format!("mu0 {mu0} must be at least 1"));
                }
                if self.dims[0] % self.rank != 0 {
                    return bad(format!("n_1 = {} is not divisible by r = {}", self.dims[0], self.rank));
                }
                for &n in &self.dims[1..] {
                    block_len(n, mu0, self.rank)?;
                }
            }
        }
        Ok(())
    }
}

/// `n / (mu0 · r)` when it is a positive integer.
pub(crate) fn block_len(n: usize, mu0: f64, rank: usize) -> Result<usize> {
    let l = n as f64 / (mu0 * rank as f64);
    let rounded = l.round();
    if rounded < 1.0 || (l - rounded).abs() > 1e-9 * l.max(1.0) {
        return Err(Error::InvalidSpec(format!("n = {n} is not divisible into blocks of n/(mu0 r) = {l}")));
    }
    Ok(rounded as usize)
}

/// A generated ground truth together with its factorisation.
///
/// `factors[t][k]` is the mode-`t` factor vector of component `k`, so the
/// truth is `Σ_k ⊗_t factors[t][k]`. For matrices the singular values are
/// folded into the mode-0 factors.
#[derive(Debug, Clone)]
pub struct Instance {
    spec: SyntheticSpec,
    ground_truth: Arc<DenseTensor>,
    factors: Vec<Vec<Vec<f64>>>,
    mode_spaces: Vec<OrthonormalBasis>,
    /// Coherence of the last mode's factor span (`μ(V)` for matrices).
    pub row_space_coherence: f64,
    /// Coherence of the mode-0 factor span, `μ(U)`.
    pub mu0_actual: f64,
    mode_coherence: Vec<f64>,
}

impl Instance {
    /// Assembles the truth from factor vectors and verifies that every mode
    /// span has dimension `spec.rank`.
    pub fn from_factors(spec: SyntheticSpec, factors: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        spec.validate()?;
        let t_order = spec.order();
        if factors.len() != t_order {
            return Err(Error::DimensionMismatch { expected: t_order, found: factors.len() });
        }
        for (t, mode) in factors.iter().enumerate() {
            if mode.len() != spec.rank {
                return Err(Error::DimensionMismatch { expected: spec.rank, found: mode.len() });
            }
            if let Some(v) = mode.iter().find(|v| v.len() != spec.dims[t]) {
                return Err(Error::DimensionMismatch { expected: spec.dims[t], found: v.len() });
            }
        }
        let mut data = vec![0.0; spec.dims.iter().product()];
        let mut component = Vec::with_capacity(data.len());
        for k in 0..spec.rank {
            component.clear();
            component.extend_from_slice(&factors[0][k]);
            for mode in &factors[1..] {
                let prev = std::mem::take(&mut component);
                component.reserve(prev.len() * mode[k].len());
                for &a in &mode[k] {
                    component.extend(prev.iter().map(|p| p * a));
                }
            }
            for (d, c) in data.iter_mut().zip(&component) {
                *d += c;
            }
        }
        let ground_truth = Arc::new(DenseTensor::from_vec(&spec.dims, data)?);
        let mut mode_spaces = Vec::with_capacity(t_order);
        for mode in &factors {
            let basis = orthonormalize(mode, DEFAULT_DROP_TOL)?;
            if basis.dim() != spec.rank {
                return Err(Error::InvalidSpec(format!(
                    "factor span has dimension {} instead of rank {}",
                    basis.dim(),
                    spec.rank
                )));
            }
            mode_spaces.push(basis);
        }
        let coh: Vec<f64> = mode_spaces.iter().map(coherence_subspace).collect::<Result<_>>()?;
        Ok(Self {
            spec,
            ground_truth,
            factors,
            mode_spaces,
            row_space_coherence: coh[t_order - 1],
            mu0_actual: coh[0],
            mode_coherence: coh,
        })
    }

    pub fn spec(&self) -> &SyntheticSpec {
        &self.spec
    }

    pub fn ground_truth(&self) -> &DenseTensor {
        &self.ground_truth
    }

    pub(crate) fn shared_truth(&self) -> Arc<DenseTensor> {
        Arc::clone(&self.ground_truth)
    }

    pub fn factors(&self) -> &[Vec<Vec<f64>>] {
        &self.factors
    }

    /// Orthonormal basis of the mode-0 factor span (the column space `U`).
    pub fn column_space(&self) -> &OrthonormalBasis {
        &self.mode_spaces[0]
    }

    pub fn mode_space(&self, t: usize) -> &OrthonormalBasis {
        &self.mode_spaces[t]
    }

    /// Coherence of every mode's factor span.
    pub fn mode_coherence(&self) -> &[f64] {
        &self.mode_coherence
    }

    /// Largest coherence over modes `0…T−2`, the parameter that enters the
    /// tensor budget schedule.
    pub fn mu0_leading_modes(&self) -> f64 {
        let t = self.mode_coherence.len();
        self.mode_coherence[..t - 1].iter().copied().fold(1.0, f64::max)
    }

    /// A fresh oracle over this instance with a zeroed counter.
    pub fn oracle(&self) -> MeasurementOracle {
        MeasurementOracle::new(self.shared_truth(), self.spec.noise_sigma, noise_seed(self.spec.seed))
            .expect("spec was validated")
    }
}

pub(crate) fn noise_seed(seed: u64) -> u64 {
    crate::seed::derive(seed, &[0x6e6f_6973_65])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_tokens_round_trip() {
        for f in [Family::GaussianFactors, Family::BlockDiagonal { mu0: 2.5 }, Family::CoherentRow { theta: 0.25 }] {
            assert_eq!(f.to_string().parse::<Family>().unwrap(), f);
        }
        assert!("blockdiag".parse::<Family>().is_err());
        assert!("spiky:1".parse::<Family>().is_err());
    }

    #[test]
    fn spec_validation() {
        assert!(SyntheticSpec::matrix(10, 10, 11, Family::GaussianFactors, 0).validate().is_err());
        assert!(SyntheticSpec::matrix(10, 10, 2, Family::CoherentRow { theta: 1.5 }, 0).validate().is_err());
        assert!(SyntheticSpec::matrix(10, 10, 3, Family::BlockDiagonal { mu0: 1.0 }, 0).validate().is_err());
        assert!(SyntheticSpec::matrix(12, 12, 3, Family::BlockDiagonal { mu0: 2.0 }, 0).validate().is_ok());
        assert!(SyntheticSpec::matrix(12, 12, 3, Family::BlockDiagonal { mu0: 3.0 }, 0).validate().is_err());
        assert!(SyntheticSpec::tensor(&[5], 1, Family::GaussianFactors, 0).validate().is_err());
        assert!(SyntheticSpec::matrix(5, 5, 1, Family::GaussianFactors, 0).with_noise(-1.0).validate().is_err());
    }
}
