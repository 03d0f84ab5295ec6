use std::collections::BTreeSet;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{DenseTensor, IndexSet};

/// Selects the contiguous sub-block of a tensor obtained by fixing the
/// indices of its trailing modes.
///
/// With dims `(n_1, …, n_T)` and `k` fixed trailing indices the view is the
/// order-`(T−k)` block over modes `1…T−k`, flattened first-index-fastest.
/// For a matrix, fixing one index selects a column.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SliceSelector {
    trailing: Vec<usize>,
}

impl SliceSelector {
    /// The whole tensor.
    pub fn whole() -> Self {
        Self::default()
    }

    /// Fixes the last `trailing.len()` modes to the given indices (listed in
    /// mode order).
    pub fn fixing(trailing: Vec<usize>) -> Self {
        Self { trailing }
    }

    pub fn column(j: usize) -> Self {
        Self { trailing: vec![j] }
    }

    /// Fixes one more mode, the last free one, to `i`.
    pub fn child(&self, i: usize) -> Self {
        let mut trailing = Vec::with_capacity(self.trailing.len() + 1);
        trailing.push(i);
        trailing.extend_from_slice(&self.trailing);
        Self { trailing }
    }

    pub fn trailing(&self) -> &[usize] {
        &self.trailing
    }

    /// `(offset, len)` of the view inside the flat storage of a tensor with
    /// the given dims.
    pub fn resolve(&self, dims: &[usize]) -> Result<(usize, usize)> {
        let k = self.trailing.len();
        if k > dims.len() {
            return Err(Error::DimensionMismatch { expected: dims.len(), found: k });
        }
        let free = dims.len() - k;
        let len: usize = dims[..free].iter().product();
        let mut offset = 0;
        let mut stride = len;
        for (&i, &n) in self.trailing.iter().zip(&dims[free..]) {
            if i >= n {
                return Err(Error::OutOfRange { index: i, bound: n });
            }
            offset += i * stride;
            stride *= n;
        }
        Ok((offset, len))
    }
}

/// Gatekeeper over a hidden instance.
///
/// Every revealed scalar is counted. A with-replacement draw counts once
/// per draw even when an index repeats. Noise is a deterministic function
/// of `(noise seed, position)`, so re-querying an entry returns the same
/// value bit for bit.
#[derive(Debug, Clone)]
pub struct MeasurementOracle {
    truth: Arc<DenseTensor>,
    sigma: f64,
    noise_rng: ChaCha8Rng,
    observed: usize,
    log: Option<BTreeSet<usize>>,
}

impl MeasurementOracle {
    pub fn new(truth: Arc<DenseTensor>, sigma: f64, noise_seed: u64) -> Result<Self> {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidArgument(format!("noise sigma {sigma} must be finite and nonnegative")));
        }
        Ok(Self { truth, sigma, noise_rng: ChaCha8Rng::seed_from_u64(noise_seed), observed: 0, log: None })
    }

    /// Starts recording the set of revealed positions.
    pub fn with_log(mut self) -> Self {
        self.log.get_or_insert_with(BTreeSet::new);
        self
    }

    pub fn dims(&self) -> &[usize] {
        self.truth.dims()
    }

    pub fn noise_sigma(&self) -> f64 {
        self.sigma
    }

    /// Scalars revealed so far.
    pub fn observed_count(&self) -> usize {
        self.observed
    }

    /// Distinct linear positions revealed so far, if logging is on.
    pub fn observed_positions(&self) -> Option<&BTreeSet<usize>> {
        self.log.as_ref()
    }

    /// `‖R_Ω‖_F²` over the distinct revealed positions, if logging is on.
    pub fn observed_noise_energy(&self) -> Option<f64> {
        self.log.as_ref().map(|log| log.iter().map(|&p| self.realized_noise(p).powi(2)).sum())
    }

    /// The noise at a linear position. Evaluation only; not counted.
    pub fn realized_noise(&self, linear: usize) -> f64 {
        if self.sigma == 0.0 {
            return 0.0;
        }
        let mut rng = self.noise_rng.clone();
        rng.set_stream(linear as u64);
        self.sigma * rng.sample::<f64, _>(StandardNormal)
    }

    fn reveal(&mut self, linear: usize) -> f64 {
        if let Some(log) = &mut self.log {
            log.insert(linear);
        }
        self.truth.as_slice()[linear] + self.realized_noise(linear)
    }

    pub fn observe_linear(&mut self, linear: usize) -> Result<f64> {
        if linear >= self.truth.len() {
            return Err(Error::OutOfRange { index: linear, bound: self.truth.len() });
        }
        self.observed += 1;
        Ok(self.reveal(linear))
    }

    pub fn observe_entry(&mut self, pos: &[usize]) -> Result<f64> {
        let linear = self.truth.linear_index(pos)?;
        self.observe_linear(linear)
    }

    /// Full column `j` of a matrix instance.
    pub fn observe_column(&mut self, j: usize) -> Result<Vec<f64>> {
        if self.truth.order() != 2 {
            return Err(Error::InvalidArgument("column queries need a matrix instance".into()));
        }
        self.observe_view(&SliceSelector::column(j))
    }

    /// Mode-`t` subtensor with index `i` fixed (zero-based `t`).
    pub fn observe_subtensor(&mut self, t: usize, i: usize) -> Result<DenseTensor> {
        let dims = self.truth.dims().to_vec();
        if t >= dims.len() {
            return Err(Error::OutOfRange { index: t, bound: dims.len() });
        }
        if i >= dims[t] {
            return Err(Error::OutOfRange { index: i, bound: dims[t] });
        }
        let inner: usize = dims[..t].iter().product();
        let outer = self.truth.len() / (inner * dims[t]);
        let mut data = Vec::with_capacity(inner * outer);
        for o in 0..outer {
            let base = o * inner * dims[t] + i * inner;
            for lin in base..base + inner {
                data.push(self.reveal(lin));
            }
        }
        self.observed += data.len();
        let mut sub_dims: Vec<usize> = dims;
        sub_dims.remove(t);
        if sub_dims.is_empty() {
            sub_dims.push(1);
        }
        DenseTensor::from_vec(&sub_dims, data)
    }

    /// Every entry of a view.
    pub fn observe_view(&mut self, selector: &SliceSelector) -> Result<Vec<f64>> {
        let (offset, len) = selector.resolve(self.truth.dims())?;
        self.observed += len;
        Ok((offset..offset + len).map(|lin| self.reveal(lin)).collect())
    }

    /// Entries `Ω` of a view; counts `|Ω|`, one per draw.
    pub fn observe_at(&mut self, omega: &IndexSet, selector: &SliceSelector) -> Result<Vec<f64>> {
        let (offset, len) = selector.resolve(self.truth.dims())?;
        if omega.ambient_dim() != len {
            return Err(Error::DimensionMismatch { expected: len, found: omega.ambient_dim() });
        }
        self.observed += omega.len();
        Ok(omega.indices().iter().map(|&i| self.reveal(offset + i)).collect())
    }

    /// Arbitrary positions of a view, counted one per position.
    pub fn observe_positions(&mut self, positions: &[usize], selector: &SliceSelector) -> Result<Vec<f64>> {
        let (offset, len) = selector.resolve(self.truth.dims())?;
        if let Some(&bad) = positions.iter().find(|&&p| p >= len) {
            return Err(Error::OutOfRange { index: bad, bound: len });
        }
        self.observed += positions.len();
        Ok(positions.iter().map(|&p| self.reveal(offset + p)).collect())
    }
}
