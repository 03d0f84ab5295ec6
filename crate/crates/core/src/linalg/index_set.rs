use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How an index set was drawn.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplingMode {
    /// `m` i.i.d. uniform draws; duplicates allowed.
    WithReplacement(usize),
    /// Each index kept independently with probability `p`.
    Bernoulli(f64),
}

/// Ordered multiset `Ω ⊂ [n]` (zero-based), sorted ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexSet {
    ambient_dim: usize,
    indices: Vec<usize>,
    mode: SamplingMode,
}

impl IndexSet {
    pub fn new(ambient_dim: usize, mut indices: Vec<usize>, mode: SamplingMode) -> Result<Self> {
        if ambient_dim == 0 {
            return Err(Error::InvalidArgument("index set over an empty range".into()));
        }
        if let Some(&bad) = indices.iter().find(|&&i| i >= ambient_dim) {
            return Err(Error::OutOfRange { index: bad, bound: ambient_dim });
        }
        match mode {
            SamplingMode::WithReplacement(m) if m != indices.len() => {
                return Err(Error::DimensionMismatch { expected: m, found: indices.len() });
            }
            SamplingMode::Bernoulli(p) if !(0.0..=1.0).contains(&p) => {
                return Err(Error::InvalidArgument(format!("Bernoulli probability {p} outside [0, 1]")));
            }
            _ => {}
        }
        indices.sort_unstable();
        Ok(Self { ambient_dim, indices, mode })
    }

    /// Every index exactly once.
    pub fn full(ambient_dim: usize) -> Self {
        Self { ambient_dim, indices: (0..ambient_dim).collect(), mode: SamplingMode::Bernoulli(1.0) }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn mode(&self) -> SamplingMode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn distinct_count(&self) -> usize {
        // sorted, so duplicates are adjacent
        self.indices.windows(2).filter(|w| w[0] != w[1]).count() + usize::from(!self.indices.is_empty())
    }

    /// Indices of `[n]` that do not appear in the set.
    pub fn complement(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.ambient_dim.saturating_sub(self.indices.len()));
        let mut it = self.indices.iter().peekable();
        for i in 0..self.ambient_dim {
            let mut hit = false;
            while let Some(&&j) = it.peek() {
                if j == i {
                    hit = true;
                    it.next();
                } else {
                    break;
                }
            }
            if !hit {
                out.push(i);
            }
        }
        out
    }

    /// `v_Ω`
    pub fn gather(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.ambient_dim {
            return Err(Error::DimensionMismatch { expected: self.ambient_dim, found: v.len() });
        }
        Ok(self.indices.iter().map(|&i| v[i]).collect())
    }
}
