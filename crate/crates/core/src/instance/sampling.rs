use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{IndexSet, SamplingMode};

/// Sampling model for `Ω`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplingKind {
    /// Exactly `m` i.i.d. uniform draws from `[n]`.
    #[default]
    WithReplacement,
    /// Each index kept independently with probability `m / n`.
    Bernoulli,
}

/// Draws `Ω ⊂ [n]` with `m` expected samples.
pub fn sample_index_set<R: Rng + ?Sized>(n: usize, m: usize, kind: SamplingKind, rng: &mut R) -> Result<IndexSet> {
    if n == 0 {
        return Err(Error::InvalidArgument("cannot sample from an empty range".into()));
    }
    if m == 0 || m > n.saturating_mul(10) {
        return Err(Error::InvalidArgument(format!("sample count {m} outside [1, 10·{n}]")));
    }
    match kind {
        SamplingKind::WithReplacement => {
            let draws = (0..m).map(|_| rng.random_range(0..n)).collect();
            IndexSet::new(n, draws, SamplingMode::WithReplacement(m))
        }
        SamplingKind::Bernoulli => {
            let p = (m as f64 / n as f64).min(1.0);
            let kept = (0..n).filter(|_| rng.random_bool(p)).collect();
            IndexSet::new(n, kept, SamplingMode::Bernoulli(p))
        }
    }
}
