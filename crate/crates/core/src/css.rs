//! Adaptive column subset selection for noisy matrices.
//!
//! Each round samples columns with probability proportional to their
//! residual against the current basis, estimated from a few entries per
//! column, observes the chosen columns in full and adds them to the basis.
//! The other columns are then reconstructed from fresh subsamples.

use std::time::Instant;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{sample_index_set, MeasurementOracle, SamplingKind, SliceSelector};
use crate::linalg::spectral::{singular_values, svd_left};
use crate::linalg::{
    orthonormalize, subsampled_residual_energy, DenseMatrix, DenseTensor, OrthonormalBasis, SubsampledProjector,
    DEFAULT_DROP_TOL,
};
use crate::noiseless::CompletionReport;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CssConfig {
    pub rounds: usize,
    pub columns_per_round: usize,
    pub m_per_column: usize,
    /// Recorded with the run; not used by the algorithm.
    pub epsilon: f64,
    /// Recorded with the run; not used by the algorithm.
    pub delta: f64,
    /// Reconstruct from the best rank-`r` subspace of the selected columns
    /// instead of their full span.
    #[serde(default)]
    pub truncate_rank: Option<usize>,
    #[serde(default)]
    pub sampling: SamplingKind,
    #[serde(default = "one")]
    pub resample_on_rank_deficiency: usize,
}

fn one() -> usize {
    1
}

impl CssConfig {
    pub fn new(rounds: usize, columns_per_round: usize, m_per_column: usize) -> Self {
        Self {
            rounds,
            columns_per_round,
            m_per_column,
            epsilon: 0.5,
            delta: 0.1,
            truncate_rank: None,
            sampling: SamplingKind::WithReplacement,
            resample_on_rank_deficiency: 1,
        }
    }

    pub fn validate(&self, n1: usize, n2: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.rounds == 0 || self.columns_per_round == 0 {
            return bad("rounds and columns_per_round must be positive".into());
        }
        if self.rounds * self.columns_per_round > n2 {
            return bad(format!(
                "rounds × columns_per_round = {} exceeds n2 = {n2}",
                self.rounds * self.columns_per_round
            ));
        }
        if self.m_per_column == 0 || self.m_per_column > n1 {
            return bad(format!("m_per_column {} outside [1, {n1}]", self.m_per_column));
        }
        if let Some(r) = self.truncate_rank {
            if r == 0 || r > n1.min(n2) {
                return bad(format!("truncate_rank {r} outside [1, {}]", n1.min(n2)));
            }
        }
        Ok(())
    }
}

/// State between rounds.
#[derive(Debug, Clone)]
pub struct CssState {
    pub round: usize,
    pub basis: OrthonormalBasis,
    /// Fully observed columns, ascending.
    pub selected_columns: Vec<usize>,
    pub estimated_probs: Vec<f64>,
    columns: Vec<(usize, Vec<f64>)>,
    estimation_draws: usize,
    full_column_draws: usize,
}

impl CssState {
    /// Round 0: empty basis and probabilities from raw subsampled energies.
    pub fn initial<R: Rng + ?Sized>(oracle: &mut MeasurementOracle, m: usize, rng: &mut R) -> Result<Self> {
        let (n1, n2) = matrix_dims(oracle)?;
        let before = oracle.observed_count();
        let basis = OrthonormalBasis::empty(n1);
        let probs = estimate(oracle, &basis, m, &vec![false; n2], SamplingKind::WithReplacement, rng)?;
        Ok(Self {
            round: 0,
            basis,
            selected_columns: Vec::new(),
            estimated_probs: probs,
            columns: Vec::new(),
            estimation_draws: oracle.observed_count() - before,
            full_column_draws: 0,
        })
    }

    /// The fully observed value of a selected column.
    pub fn observed_column(&self, j: usize) -> Option<&[f64]> {
        self.columns.iter().find(|(k, _)| *k == j).map(|(_, c)| c.as_slice())
    }
}

/// Everything a run produced.
#[derive(Debug, Clone)]
pub struct CssReport {
    pub completion: CompletionReport,
    pub selected_columns: Vec<usize>,
    pub estimation_draws: usize,
    pub full_column_draws: usize,
    pub reconstruction_draws: usize,
    /// The basis used for the final reconstruction.
    pub final_basis: OrthonormalBasis,
    /// Basis dimension after each round.
    pub basis_dims: Vec<usize>,
}

fn matrix_dims(oracle: &MeasurementOracle) -> Result<(usize, usize)> {
    match *oracle.dims() {
        [n1, n2] => Ok((n1, n2)),
        _ => Err(Error::InvalidArgument("column subset selection needs a matrix oracle".into())),
    }
}

/// Residual-proportional probabilities over all columns, each estimated
/// from a fresh size-`m` subsample. Uniform when every residual vanishes.
pub fn estimate_probs<R: Rng + ?Sized>(
    oracle: &mut MeasurementOracle,
    basis: &OrthonormalBasis,
    m_per_column: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let (_, n2) = matrix_dims(oracle)?;
    estimate(oracle, basis, m_per_column, &vec![false; n2], SamplingKind::WithReplacement, rng)
}

/// As [`estimate_probs`], with known columns assigned zero without
/// sampling; the uniform fallback covers only the unknown columns.
fn estimate<R: Rng + ?Sized>(
    oracle: &mut MeasurementOracle,
    basis: &OrthonormalBasis,
    m: usize,
    known: &[bool],
    sampling: SamplingKind,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let (n1, _) = matrix_dims(oracle)?;
    let mut energy = vec![0.0; known.len()];
    for (j, e) in energy.iter_mut().enumerate() {
        if known[j] {
            continue;
        }
        let omega = sample_index_set(n1, m, sampling, rng)?;
        let c_omega = oracle.observe_at(&omega, &SliceSelector::column(j))?;
        *e = subsampled_residual_energy(basis, &omega, &c_omega)?;
    }
    let total: f64 = energy.iter().sum();
    if total > 0.0 && total.is_finite() {
        energy.iter_mut().for_each(|e| *e /= total);
        return Ok(energy);
    }
    let free = known.iter().filter(|&&k| !k).count();
    Ok(if free == 0 {
        vec![1.0 / known.len() as f64; known.len()]
    } else {
        known.iter().map(|&k| if k { 0.0 } else { 1.0 / free as f64 }).collect()
    })
}

/// One round: draw `s` columns i.i.d. from `p̂`, observe the new ones in
/// full, extend the basis and re-estimate `p̂`.
pub fn css_round<R: Rng + ?Sized>(
    oracle: &mut MeasurementOracle,
    state: CssState,
    config: &CssConfig,
    rng: &mut R,
) -> Result<CssState> {
    round(oracle, state, config, true, rng)
}

fn round<R: Rng + ?Sized>(
    oracle: &mut MeasurementOracle,
    mut state: CssState,
    config: &CssConfig,
    reestimate: bool,
    rng: &mut R,
) -> Result<CssState> {
    let (n1, n2) = matrix_dims(oracle)?;
    let dist = WeightedIndex::new(&state.estimated_probs)
        .map_err(|e| Error::InvalidArgument(format!("bad sampling distribution: {e}")))?;
    let mut draws: Vec<usize> = (0..config.columns_per_round).map(|_| dist.sample(rng)).collect();
    draws.sort_unstable();
    draws.dedup();
    for j in draws {
        if state.selected_columns.binary_search(&j).is_ok() {
            continue;
        }
        let c = oracle.observe_column(j)?;
        state.full_column_draws += n1;
        state.basis.extend(&c, DEFAULT_DROP_TOL)?;
        let pos = state.selected_columns.binary_search(&j).unwrap_err();
        state.selected_columns.insert(pos, j);
        state.columns.push((j, c));
    }
    state.round += 1;
    if reestimate {
        let mut known = vec![false; n2];
        state.selected_columns.iter().for_each(|&j| known[j] = true);
        let before = oracle.observed_count();
        state.estimated_probs = estimate(oracle, &state.basis, config.m_per_column, &known, config.sampling, rng)?;
        state.estimation_draws += oracle.observed_count() - before;
    }
    Ok(state)
}

/// Runs `L` rounds from an empty basis, then reconstructs every
/// non-selected column from a fresh subsample.
pub fn css_complete<R: Rng + ?Sized>(
    oracle: &mut MeasurementOracle,
    n1: usize,
    n2: usize,
    config: &CssConfig,
    rng: &mut R,
) -> Result<CssReport> {
    if oracle.dims() != [n1, n2] {
        return Err(Error::InvalidArgument(format!("oracle dims {:?} do not match [{n1}, {n2}]", oracle.dims())));
    }
    config.validate(n1, n2)?;
    let start = Instant::now();
    let before = oracle.observed_count();

    let mut state = CssState::initial(oracle, config.m_per_column, rng)?;
    let mut basis_dims = Vec::with_capacity(config.rounds);
    for l in 0..config.rounds {
        state = round(oracle, state, config, l + 1 < config.rounds, rng)?;
        basis_dims.push(state.basis.dim());
    }

    let final_basis = match config.truncate_rank {
        Some(r) if r < state.basis.dim() => {
            let cols: Vec<Vec<f64>> = state.columns.iter().map(|(_, c)| c.clone()).collect();
            let (_, left) = svd_left(&DenseMatrix::from_columns(&cols)?);
            orthonormalize(&left[..r], DEFAULT_DROP_TOL)?
        }
        _ => state.basis.clone(),
    };

    let recon_before = oracle.observed_count();
    let mut estimate = DenseMatrix::zeros(n1, n2);
    let mut failed_units = Vec::new();
    for j in 0..n2 {
        if let Some(c) = state.observed_column(j) {
            estimate.column_mut(j).copy_from_slice(c);
            continue;
        }
        let mut attempts = 0;
        loop {
            let omega = sample_index_set(n1, config.m_per_column, config.sampling, rng)?;
            let c_omega = oracle.observe_at(&omega, &SliceSelector::column(j))?;
            match SubsampledProjector::new(&final_basis, &omega) {
                Ok(p) => {
                    let c = final_basis.combine(&p.coefficients(&c_omega)?)?;
                    estimate.column_mut(j).copy_from_slice(&c);
                    break;
                }
                Err(Error::RankDeficient { .. }) if attempts < config.resample_on_rank_deficiency => attempts += 1,
                Err(Error::RankDeficient { .. }) => {
                    failed_units.push(j);
                    break;
                }
                Err(e) => return Err(e),
            }
        }
    }
    let reconstruction_draws = oracle.observed_count() - recon_before;
    let entries_observed = oracle.observed_count() - before;
    let selected = state.selected_columns.len();
    let completion = CompletionReport {
        estimate: estimate.into_tensor(),
        entries_observed,
        entries_gross: entries_observed,
        fully_observed_units: selected,
        units_per_level: vec![selected, selected],
        basis_dim_final: final_basis.dim(),
        success: None,
        wall_time: start.elapsed().as_secs_f64(),
        resamples: 0,
        failed_units,
    };
    Ok(CssReport {
        completion,
        selected_columns: state.selected_columns,
        estimation_draws: state.estimation_draws,
        full_column_draws: state.full_column_draws,
        reconstruction_draws,
        final_basis,
        basis_dims,
    })
}

/// `‖M − M_r‖_F²`, from the trailing singular values.
pub fn best_rank_r_error(m: &DenseMatrix, r: usize) -> Result<f64> {
    let k = m.n_rows().min(m.n_cols());
    if r > k {
        return Err(Error::InvalidArgument(format!("rank {r} exceeds min dimension {k}")));
    }
    let sv = singular_values(m);
    Ok(sv[r..].iter().map(|s| s * s).sum())
}

/// Squared Frobenius error of an estimate against a truth tensor.
pub fn squared_error(estimate: &DenseTensor, truth: &DenseTensor) -> Result<f64> {
    estimate.distance_sq(truth)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{gen_matrix, Family, SyntheticSpec};
    use crate::seed;
    use std::sync::Arc;

    fn oracle_of(m: DenseMatrix) -> MeasurementOracle {
        MeasurementOracle::new(Arc::new(m.into_tensor()), 0.0, 0).unwrap()
    }

    #[test]
    fn equal_columns_give_uniform_probs() {
        let m = DenseMatrix::from_fn(6, 4, |i, j| if (i + j) % 2 == 0 { 1.0 } else { -1.0 });
        let mut oracle = oracle_of(m);
        let p = estimate_probs(&mut oracle, &OrthonormalBasis::empty(6), 6, &mut seed::rng(0, &[])).unwrap();
        // with replacement the draws of 6 out of 6 can repeat, but every entry has unit magnitude
        for x in &p {
            assert!((x - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn single_outside_column_gets_all_mass() {
        let m = DenseMatrix::from_fn(50, 4, |i, j| match (i, j) {
            (0, 2) => 0.0,
            (_, 2) => 1.0,
            (0, _) => j as f64 + 1.0,
            _ => 0.0,
        });
        let mut oracle = oracle_of(m);
        let mut e0 = vec![0.0; 50];
        e0[0] = 1.0;
        let basis = orthonormalize(&[e0], DEFAULT_DROP_TOL).unwrap();
        let p = estimate_probs(&mut oracle, &basis, 50, &mut seed::rng(8, &[])).unwrap();
        assert!(p[2] > 1.0 - 1e-12);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn best_rank_r_error_diagonal() {
        let m = DenseMatrix::from_fn(3, 3, |i, j| if i == j { 3.0 - i as f64 } else { 0.0 });
        assert!((best_rank_r_error(&m, 2).unwrap() - 1.0).abs() < 1e-14);
        assert!(best_rank_r_error(&m, 4).is_err());
    }

    #[test]
    fn noiseless_run_is_exact_and_audited() {
        let spec = SyntheticSpec::matrix(40, 40, 3, Family::GaussianFactors, 2);
        let (inst, mut oracle) = gen_matrix(&spec).unwrap();
        let cfg = CssConfig::new(1, 8, 20);
        let mut rep = css_complete(&mut oracle, 40, 40, &cfg, &mut seed::rng(3, &[])).unwrap();
        assert!(rep.completion.evaluate(inst.ground_truth(), 1e-8).unwrap() <= 1e-8);
        let distinct = rep.selected_columns.len();
        assert_eq!(rep.full_column_draws, 40 * distinct);
        assert_eq!(rep.estimation_draws, 20 * 40);
        assert_eq!(rep.reconstruction_draws, 20 * (40 - distinct));
        assert_eq!(
            rep.completion.entries_observed,
            rep.estimation_draws + rep.full_column_draws + rep.reconstruction_draws
        );
        assert_eq!(rep.completion.entries_observed, oracle.observed_count());
    }

    #[test]
    fn config_validation() {
        assert!(CssConfig::new(3, 5, 10).validate(20, 14).is_err());
        assert!(CssConfig::new(2, 5, 21).validate(20, 14).is_err());
        assert!(CssConfig::new(2, 5, 20).validate(20, 14).is_ok());
    }
}
