//! Exact adaptive completion: the sequential matrix algorithm and its
//! recursive tensor generalisation.
//!
//! Both entry points share one recursive engine. A level of order `t`
//! walks the mode-`t` units of its block in order, tests each against the
//! current candidate subspace from a subsample, and either recurses (base
//! case: observe the vector) or reconstructs the unit from the subsample.

use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{sample_index_set, MeasurementOracle, SamplingKind, SliceSelector};
use crate::linalg::{norm_sq, DenseTensor, IndexSet, OrthonormalBasis, SubsampledProjector, DEFAULT_DROP_TOL};

/// Default relative threshold on the subsampled residual test.
pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-8;

/// When a level draws its sample set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OmegaPolicy {
    /// A fresh `Ω` for every unit (column).
    FreshPerUnit,
    /// One `Ω` per level shared by all of its units, redrawn only after a
    /// rank-deficient `U_Ω`.
    SharedPerLevel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiselessConfig {
    /// `m_1…m_T`; level `t` spends `m_t` draws per unit test. `m_1` is
    /// unused because the base case observes whole vectors. A single entry
    /// is accepted for matrices.
    pub budgets: Vec<usize>,
    pub residual_tol: f64,
    pub resample_on_rank_deficiency: usize,
    pub sampling: SamplingKind,
    pub omega_policy: OmegaPolicy,
}

impl NoiselessConfig {
    /// Matrix defaults: `m` draws per column, fresh `Ω` per column.
    pub fn matrix(m: usize) -> Self {
        Self {
            budgets: vec![m],
            residual_tol: DEFAULT_RESIDUAL_TOL,
            resample_on_rank_deficiency: 1,
            sampling: SamplingKind::WithReplacement,
            omega_policy: OmegaPolicy::FreshPerUnit,
        }
    }

    /// Tensor defaults: one `Ω` per level.
    pub fn tensor(budgets: Vec<usize>) -> Self {
        Self { budgets, omega_policy: OmegaPolicy::SharedPerLevel, ..Self::matrix(1) }
    }

    pub fn with_policy(mut self, policy: OmegaPolicy) -> Self {
        self.omega_policy = policy;
        self
    }

    /// Budget used at level `t` (1-based) of an order-`order` problem.
    fn budget(&self, t: usize, order: usize) -> usize {
        if self.budgets.len() == order {
            self.budgets[t - 1]
        } else {
            // a short list is aligned to the top levels
            self.budgets[self.budgets.len() + t - 1 - order]
        }
    }

    fn validate(&self, dims: &[usize]) -> Result<()> {
        let order = dims.len();
        if self.budgets.len() != order && !(order == 2 && self.budgets.len() == 1) {
            return Err(Error::Config(format!("need {order} budgets, got {}", self.budgets.len())));
        }
        if !(self.residual_tol >= 0.0) {
            return Err(Error::Config(format!("residual_tol {} must be nonnegative", self.residual_tol)));
        }
        let mut unit_len = 1;
        for t in 2..=order {
            unit_len *= dims[t - 2];
            let m = self.budget(t, order);
            if m == 0 || m > unit_len {
                return Err(Error::Config(format!("budget m_{t} = {m} outside [1, {unit_len}]")));
            }
        }
        Ok(())
    }
}

/// Outcome of a completion run.
#[derive(Debug, Clone)]
pub struct CompletionReport {
    pub estimate: DenseTensor,
    /// Oracle counter delta over the run.
    pub entries_observed: usize,
    /// What the run would have cost had fully observed vectors re-revealed
    /// the entries already sampled from them.
    pub entries_gross: usize,
    /// Informative units at the top level (columns for matrices).
    pub fully_observed_units: usize,
    /// Informative units per level, summed over all recursive calls;
    /// entry `t − 1` is level `t`, and entry 0 counts observed vectors.
    pub units_per_level: Vec<usize>,
    pub basis_dim_final: usize,
    /// Set by [`CompletionReport::evaluate`] against a known truth.
    pub success: Option<bool>,
    pub wall_time: f64,
    /// `Ω` redraws forced by a rank-deficient `U_Ω`.
    pub resamples: usize,
    /// Units that could not be reconstructed (noisy CSS only).
    pub failed_units: Vec<usize>,
}

impl CompletionReport {
    /// Relative Frobenius error against `truth`; marks success when it is at
    /// most `threshold`.
    pub fn evaluate(&mut self, truth: &DenseTensor, threshold: f64) -> Result<f64> {
        let err = self.estimate.relative_error(truth)?;
        self.success = Some(err <= threshold);
        Ok(err)
    }
}

/// Sequential matrix completion on an `n1 × n2` oracle.
pub fn complete_matrix<R: Rng + ?Sized>(
    oracle: &mut MeasurementOracle,
    n1: usize,
    n2: usize,
    config: &NoiselessConfig,
    rng: &mut R,
) -> Result<CompletionReport> {
    complete_tensor(oracle, &[n1, n2], config, rng)
}

/// Recursive tensor completion; `dims.len() == 2` is the matrix algorithm.
pub fn complete_tensor<R: Rng + ?Sized>(
    oracle: &mut MeasurementOracle,
    dims: &[usize],
    config: &NoiselessConfig,
    rng: &mut R,
) -> Result<CompletionReport> {
    if oracle.dims() != dims {
        return Err(Error::InvalidArgument(format!("oracle dims {:?} do not match {dims:?}", oracle.dims())));
    }
    if dims.len() < 2 {
        return Err(Error::InvalidArgument("completion needs at least 2 modes".into()));
    }
    config.validate(dims)?;
    let start = Instant::now();
    let before = oracle.observed_count();
    let mut engine = Engine {
        oracle,
        config,
        rng,
        dims,
        units_per_level: vec![0; dims.len()],
        skipped: 0,
        resamples: 0,
        top_basis_dim: 0,
    };
    let data = engine.block(dims.len(), &SliceSelector::whole(), &[])?;
    let (units_per_level, skipped, resamples, basis_dim_final) =
        (engine.units_per_level, engine.skipped, engine.resamples, engine.top_basis_dim);
    let entries_observed = oracle.observed_count() - before;
    Ok(CompletionReport {
        estimate: DenseTensor::from_vec(dims, data)?,
        entries_observed,
        entries_gross: entries_observed + skipped,
        fully_observed_units: units_per_level[dims.len() - 1],
        units_per_level,
        basis_dim_final,
        success: None,
        wall_time: start.elapsed().as_secs_f64(),
        resamples,
        failed_units: Vec::new(),
    })
}

struct Engine<'a, R: ?Sized> {
    oracle: &'a mut MeasurementOracle,
    config: &'a NoiselessConfig,
    rng: &'a mut R,
    dims: &'a [usize],
    units_per_level: Vec<usize>,
    skipped: usize,
    resamples: usize,
    top_basis_dim: usize,
}

impl<R: Rng + ?Sized> Engine<'_, R> {
    /// Completes the order-`order` block selected by `sel`. `known` holds
    /// `(position, value)` pairs already revealed inside the block.
    fn block(&mut self, order: usize, sel: &SliceSelector, known: &[(usize, f64)]) -> Result<Vec<f64>> {
        if order == 1 {
            return self.observe_vector(sel, known);
        }
        let unit_len: usize = self.dims[..order - 1].iter().product();
        let n_units = self.dims[order - 1];
        let m = self.config.budget(order, self.dims.len());

        let mut known_by_unit: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n_units];
        for &(p, v) in known {
            known_by_unit[p / unit_len].push((p % unit_len, v));
        }

        let mut basis = OrthonormalBasis::empty(unit_len);
        let mut shared: Option<(IndexSet, Option<SubsampledProjector>)> = None;
        let mut out = Vec::with_capacity(unit_len * n_units);
        for (i, unit_known) in known_by_unit.iter_mut().enumerate() {
            let child = sel.child(i);
            let mut attempts = 0;
            let (omega, c_omega, residual, coef) = loop {
                let omega = match (&shared, self.config.omega_policy) {
                    (Some((omega, _)), OmegaPolicy::SharedPerLevel) => omega.clone(),
                    _ => sample_index_set(unit_len, m, self.config.sampling, self.rng)?,
                };
                let c_omega = self.oracle.observe_at(&omega, &child)?;
                let projector = match shared.take() {
                    Some((_, Some(p))) if self.config.omega_policy == OmegaPolicy::SharedPerLevel => Ok(p),
                    _ => SubsampledProjector::new(&basis, &omega),
                };
                match projector {
                    Ok(p) => {
                        let (residual, coef) = p.solve(&c_omega)?;
                        if self.config.omega_policy == OmegaPolicy::SharedPerLevel {
                            shared = Some((omega.clone(), Some(p)));
                        }
                        break (omega, c_omega, residual, coef);
                    }
                    Err(Error::RankDeficient { .. }) if attempts < self.config.resample_on_rank_deficiency => {
                        // revealed entries stay known
                        unit_known.extend(omega.indices().iter().copied().zip(c_omega.iter().copied()));
                        attempts += 1;
                        self.resamples += 1;
                        shared = None;
                    }
                    Err(e) => return Err(e),
                }
            };

            unit_known.extend(omega.indices().iter().copied().zip(c_omega.iter().copied()));
            unit_known.sort_unstable_by_key(|&(p, _)| p);
            unit_known.dedup_by_key(|&mut (p, _)| p);

            let informative = residual > self.config.residual_tol * norm_sq(&c_omega);
            let mut unit = if informative {
                self.units_per_level[order - 1] += 1;
                let unit = self.block(order - 1, &child, unit_known)?;
                if basis.extend(&unit, DEFAULT_DROP_TOL)? {
                    // U_Ω changed
                    if let Some((_, p)) = &mut shared {
                        *p = None;
                    }
                }
                unit
            } else {
                basis.combine(&coef)?
            };
            for &(p, v) in unit_known.iter() {
                unit[p] = v;
            }
            out.extend_from_slice(&unit);
        }
        if order == self.dims.len() {
            self.top_basis_dim = basis.dim();
        }
        Ok(out)
    }

    fn observe_vector(&mut self, sel: &SliceSelector, known: &[(usize, f64)]) -> Result<Vec<f64>> {
        let n = self.dims[0];
        let mut v = vec![f64::NAN; n];
        let mut seen = vec![false; n];
        for &(p, x) in known {
            v[p] = x;
            seen[p] = true;
        }
        let missing: Vec<usize> = (0..n).filter(|&p| !seen[p]).collect();
        self.skipped += n - missing.len();
        let values = self.oracle.observe_positions(&missing, sel)?;
        for (&p, x) in missing.iter().zip(values) {
            v[p] = x;
        }
        self.units_per_level[0] += 1;
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{gen_matrix, gen_tensor, Family, SyntheticSpec};
    use crate::linalg::DenseMatrix;
    use crate::seed;
    use std::sync::Arc;

    #[test]
    fn zero_matrix_needs_no_columns() {
        let truth = Arc::new(DenseTensor::zeros(&[8, 6]));
        let mut oracle = MeasurementOracle::new(truth, 0.0, 0).unwrap();
        let rep = complete_matrix(&mut oracle, 8, 6, &NoiselessConfig::matrix(3), &mut seed::rng(0, &[])).unwrap();
        assert!(rep.estimate.as_slice().iter().all(|&x| x == 0.0));
        assert_eq!(rep.fully_observed_units, 0);
        assert_eq!(rep.entries_observed, 18);
    }

    #[test]
    fn budget_identity_for_matrices() {
        let spec = SyntheticSpec::matrix(40, 30, 3, Family::GaussianFactors, 5);
        let (inst, mut oracle) = gen_matrix(&spec).unwrap();
        let m = 15;
        let mut rng = seed::rng(1, &[]);
        let mut rep = complete_matrix(&mut oracle, 40, 30, &NoiselessConfig::matrix(m), &mut rng).unwrap();
        assert!(rep.evaluate(inst.ground_truth(), 1e-8).unwrap() < 1e-8);
        assert_eq!(rep.fully_observed_units, 3);
        assert_eq!(rep.resamples, 0);
        // gross counts every informative column in full on top of its draws
        assert_eq!(rep.entries_gross, m * 30 + 40 * 3);
        assert!(rep.entries_observed < rep.entries_gross);
        assert_eq!(rep.entries_observed, oracle.observed_count());
    }

    #[test]
    fn informative_column_reuses_sampled_entries() {
        let truth = DenseMatrix::from_fn(5, 1, |i, _| i as f64 + 1.0).into_tensor();
        let mut oracle = MeasurementOracle::new(Arc::new(truth), 0.0, 0).unwrap();
        let rep = complete_matrix(&mut oracle, 5, 1, &NoiselessConfig::matrix(3), &mut seed::rng(4, &[])).unwrap();
        assert_eq!(rep.estimate.as_slice(), &[1.0, 2.0, 3.0, 4.0, 5.0]);
        assert!(rep.entries_observed <= 3 + 4);
        assert_eq!(rep.entries_gross, 8);
    }

    #[test]
    fn short_budget_list_aligns_to_top() {
        let c = NoiselessConfig::matrix(7);
        assert_eq!(c.budget(2, 2), 7);
        let c = NoiselessConfig::tensor(vec![1, 4, 9]);
        assert_eq!(c.budget(3, 3), 9);
        assert_eq!(c.budget(2, 3), 4);
    }

    #[test]
    fn rejects_bad_budgets() {
        let spec = SyntheticSpec::matrix(10, 10, 2, Family::GaussianFactors, 0);
        let (_, mut oracle) = gen_matrix(&spec).unwrap();
        let mut rng = seed::rng(0, &[]);
        for cfg in [NoiselessConfig::matrix(0), NoiselessConfig::matrix(11), NoiselessConfig::tensor(vec![1, 2, 3])] {
            assert!(matches!(complete_matrix(&mut oracle, 10, 10, &cfg, &mut rng), Err(Error::Config(_))));
        }
        assert!(complete_matrix(&mut oracle, 10, 9, &NoiselessConfig::matrix(5), &mut rng).is_err());
    }

    #[test]
    fn rank_deficiency_is_reported() {
        // every column is a multiple of e_0, so U_Ω vanishes whenever Ω misses row 0
        let truth = DenseMatrix::from_fn(4, 30, |i, j| if i == 0 { j as f64 + 1.0 } else { 0.0 }).into_tensor();
        let truth = Arc::new(truth);
        let failed = (0..50).any(|s| {
            let mut oracle = MeasurementOracle::new(Arc::clone(&truth), 0.0, 0).unwrap();
            let res = complete_matrix(&mut oracle, 4, 30, &NoiselessConfig::matrix(2), &mut seed::rng(s, &[]));
            matches!(res, Err(Error::RankDeficient { .. }))
        });
        assert!(failed);
    }

    #[test]
    fn small_tensor_recovers() {
        let spec = SyntheticSpec::tensor(&[12, 12, 12], 1, Family::GaussianFactors, 2);
        let (inst, mut oracle) = gen_tensor(&spec).unwrap();
        let cfg = NoiselessConfig::tensor(vec![1, 8, 40]);
        let mut rep = complete_tensor(&mut oracle, &[12, 12, 12], &cfg, &mut seed::rng(3, &[])).unwrap();
        assert!(rep.evaluate(inst.ground_truth(), 1e-8).unwrap() <= 1e-8);
        assert_eq!(rep.fully_observed_units, 1);
        assert_eq!(rep.units_per_level, vec![1, 1, 1]);
    }
}
