//! Closed-form sample-complexity, detection and lower-bound formulas.
//!
//! Logarithms are natural. Budgets are returned unrounded; callers apply
//! the ceiling.

use serde::Serialize;

use crate::error::{Error, Result};

/// Parameters shared by the lower-bound formulas.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundParams {
    pub dims: Vec<usize>,
    pub rank: usize,
    pub mu0: f64,
    pub delta: f64,
    pub epsilon: f64,
}

impl BoundParams {
    pub fn order(&self) -> usize {
        self.dims.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.dims.is_empty() || self.dims.contains(&0) {
            return Err(Error::InvalidArgument("dims must be nonempty and positive".into()));
        }
        check_common(self.rank, self.mu0, self.delta)?;
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::InvalidArgument(format!("epsilon {} outside (0, 1)", self.epsilon)));
        }
        Ok(())
    }
}

/// Checks `r ≥ 1`, `mu0 ≥ 1` and `delta ∈ (0, 1/2)`.
pub fn check_common(rank: usize, mu0: f64, delta: f64) -> Result<()> {
    if rank == 0 {
        return Err(Error::InvalidArgument("rank must be at least 1".into()));
    }
    if !(mu0 >= 1.0 && mu0.is_finite()) {
        return Err(Error::InvalidArgument(format!("mu0 {mu0} must be at least 1")));
    }
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Error::InvalidArgument(format!("delta {delta} outside (0, 1/2)")));
    }
    Ok(())
}

/// `36 r^{3/2} μ0 ln(2r/δ)` samples per column.
pub fn matrix_budget(r: usize, mu0: f64, delta: f64) -> f64 {
    level_budget(r, mu0, delta, 2)
}

fn level_budget(r: usize, mu0: f64, delta: f64, t: usize) -> f64 {
    let r = r as f64;
    36.0 * r.powf(t as f64 - 0.5) * mu0.powi(t as i32 - 1) * (2.0 * r / delta).ln()
}

/// `m_t = 36 r^{t−1/2} μ0^{t−1} ln(2r/δ)` for `t = 1…T`.
pub fn tensor_budget_schedule(r: usize, mu0: f64, delta: f64, order: usize) -> Vec<f64> {
    (1..=order).map(|t| level_budget(r, mu0, delta, t)).collect()
}

/// Expected total observations `36 (Σ n_t) r^{T−1/2} μ0^{T−1} ln(2r/δ)`.
pub fn tensor_total(r: usize, mu0: f64, delta: f64, dims: &[usize]) -> f64 {
    let sum: usize = dims.iter().sum();
    sum as f64 * level_budget(r, mu0, delta, dims.len())
}

/// The matrix-specific expected total `36 n2 r^{3/2} μ0 ln(2r/δ) + r n1`.
pub fn corollary_total(r: usize, mu0: f64, delta: f64, n1: usize, n2: usize) -> f64 {
    n2 as f64 * matrix_budget(r, mu0, delta) + (r * n1) as f64
}

/// Worst-case observations of the recursive algorithm with integer
/// budgets `m_2…m_T`: each level tests all its units and recurses into at
/// most `r` of them, and a base vector costs `n_1`.
pub fn recursive_total(r: usize, dims: &[usize], budgets: &[usize]) -> f64 {
    // cost(1) = n_1; cost(t) = n_t m_t + r cost(t − 1)
    let mut cost = dims[0] as f64;
    for t in 1..dims.len() {
        cost = (dims[t] * budgets[t]) as f64 + r as f64 * cost;
    }
    cost
}

/// Passive (uniform-sampling) lower bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PassiveLowerBound {
    /// `n_1 r^{T−1} μ0^{T−1} ln(n_1/2δ)(1 − ε/2)`.
    pub value: f64,
    /// `(μ0 r)^{T−1} ln(n_1/2δ) / ∏_{i≥2} n_i`, which must not exceed ε.
    pub side_condition: f64,
    /// Whether `side_condition ≤ ε < 1` holds.
    pub reliable: bool,
    /// Smallest `m` satisfying `−ln(1 − m/∏n) ≥ side_condition`.
    pub exact_threshold: f64,
}

pub fn passive_lower_bound(p: &BoundParams) -> PassiveLowerBound {
    let t = p.order() as i32;
    let n1 = p.dims[0] as f64;
    let tail: f64 = p.dims[1..].iter().map(|&n| n as f64).product();
    let log_term = (n1 / (2.0 * p.delta)).ln();
    let coh = (p.mu0 * p.rank as f64).powi(t - 1);
    let side_condition = coh * log_term / tail;
    PassiveLowerBound {
        value: n1 * coh * log_term * (1.0 - p.epsilon / 2.0),
        side_condition,
        reliable: side_condition <= p.epsilon && p.epsilon < 1.0,
        exact_threshold: n1 * tail * -(-side_condition).exp_m1(),
    }
}

/// Parameter-counting bound `r Σ n_t`.
pub fn adaptive_lower_bound(dims: &[usize], r: usize) -> f64 {
    (r * dims.iter().sum::<usize>()) as f64
}

/// Constants of the subspace-detection sandwich
/// `lower·(m/n)‖v‖² ≤ ‖y_Ω − 𝒫_{U_Ω} y_Ω‖² ≤ upper·(m/n)‖v‖²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetectionConstants {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    /// `(1 − α) − d μ(U) β / ((1 − γ) m)`; `-inf` when `γ ≥ 1`.
    pub lower_factor: f64,
    pub upper_factor: f64,
    /// `γ < 1`, the regime where the lower factor is meaningful.
    pub in_regime: bool,
}

/// The factors are relative to `(m/n)‖v‖²`, so `n` itself drops out.
pub fn detection_constants(m: f64, _n: usize, d: usize, mu_u: f64, mu_v: f64, delta: f64) -> DetectionConstants {
    let d_f = d as f64;
    let l1 = (1.0 / delta).ln();
    let ld = (d_f / delta).ln();
    let alpha = (2.0 * mu_v / m * l1).sqrt() + 2.0 * mu_v / (3.0 * m) * l1;
    let beta = 6.0 * ld + 4.0 / 3.0 * d_f * mu_v / m * ld * ld;
    let gamma = (8.0 * d_f * mu_u / (3.0 * m) * (2.0 * d_f / delta).ln()).sqrt();
    let in_regime = gamma < 1.0;
    let lower_factor =
        if in_regime { (1.0 - alpha) - d_f * mu_u * beta / ((1.0 - gamma) * m) } else { f64::NEG_INFINITY };
    DetectionConstants { alpha, beta, gamma, lower_factor, upper_factor: 1.0 + alpha, in_regime }
}

/// Smallest `m` allowed by the detection theorem, `(8/3) d μ(U) ln(2d/δ)`.
pub fn detection_min_samples(d: usize, mu_u: f64, delta: f64) -> f64 {
    8.0 / 3.0 * d as f64 * mu_u * (2.0 * d as f64 / delta).ln()
}

/// Upper bound on `‖(U_ΩᵀU_Ω)⁻¹‖₂`, `n / ((1 − γ) m)`.
pub fn inverse_gram_bound(n: usize, m: f64, gamma: f64) -> f64 {
    n as f64 / ((1.0 - gamma) * m)
}

/// Coefficient `β (m/n)(d μ(U)/n)` bounding `‖U_Ωᵀ v_Ω‖² / ‖v‖²`.
pub fn cross_term_factor(m: f64, n: usize, d: usize, mu_u: f64, beta: f64) -> f64 {
    beta * (m / n as f64) * (d as f64 * mu_u / n as f64)
}

/// Rounds `L = ln(n1 n2)` for the noisy algorithm.
pub fn css_rounds(n1: usize, n2: usize) -> f64 {
    ((n1 * n2) as f64).ln()
}

/// Columns per round `s = 5 L r / (2 δ ε)`.
pub fn css_columns_per_round(rounds: f64, r: usize, delta: f64, epsilon: f64) -> f64 {
    5.0 * rounds * r as f64 / (2.0 * delta * epsilon)
}

/// Sample-complexity expression
/// `(L² r/(δε)) (n1 + μ0 n2 √r ln²(n1 n2 L r/(δε)))`.
pub fn css_sample_complexity(rounds: f64, r: usize, delta: f64, epsilon: f64, n1: usize, n2: usize, mu0: f64) -> f64 {
    let r_f = r as f64;
    let k = rounds * rounds * r_f / (delta * epsilon);
    let log = ((n1 * n2) as f64 * rounds * r_f / (delta * epsilon)).ln();
    k * (n1 as f64 + mu0 * n2 as f64 * r_f.sqrt() * log * log)
}

/// Error inflation of subsampled reconstruction over exact projection,
/// `1 + r μ β / (m (1 − γ)²)`.
pub fn reconstruction_factor(r: usize, mu: f64, beta: f64, m: f64, gamma: f64) -> f64 {
    1.0 + r as f64 * mu * beta / (m * (1.0 - gamma).powi(2))
}

/// Error-after-`L`-rounds shape `(1/(1−ε)) tail + ε^L ‖M‖²`.
pub fn css_round_error(epsilon: f64, rounds: u32, tail_energy: f64, total_energy: f64) -> f64 {
    tail_energy / (1.0 - epsilon) + epsilon.powi(rounds as i32) * total_energy
}
