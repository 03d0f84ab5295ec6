use std::f64::consts::PI;

use rand::seq::index;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{block_len, Family, Instance, MeasurementOracle, SyntheticSpec};
use crate::error::{Error, Result};
use crate::linalg::{orthonormalize, DEFAULT_DROP_TOL};
use crate::seed;

const GEN_STREAM: u64 = 0x6765_6e;

/// Generates a matrix instance (`dims.len() == 2`) and a fresh oracle over it.
pub fn gen_matrix(spec: &SyntheticSpec) -> Result<(Instance, MeasurementOracle)> {
    if spec.order() != 2 {
        return Err(Error::InvalidSpec(format!("gen_matrix needs 2 dims, got {}", spec.order())));
    }
    let inst = generate(spec)?;
    let oracle = inst.oracle();
    Ok((inst, oracle))
}

/// Generates an order-`T ≥ 3` CP-rank-`r` instance and a fresh oracle.
pub fn gen_tensor(spec: &SyntheticSpec) -> Result<(Instance, MeasurementOracle)> {
    if spec.order() < 3 {
        return Err(Error::InvalidSpec(format!("gen_tensor needs at least 3 dims, got {}", spec.order())));
    }
    let inst = generate(spec)?;
    let oracle = inst.oracle();
    Ok((inst, oracle))
}

/// Draws a member of the block-diagonal family: block `k` covers rows
/// `R_k` (length `n1/r`) and columns `C_k` (length `n2/(mu0 r)`), and each
/// block row is constant with a value uniform in `[1, √mu0]`.
pub fn gen_blockdiag(n1: usize, n2: usize, r: usize, mu0: f64, seed: u64) -> Result<Instance> {
    generate(&SyntheticSpec::matrix(n1, n2, r, Family::BlockDiagonal { mu0 }, seed))
}

fn generate(spec: &SyntheticSpec) -> Result<Instance> {
    spec.validate()?;
    let mut rng = seed::rng(spec.seed, &[GEN_STREAM]);
    let mut factors = match spec.family {
        Family::BlockDiagonal { mu0 } => block_factors(spec, mu0, &mut rng)?,
        Family::GaussianFactors => smooth_factors(spec, None, &mut rng)?,
        Family::CoherentRow { theta } => smooth_factors(spec, Some(theta), &mut rng)?,
    };
    if spec.unit_frobenius {
        let norm = cp_norm(&factors);
        for v in &mut factors[0] {
            v.iter_mut().for_each(|x| *x /= norm);
        }
    }
    Instance::from_factors(spec.clone(), factors)
}

fn gaussian_vec(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

fn normalized(mut v: Vec<f64>) -> Vec<f64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    v
}

fn orthonormal_gaussian(n: usize, r: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Vec<f64>>> {
    let raw: Vec<Vec<f64>> = (0..r).map(|_| gaussian_vec(n, rng)).collect();
    let basis = orthonormalize(&raw, DEFAULT_DROP_TOL)?;
    if basis.dim() != r {
        return Err(Error::InvalidSpec("Gaussian factors came out rank deficient".into()));
    }
    Ok(basis.vectors().to_vec())
}

/// `V_θ = orthonormalize((1 − θ)F + θS)` with `F` a random set of DCT-II
/// vectors and `S` a random set of coordinate vectors.
fn coherent_row_basis(n: usize, r: usize, theta: f64, rng: &mut ChaCha8Rng) -> Result<Vec<Vec<f64>>> {
    let freqs = index::sample(rng, n, r).into_vec();
    let coords = index::sample(rng, n, r).into_vec();
    let raw: Vec<Vec<f64>> = freqs
        .iter()
        .zip(&coords)
        .map(|(&k, &s)| {
            let scale = if k == 0 { (1.0 / n as f64).sqrt() } else { (2.0 / n as f64).sqrt() };
            let mut v: Vec<f64> = (0..n)
                .map(|j| (1.0 - theta) * scale * (PI * k as f64 * (2 * j + 1) as f64 / (2 * n) as f64).cos())
                .collect();
            v[s] += theta;
            v
        })
        .collect();
    let basis = orthonormalize(&raw, DEFAULT_DROP_TOL)?;
    if basis.dim() != r {
        return Err(Error::InvalidSpec("coherent row basis came out rank deficient".into()));
    }
    Ok(basis.vectors().to_vec())
}

/// Gaussian (or coherent-row) factors. Matrices get orthonormal `U`, `V`
/// with singular values uniform in `[1, 2]`; tensors get unit-norm Gaussian
/// factors with the weights on mode 0. The mode-0 draw comes first so it
/// does not depend on `theta`.
fn smooth_factors(spec: &SyntheticSpec, theta: Option<f64>, rng: &mut ChaCha8Rng) -> Result<Vec<Vec<Vec<f64>>>> {
    let r = spec.rank;
    let t_order = spec.order();
    let mut first = if t_order == 2 {
        orthonormal_gaussian(spec.dims[0], r, rng)?
    } else {
        (0..r).map(|_| normalized(gaussian_vec(spec.dims[0], rng))).collect()
    };
    for v in &mut first {
        let w: f64 = rng.random_range(1.0..2.0);
        v.iter_mut().for_each(|x| *x *= w);
    }
    let mut factors = vec![first];
    for t in 1..t_order {
        let n = spec.dims[t];
        let mode = match theta {
            Some(th) if t == t_order - 1 => coherent_row_basis(n, r, th, rng)?,
            _ if t_order == 2 => orthonormal_gaussian(n, r, rng)?,
            _ => (0..r).map(|_| normalized(gaussian_vec(n, rng))).collect(),
        };
        factors.push(mode);
    }
    Ok(factors)
}

fn block_factors(spec: &SyntheticSpec, mu0: f64, rng: &mut ChaCha8Rng) -> Result<Vec<Vec<Vec<f64>>>> {
    let r = spec.rank;
    let l1 = spec.dims[0] / r;
    let hi = mu0.sqrt();
    let mut factors = Vec::with_capacity(spec.order());
    let first = (0..r)
        .map(|k| {
            let mut v = vec![0.0; spec.dims[0]];
            for x in &mut v[k * l1..(k + 1) * l1] {
                *x = if hi > 1.0 { rng.random_range(1.0..hi) } else { 1.0 };
            }
            v
        })
        .collect();
    factors.push(first);
    for &n in &spec.dims[1..] {
        let l = block_len(n, mu0, r)?;
        let mode = (0..r)
            .map(|k| {
                let mut v = vec![0.0; n];
                v[k * l..(k + 1) * l].iter_mut().for_each(|x| *x = 1.0);
                v
            })
            .collect();
        factors.push(mode);
    }
    Ok(factors)
}

/// Frobenius norm of `Σ_k ⊗_t a_k^(t)` through the Gram identity.
fn cp_norm(factors: &[Vec<Vec<f64>>]) -> f64 {
    let r = factors[0].len();
    let mut total = 0.0;
    for k in 0..r {
        for l in 0..r {
            total += factors
                .iter()
                .map(|mode| mode[k].iter().zip(&mode[l]).map(|(a, b)| a * b).sum::<f64>())
                .product::<f64>();
        }
    }
    total.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::coherence_subspace;

    #[test]
    fn same_seed_same_instance() {
        let spec = SyntheticSpec::matrix(20, 15, 3, Family::GaussianFactors, 9);
        let (a, _) = gen_matrix(&spec).unwrap();
        let (b, _) = gen_matrix(&spec).unwrap();
        assert_eq!(a.ground_truth().as_slice(), b.ground_truth().as_slice());
    }

    #[test]
    fn unit_frobenius_rescales() {
        for dims in [vec![30, 20], vec![6, 7, 8]] {
            let spec = SyntheticSpec::tensor(&dims, 2, Family::GaussianFactors, 3).with_unit_frobenius();
            let inst = generate(&spec).unwrap();
            assert!((inst.ground_truth().frobenius_norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn coherent_row_keeps_column_space() {
        let mu = |theta: f64| {
            let spec = SyntheticSpec::matrix(30, 30, 3, Family::CoherentRow { theta }, 4);
            let inst = generate(&spec).unwrap();
            (inst.mu0_actual, inst.row_space_coherence)
        };
        let (u0, v0) = mu(0.0);
        let (u5, v5) = mu(0.5);
        let (u1, v1) = mu(1.0);
        assert_eq!(u0, u5);
        assert_eq!(u0, u1);
        assert!(v0 < v5 && v5 < v1);
        assert!((v1 - 10.0).abs() < 1e-9);
    }

    #[test]
    fn blockdiag_values_in_range() {
        let inst = gen_blockdiag(12, 12, 3, 2.0, 5).unwrap();
        let a = inst.ground_truth();
        for &x in a.as_slice() {
            assert!(x == 0.0 || (1.0..=2f64.sqrt()).contains(&x));
        }
        assert!(coherence_subspace(inst.column_space()).unwrap() <= 2.0 * (1.0 + 1e-9));
        // columns outside the first n2/mu0 are empty
        for j in 6..12 {
            assert!(a.to_matrix().unwrap().column(j).iter().all(|&x| x == 0.0));
        }
    }
}
