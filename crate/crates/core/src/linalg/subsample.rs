use super::qr::HouseholderQr;
use super::{norm_sq, IndexSet, OrthonormalBasis};
use crate::error::{Error, Result};

/// `U_Ω` is rank deficient when its smallest `|R_kk|` falls below this
/// fraction of its largest.
pub const RANK_DEFICIENCY_TOL: f64 = 1e-12;

/// Least-squares projector onto the columns of the row-subsampled basis
/// matrix `U_Ω`, backed by a Householder factorisation.
///
/// `U_Ω` is generally not orthonormal; the projector realises
/// `𝒫_{U_Ω} = U_Ω (U_ΩᵀU_Ω)⁻¹ U_Ωᵀ` without forming the normal equations.
#[derive(Debug, Clone)]
pub struct SubsampledProjector {
    rows: usize,
    qr: Option<HouseholderQr>,
}

impl SubsampledProjector {
    pub fn new(basis: &OrthonormalBasis, omega: &IndexSet) -> Result<Self> {
        if omega.ambient_dim() != basis.ambient_dim() {
            return Err(Error::DimensionMismatch { expected: basis.ambient_dim(), found: omega.ambient_dim() });
        }
        let rows = omega.len();
        let d = basis.dim();
        if d == 0 {
            return Ok(Self { rows, qr: None });
        }
        if rows < d {
            return Err(Error::RankDeficient { rows, cols: d });
        }
        let mut a = Vec::with_capacity(rows * d);
        for u in basis.vectors() {
            a.extend(omega.indices().iter().map(|&i| u[i]));
        }
        let qr = HouseholderQr::new(rows, d, a);
        let (lo, hi) = qr.diag_abs().fold((f64::INFINITY, 0.0f64), |(lo, hi), x| (lo.min(x), hi.max(x)));
        if !(hi > 0.0) || lo < RANK_DEFICIENCY_TOL * hi {
            return Err(Error::RankDeficient { rows, cols: d });
        }
        Ok(Self { rows, qr: Some(qr) })
    }

    pub fn basis_dim(&self) -> usize {
        self.qr.as_ref().map_or(0, HouseholderQr::cols)
    }

    fn check(&self, v_omega: &[f64]) -> Result<()> {
        if v_omega.len() != self.rows {
            return Err(Error::DimensionMismatch { expected: self.rows, found: v_omega.len() });
        }
        Ok(())
    }

    /// `‖v_Ω − 𝒫_{U_Ω} v_Ω‖₂²`
    pub fn residual_energy(&self, v_omega: &[f64]) -> Result<f64> {
        self.check(v_omega)?;
        Ok(match &self.qr {
            None => norm_sq(v_omega),
            Some(qr) => {
                let mut y = v_omega.to_vec();
                qr.apply_qt(&mut y);
                norm_sq(&y[qr.cols()..])
            }
        })
    }

    /// Least-squares coefficients `(U_ΩᵀU_Ω)⁻¹ U_Ωᵀ v_Ω`.
    pub fn coefficients(&self, v_omega: &[f64]) -> Result<Vec<f64>> {
        self.check(v_omega)?;
        Ok(match &self.qr {
            None => Vec::new(),
            Some(qr) => {
                let mut y = v_omega.to_vec();
                qr.apply_qt(&mut y);
                qr.solve_r(&y)
            }
        })
    }

    /// Residual energy and coefficients from a single application of `Qᵀ`.
    pub fn solve(&self, v_omega: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.check(v_omega)?;
        Ok(match &self.qr {
            None => (norm_sq(v_omega), Vec::new()),
            Some(qr) => {
                let mut y = v_omega.to_vec();
                qr.apply_qt(&mut y);
                (norm_sq(&y[qr.cols()..]), qr.solve_r(&y))
            }
        })
    }
}

/// `‖v_Ω − 𝒫_{U_Ω} v_Ω‖₂²` for the row-subsampled basis `U_Ω`.
///
/// The projection is onto the column span of `U_Ω`, which stays well defined
/// when `U_Ω` loses rank: columns that are dependent to within
/// [`RANK_DEFICIENCY_TOL`] are skipped. Use [`SubsampledProjector`] when a
/// rank-deficient `U_Ω` must be reported instead.
pub fn subsampled_residual_energy(basis: &OrthonormalBasis, omega: &IndexSet, v_omega: &[f64]) -> Result<f64> {
    if omega.ambient_dim() != basis.ambient_dim() {
        return Err(Error::DimensionMismatch { expected: basis.ambient_dim(), found: omega.ambient_dim() });
    }
    if v_omega.len() != omega.len() {
        return Err(Error::DimensionMismatch { expected: omega.len(), found: v_omega.len() });
    }
    if let Ok(p) = SubsampledProjector::new(basis, omega) {
        return p.residual_energy(v_omega);
    }
    let mut span = OrthonormalBasis::empty(omega.len());
    for u in basis.vectors() {
        span.extend(&omega.gather(u)?, RANK_DEFICIENCY_TOL)?;
    }
    Ok(norm_sq(&span.residual(v_omega)?))
}

/// `U (U_ΩᵀU_Ω)⁻¹ U_Ωᵀ v_Ω`: the full-length vector in `span(U)` whose
/// restriction to `Ω` best fits `v_Ω`.
pub fn reconstruct_from_subsample(basis: &OrthonormalBasis, omega: &IndexSet, v_omega: &[f64]) -> Result<Vec<f64>> {
    let coef = SubsampledProjector::new(basis, omega)?.coefficients(v_omega)?;
    basis.combine(&coef)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{orthonormalize, SamplingMode, DEFAULT_DROP_TOL};
    use nalgebra::{DMatrix, DVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn random_basis(rng: &mut ChaCha8Rng, n: usize, d: usize) -> OrthonormalBasis {
        let vs: Vec<Vec<f64>> = (0..d).map(|_| (0..n).map(|_| rng.sample(StandardNormal)).collect()).collect();
        orthonormalize(&vs, DEFAULT_DROP_TOL).unwrap()
    }

    fn random_omega(rng: &mut ChaCha8Rng, n: usize, m: usize) -> IndexSet {
        IndexSet::new(n, (0..m).map(|_| rng.random_range(0..n)).collect(), SamplingMode::WithReplacement(m)).unwrap()
    }

    /// Normal-equation oracle: forms U_Ω densely and solves
    /// (U_ΩᵀU_Ω) c = U_Ωᵀ v_Ω with nalgebra.
    fn normal_equation_oracle(basis: &OrthonormalBasis, omega: &IndexSet, v_omega: &[f64]) -> (f64, Vec<f64>) {
        let rows = omega.len();
        let d = basis.dim();
        let u = DMatrix::from_fn(rows, d, |i, k| basis.vectors()[k][omega.indices()[i]]);
        let v = DVector::from_column_slice(v_omega);
        let gram = u.transpose() * &u;
        let c = gram.lu().solve(&(u.transpose() * &v)).unwrap();
        let resid = (&v - &u * &c).norm_squared();
        let full = DMatrix::from_fn(basis.ambient_dim(), d, |i, k| basis.vectors()[k][i]) * c;
        (resid, full.iter().copied().collect())
    }

    #[test]
    fn empty_basis_keeps_all_energy() {
        let b = OrthonormalBasis::empty(4);
        let omega = IndexSet::new(4, vec![0, 2], SamplingMode::WithReplacement(2)).unwrap();
        assert_eq!(subsampled_residual_energy(&b, &omega, &[3.0, 4.0]).unwrap(), 25.0);
        assert_eq!(reconstruct_from_subsample(&b, &omega, &[3.0, 4.0]).unwrap(), vec![0.0; 4]);
    }

    #[test]
    fn coordinate_example() {
        // basis {e1, e2} in R^4, Ω = {1,3,4} (one-based), v = (1, *, 2, 3)
        let b = orthonormalize(&[vec![1.0, 0.0, 0.0, 0.0], vec![0.0, 1.0, 0.0, 0.0]], DEFAULT_DROP_TOL).unwrap();
        let omega = IndexSet::new(4, vec![0, 2, 3], SamplingMode::WithReplacement(3)).unwrap();
        let v_omega = [1.0, 2.0, 3.0];
        // U_Ω = [[1,0],[0,0],[0,0]]: its span is e1, so the residual is 2² + 3².
        let r = subsampled_residual_energy(&b, &omega, &v_omega).unwrap();
        assert!((r - 13.0).abs() < 1e-12);
        // brute force: least squares on the nonzero column of U_Ω
        let b1 = orthonormalize(&[vec![1.0, 0.0, 0.0, 0.0]], DEFAULT_DROP_TOL).unwrap();
        let (oracle, _) = normal_equation_oracle(&b1, &omega, &v_omega);
        assert!((oracle - 13.0).abs() < 1e-12);
        // the strict projector refuses the rank-deficient U_Ω
        assert!(matches!(SubsampledProjector::new(&b, &omega), Err(Error::RankDeficient { .. })));
        assert!(matches!(reconstruct_from_subsample(&b, &omega, &v_omega), Err(Error::RankDeficient { .. })));
    }

    #[test]
    fn too_few_rows_is_rank_deficient() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let b = random_basis(&mut rng, 10, 3);
        let omega = random_omega(&mut rng, 10, 2);
        assert!(matches!(SubsampledProjector::new(&b, &omega), Err(Error::RankDeficient { rows: 2, cols: 3 })));
        let dup = IndexSet::new(10, vec![1, 1, 1, 4], SamplingMode::WithReplacement(4)).unwrap();
        assert!(matches!(SubsampledProjector::new(&b, &dup), Err(Error::RankDeficient { .. })));
    }

    #[test]
    fn in_span_vectors_have_zero_residual_and_exact_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (n, d) = (20, 3);
        for _ in 0..100 {
            let b = random_basis(&mut rng, n, d);
            let alpha: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
            let mut v = b.combine(&alpha).unwrap();
            let scale = norm_sq(&v).sqrt();
            v.iter_mut().for_each(|x| *x /= scale);
            let omega = random_omega(&mut rng, n, 10);
            let v_omega = omega.gather(&v).unwrap();
            let p = match SubsampledProjector::new(&b, &omega) {
                Ok(p) => p,
                Err(Error::RankDeficient { .. }) => continue,
                Err(e) => panic!("{e}"),
            };
            assert!(p.residual_energy(&v_omega).unwrap() <= 1e-18);
            let rec = b.combine(&p.coefficients(&v_omega).unwrap()).unwrap();
            let err: f64 = rec.iter().zip(&v).map(|(a, c)| (a - c) * (a - c)).sum::<f64>().sqrt();
            assert!(err <= 1e-10, "reconstruction error {err}");
            let (_, oracle) = normal_equation_oracle(&b, &omega, &v_omega);
            assert!(rec.iter().zip(&oracle).all(|(a, c)| (a - c).abs() <= 1e-10));
        }
    }

    #[test]
    fn full_index_set_matches_dense_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let b = random_basis(&mut rng, 15, 4);
            let v: Vec<f64> = (0..15).map(|_| rng.sample(StandardNormal)).collect();
            let full = IndexSet::full(15);
            let sub = subsampled_residual_energy(&b, &full, &v).unwrap();
            let dense = norm_sq(&b.residual(&v).unwrap());
            assert!((sub - dense).abs() <= 1e-10 * dense);
        }
    }

    #[test]
    fn generic_residual_matches_normal_equations() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let b = random_basis(&mut rng, 20, 3);
            let omega = random_omega(&mut rng, 20, 10);
            let v_omega: Vec<f64> = (0..10).map(|_| rng.sample(StandardNormal)).collect();
            let Ok(p) = SubsampledProjector::new(&b, &omega) else { continue };
            let (r, c) = p.solve(&v_omega).unwrap();
            let (ro, full) = normal_equation_oracle(&b, &omega, &v_omega);
            assert!((r - ro).abs() <= 1e-10 * ro.max(1.0));
            let rec = b.combine(&c).unwrap();
            assert!(rec.iter().zip(&full).all(|(a, o)| (a - o).abs() <= 1e-10));
        }
    }
}
