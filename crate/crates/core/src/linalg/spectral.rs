//! Small dense spectral routines for evaluation code (best rank-r error,
//! truncation of a selected-column basis, extreme eigenvalues in the
//! concentration experiments). Not a general-purpose SVD.

use super::{dot, DenseMatrix};

/// Thin SVD by one-sided Jacobi rotations on the columns of `a`.
///
/// Returns `(singular values, left singular vectors)` sorted by decreasing
/// singular value. Left vectors for zero singular values are zero.
pub(crate) fn svd_left(a: &DenseMatrix) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.n_cols();
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| a.column(j).to_vec()).collect();
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = dot(&cols[p], &cols[p]);
                let beta = dot(&cols[q], &cols[q]);
                let gamma = dot(&cols[p], &cols[q]);
                if gamma == 0.0 || gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (lo, hi) = cols.split_at_mut(q);
                for (x, y) in lo[p].iter_mut().zip(hi[0].iter_mut()) {
                    let (xp, yq) = (*x, *y);
                    *x = c * xp - s * yq;
                    *y = s * xp + c * yq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut pairs: Vec<(f64, Vec<f64>)> = cols
        .into_iter()
        .map(|mut c| {
            let s = dot(&c, &c).sqrt();
            if s > 0.0 {
                c.iter_mut().for_each(|x| *x /= s);
            }
            (s, c)
        })
        .collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    pairs.into_iter().unzip()
}

pub(crate) fn singular_values(a: &DenseMatrix) -> Vec<f64> {
    svd_left(a).0
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi, ascending.
pub(crate) fn symmetric_eigenvalues(a: &DenseMatrix) -> Vec<f64> {
    let n = a.n_rows();
    debug_assert_eq!(n, a.n_cols());
    let mut m: Vec<f64> = a.as_slice().to_vec();
    let at = |m: &[f64], i: usize, j: usize| m[j * n + i];
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| at(&m, i, j).powi(2)).sum();
        let diag: f64 = (0..n).map(|i| at(&m, i, i).powi(2)).sum();
        if off <= 1e-30 * diag.max(f64::MIN_POSITIVE) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = at(&m, p, q);
                if apq == 0.0 {
                    continue;
                }
                let theta = (at(&m, q, q) - at(&m, p, p)) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (at(&m, k, p), at(&m, k, q));
                    m[p * n + k] = c * mkp - s * mkq;
                    m[q * n + k] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (at(&m, p, k), at(&m, q, k));
                    m[k * n + p] = c * mpk - s * mqk;
                    m[k * n + q] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| at(&m, i, i)).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn random(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DenseMatrix {
        DenseMatrix::from_fn(r, c, |_, _| rng.sample(StandardNormal))
    }

    #[test]
    fn singular_values_match_nalgebra() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for &(r, c) in &[(6, 4), (4, 6), (10, 10)] {
            let a = random(&mut rng, r, c);
            let ours = singular_values(&a);
            let na = DMatrix::from_column_slice(r, c, a.as_slice());
            let mut theirs: Vec<f64> = na.singular_values().iter().copied().collect();
            theirs.sort_by(|x, y| y.total_cmp(x));
            for (k, t) in theirs.iter().enumerate() {
                assert!((ours[k] - t).abs() < 1e-10, "{ours:?} vs {theirs:?}");
            }
            assert!(ours[theirs.len()..].iter().all(|s| s.abs() < 1e-10));
        }
    }

    #[test]
    fn eigenvalues_match_nalgebra() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let b = random(&mut rng, 7, 5);
        let g = b.transpose().matmul(&b).unwrap();
        let ours = symmetric_eigenvalues(&g);
        let mut theirs: Vec<f64> = DMatrix::from_column_slice(5, 5, g.as_slice()).symmetric_eigenvalues().iter().copied().collect();
        theirs.sort_by(f64::total_cmp);
        for (a, t) in ours.iter().zip(&theirs) {
            assert!((a - t).abs() < 1e-10);
        }
    }
}
