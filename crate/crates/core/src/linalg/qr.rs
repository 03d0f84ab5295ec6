//! Householder QR of a tall, column-major matrix, kept in compact form.

/// Compact Householder factorisation `A = QR` of an `m × d` matrix with
/// `m ≥ d`. Reflector `k` is `I − τ_k w_k w_kᵀ` with `w_k = (0,…,0,1,v_k)`;
/// the `v_k` live below the diagonal of `factors`.
#[derive(Debug, Clone)]
pub(crate) struct HouseholderQr {
    rows: usize,
    cols: usize,
    factors: Vec<f64>,
    tau: Vec<f64>,
    diag: Vec<f64>,
}

impl HouseholderQr {
    pub(crate) fn new(rows: usize, cols: usize, mut a: Vec<f64>) -> Self {
        debug_assert!(rows >= cols && a.len() == rows * cols);
        let mut tau = vec![0.0; cols];
        let mut diag = vec![0.0; cols];
        for k in 0..cols {
            let (head, tail) = a.split_at_mut((k + 1) * rows);
            let col = &mut head[k * rows..];
            let x = &mut col[k..];
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm == 0.0 {
                continue;
            }
            let x0 = x[0];
            let beta = if x0 >= 0.0 { -norm } else { norm };
            let v0 = x0 - beta;
            for xi in x[1..].iter_mut() {
                *xi /= v0;
            }
            x[0] = 1.0;
            let t = (beta - x0) / beta;
            tau[k] = t;
            diag[k] = beta;
            let w = &col[k..];
            for j in 0..cols - k - 1 {
                let cj = &mut tail[j * rows + k..(j + 1) * rows];
                let s: f64 = w.iter().zip(cj.iter()).map(|(a, b)| a * b).sum::<f64>() * t;
                for (c, wi) in cj.iter_mut().zip(w) {
                    *c -= s * wi;
                }
            }
        }
        Self { rows, cols, factors: a, tau, diag }
    }

    pub(crate) fn cols(&self) -> usize {
        self.cols
    }

    /// Magnitudes of the diagonal of `R`.
    pub(crate) fn diag_abs(&self) -> impl Iterator<Item = f64> + '_ {
        self.diag.iter().map(|d| d.abs())
    }

    /// `y ← Qᵀ y`
    pub(crate) fn apply_qt(&self, y: &mut [f64]) {
        debug_assert_eq!(y.len(), self.rows);
        for k in 0..self.cols {
            let t = self.tau[k];
            if t == 0.0 {
                continue;
            }
            let v = &self.factors[k * self.rows + k + 1..(k + 1) * self.rows];
            let tail = &y[k + 1..];
            let s = (y[k] + v.iter().zip(tail).map(|(a, b)| a * b).sum::<f64>()) * t;
            y[k] -= s;
            for (yi, vi) in y[k + 1..].iter_mut().zip(v) {
                *yi -= s * vi;
            }
        }
    }

    /// Solves `R x = b` for the leading `d` entries of `b`.
    pub(crate) fn solve_r(&self, b: &[f64]) -> Vec<f64> {
        let d = self.cols;
        let mut x = b[..d].to_vec();
        for k in (0..d).rev() {
            let mut s = x[k];
            for j in k + 1..d {
                s -= self.r(k, j) * x[j];
            }
            x[k] = s / self.diag[k];
        }
        x
    }

    fn r(&self, i: usize, j: usize) -> f64 {
        if i == j {
            self.diag[i]
        } else {
            self.factors[j * self.rows + i]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn least_squares_matches_hand_solution() {
        // A = [[1,0],[1,1],[1,2]] (column major), b = (1,2,4)
        let a = vec![1.0, 1.0, 1.0, 0.0, 1.0, 2.0];
        let qr = HouseholderQr::new(3, 2, a);
        let mut y = vec![1.0, 2.0, 4.0];
        qr.apply_qt(&mut y);
        let x = qr.solve_r(&y);
        // normal equations: [[3,3],[3,5]] x = [7,10] -> x = (5/6, 3/2)
        assert!((x[0] - 5.0 / 6.0).abs() < 1e-14);
        assert!((x[1] - 1.5).abs() < 1e-14);
        // residual² = ‖b‖² − ‖Q₁ᵀb‖², equals y[2]²
        let resid: f64 = [1.0 - 5.0 / 6.0, 2.0 - (5.0 / 6.0 + 1.5), 4.0 - (5.0 / 6.0 + 3.0)].iter().map(|r| r * r).sum();
        assert!((y[2] * y[2] - resid).abs() < 1e-14);
    }
}
