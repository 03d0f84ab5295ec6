use crate::error::{Error, Result};

fn check_finite(data: &[f64]) -> Result<()> {
    match data.iter().position(|x| !x.is_finite()) {
        Some(p) => Err(Error::NonFinite(p)),
        None => Ok(()),
    }
}

/// Dense real matrix stored column-major, so column `j` is the contiguous
/// slice `data[j * n_rows..(j + 1) * n_rows]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n_rows: usize,
    n_cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self { n_rows, n_cols, data: vec![0.0; n_rows * n_cols] }
    }

    pub fn from_col_major(n_rows: usize, n_cols: usize, data: Vec<f64>) -> Result<Self> {
        if n_rows == 0 || n_cols == 0 {
            return Err(Error::InvalidArgument("matrix dimensions must be positive".into()));
        }
        if data.len() != n_rows * n_cols {
            return Err(Error::DimensionMismatch { expected: n_rows * n_cols, found: data.len() });
        }
        check_finite(&data)?;
        Ok(Self { n_rows, n_cols, data })
    }

    /// Builds a matrix from its columns; all columns must share one length.
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let n_rows = columns.first().map(Vec::len).unwrap_or(0);
        let mut data = Vec::with_capacity(n_rows * columns.len());
        for c in columns {
            if c.len() != n_rows {
                return Err(Error::DimensionMismatch { expected: n_rows, found: c.len() });
            }
            data.extend_from_slice(c);
        }
        Self::from_col_major(n_rows, columns.len(), data)
    }

    pub fn from_fn(n_rows: usize, n_cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n_rows * n_cols);
        for j in 0..n_cols {
            for i in 0..n_rows {
                data.push(f(i, j));
            }
        }
        Self { n_rows, n_cols, data }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.n_rows + i]
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[j * self.n_rows + i] = value;
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.data[j * self.n_rows..(j + 1) * self.n_rows]
    }

    pub fn column_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.n_rows..(j + 1) * self.n_rows]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn frobenius_norm_sq(&self) -> f64 {
        super::norm_sq(&self.data)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.frobenius_norm_sq().sqrt()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n_cols, self.n_rows, |i, j| self.get(j, i))
    }

    /// `self * rhs`
    pub fn matmul(&self, rhs: &DenseMatrix) -> Result<Self> {
        if self.n_cols != rhs.n_rows {
            return Err(Error::DimensionMismatch { expected: self.n_cols, found: rhs.n_rows });
        }
        let mut out = Self::zeros(self.n_rows, rhs.n_cols);
        for j in 0..rhs.n_cols {
            let oj = &mut out.data[j * self.n_rows..(j + 1) * self.n_rows];
            for k in 0..self.n_cols {
                let b = rhs.get(k, j);
                if b != 0.0 {
                    super::axpy(b, self.column(k), oj);
                }
            }
        }
        Ok(out)
    }

    pub fn into_tensor(self) -> DenseTensor {
        DenseTensor { dims: vec![self.n_rows, self.n_cols], data: self.data }
    }
}

/// Dense order-`T` tensor in flat storage, first index varying fastest.
///
/// Position `(i_1, …, i_T)` lives at `i_1 + n_1 (i_2 + n_2 (i_3 + …))`. With
/// this layout every mode-`T` subtensor (fixing the last index) occupies one
/// contiguous block, and more generally fixing any trailing run of indices
/// selects a contiguous block. For `T = 2` the layout coincides with
/// [`DenseMatrix`].
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor {
    dims: Vec<usize>,
    data: Vec<f64>,
}

impl DenseTensor {
    pub fn zeros(dims: &[usize]) -> Self {
        let len = dims.iter().product();
        Self { dims: dims.to_vec(), data: vec![0.0; len] }
    }

    pub fn from_vec(dims: &[usize], data: Vec<f64>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::InvalidArgument("tensor dimensions must be positive".into()));
        }
        let len: usize = dims.iter().product();
        if data.len() != len {
            return Err(Error::DimensionMismatch { expected: len, found: data.len() });
        }
        check_finite(&data)?;
        Ok(Self { dims: dims.to_vec(), data })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn order(&self) -> usize {
        self.dims.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn linear_index(&self, index: &[usize]) -> Result<usize> {
        if index.len() != self.dims.len() {
            return Err(Error::DimensionMismatch { expected: self.dims.len(), found: index.len() });
        }
        let mut lin = 0;
        for (&i, &n) in index.iter().zip(&self.dims).rev() {
            if i >= n {
                return Err(Error::OutOfRange { index: i, bound: n });
            }
            lin = lin * n + i;
        }
        Ok(lin)
    }

    pub fn multi_index(&self, mut linear: usize) -> Vec<usize> {
        self.dims
            .iter()
            .map(|&n| {
                let i = linear % n;
                linear /= n;
                i
            })
            .collect()
    }

    pub fn get(&self, index: &[usize]) -> Result<f64> {
        Ok(self.data[self.linear_index(index)?])
    }

    /// Mode-`t` subtensor with coordinate `t` (zero-based) fixed at `i`; the
    /// result has order `T - 1`. Slicing an order-1 tensor yields a single
    /// entry wrapped as a length-1 vector.
    pub fn mode_slice(&self, mode: usize, i: usize) -> Result<DenseTensor> {
        let t = self.dims.len();
        if mode >= t {
            return Err(Error::OutOfRange { index: mode, bound: t });
        }
        if i >= self.dims[mode] {
            return Err(Error::OutOfRange { index: i, bound: self.dims[mode] });
        }
        let inner: usize = self.dims[..mode].iter().product();
        let outer: usize = self.dims[mode + 1..].iter().product();
        let n = self.dims[mode];
        let mut data = Vec::with_capacity(inner * outer);
        for o in 0..outer {
            let base = (o * n + i) * inner;
            data.extend_from_slice(&self.data[base..base + inner]);
        }
        let mut dims: Vec<usize> = self.dims.iter().enumerate().filter(|&(k, _)| k != mode).map(|(_, &d)| d).collect();
        if dims.is_empty() {
            dims.push(1);
        }
        Ok(DenseTensor { dims, data })
    }

    /// Mode-`t` unfolding: an `n_t × ∏_{s≠t} n_s` matrix whose columns are
    /// the mode-`t` fibres.
    pub fn unfold(&self, mode: usize) -> Result<DenseMatrix> {
        let t = self.dims.len();
        if mode >= t {
            return Err(Error::OutOfRange { index: mode, bound: t });
        }
        let n = self.dims[mode];
        let inner: usize = self.dims[..mode].iter().product();
        let outer: usize = self.dims[mode + 1..].iter().product();
        let mut out = DenseMatrix::zeros(n, inner * outer);
        for o in 0..outer {
            for a in 0..inner {
                for i in 0..n {
                    out.set(i, o * inner + a, self.data[(o * n + i) * inner + a]);
                }
            }
        }
        Ok(out)
    }

    /// Views an order-2 tensor as a matrix.
    pub fn to_matrix(&self) -> Result<DenseMatrix> {
        if self.dims.len() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, found: self.dims.len() });
        }
        Ok(DenseMatrix { n_rows: self.dims[0], n_cols: self.dims[1], data: self.data.clone() })
    }

    pub fn frobenius_norm(&self) -> f64 {
        super::norm_sq(&self.data).sqrt()
    }

    /// `‖self − other‖_F²`
    pub fn distance_sq(&self, other: &DenseTensor) -> Result<f64> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch { expected: self.len(), found: other.len() });
        }
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| (a - b) * (a - b)).sum())
    }

    /// `‖self − truth‖_F / ‖truth‖_F`, or the absolute error when `truth`
    /// is zero.
    pub fn relative_error(&self, truth: &DenseTensor) -> Result<f64> {
        let err = self.distance_sq(truth)?.sqrt();
        let scale = truth.frobenius_norm();
        Ok(if scale > 0.0 { err / scale } else { err })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_is_first_index_fastest() {
        let t = DenseTensor::from_vec(&[2, 3, 2], (0..12).map(f64::from).collect()).unwrap();
        assert_eq!(t.get(&[1, 0, 0]).unwrap(), 1.0);
        assert_eq!(t.get(&[0, 1, 0]).unwrap(), 2.0);
        assert_eq!(t.get(&[0, 0, 1]).unwrap(), 6.0);
        assert_eq!(t.multi_index(11), vec![1, 2, 1]);
        let last = t.mode_slice(2, 1).unwrap();
        assert_eq!(last.dims(), &[2, 3]);
        assert_eq!(last.as_slice(), &t.as_slice()[6..12]);
    }

    #[test]
    fn mode_slice_drops_the_fixed_coordinate() {
        let t = DenseTensor::from_vec(&[2, 3, 4], (0..24).map(f64::from).collect()).unwrap();
        let s = t.mode_slice(1, 2).unwrap();
        assert_eq!(s.dims(), &[2, 4]);
        for a in 0..2 {
            for c in 0..4 {
                assert_eq!(s.get(&[a, c]).unwrap(), t.get(&[a, 2, c]).unwrap());
            }
        }
    }

    #[test]
    fn unfold_columns_are_fibres() {
        let t = DenseTensor::from_vec(&[2, 3, 4], (0..24).map(|x| f64::from(x) * 0.5).collect()).unwrap();
        let u = t.unfold(1).unwrap();
        assert_eq!((u.n_rows(), u.n_cols()), (3, 8));
        // fibre (a=1, c=1) is column c * n_0 + a
        assert_eq!(u.get(2, 2 + 1), t.get(&[1, 2, 1]).unwrap());
    }

    #[test]
    fn rejects_non_finite_and_bad_shapes() {
        assert!(matches!(DenseMatrix::from_col_major(2, 2, vec![0.0, f64::NAN, 0.0, 0.0]), Err(Error::NonFinite(1))));
        assert!(DenseMatrix::from_col_major(2, 2, vec![0.0; 3]).is_err());
        assert!(DenseTensor::from_vec(&[2, 0], vec![]).is_err());
    }

    #[test]
    fn matmul_small() {
        let a = DenseMatrix::from_fn(2, 3, |i, j| (i + 2 * j) as f64);
        let b = DenseMatrix::from_fn(3, 1, |i, _| 1.0 + i as f64);
        let c = a.matmul(&b).unwrap();
        assert_eq!(c.get(0, 0), 0.0 + 2.0 * 2.0 + 4.0 * 3.0);
        assert_eq!(c.get(1, 0), 1.0 + 3.0 * 2.0 + 5.0 * 3.0);
    }
}
