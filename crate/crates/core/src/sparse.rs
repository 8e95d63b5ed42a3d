//! Compressed sparse row storage and the row-access trait the SVM trains on.

use ndarray::Array2;

use crate::scalar::{self, Scalar};

/// Row-major sparse matrix. Column indices within a row are strictly
/// ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix<V> {
    n_cols: usize,
    indptr: Vec<usize>,
    indices: Vec<u32>,
    values: Vec<V>,
}

impl<V: Copy> CsrMatrix<V> {
    pub fn empty(n_cols: usize) -> Self {
        Self {
            n_cols,
            indptr: vec![0],
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Appends a row. Entries must be sorted by column and in range.
    pub fn push_row(&mut self, entries: impl IntoIterator<Item = (u32, V)>) {
        let start = self.indices.len();
        for (c, v) in entries {
            debug_assert!((c as usize) < self.n_cols);
            debug_assert!(self.indices.len() == start || *self.indices.last().unwrap() < c);
            self.indices.push(c);
            self.values.push(v);
        }
        self.indptr.push(self.indices.len());
    }

    pub fn from_rows<I, R>(n_cols: usize, rows: I) -> Self
    where
        I: IntoIterator<Item = R>,
        R: IntoIterator<Item = (u32, V)>,
    {
        let mut m = Self::empty(n_cols);
        for row in rows {
            m.push_row(row);
        }
        m
    }

    #[inline]
    pub fn n_rows(&self) -> usize {
        self.indptr.len() - 1
    }

    #[inline]
    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    #[inline]
    pub fn row(&self, i: usize) -> (&[u32], &[V]) {
        let (a, b) = (self.indptr[i], self.indptr[i + 1]);
        (&self.indices[a..b], &self.values[a..b])
    }

    pub fn row_iter(&self, i: usize) -> impl Iterator<Item = (usize, V)> + '_ {
        let (idx, val) = self.row(i);
        idx.iter().zip(val).map(|(&c, &v)| (c as usize, v))
    }

    /// Value at `(i, j)`, `None` when not stored.
    pub fn get(&self, i: usize, j: usize) -> Option<V> {
        let (idx, val) = self.row(i);
        idx.binary_search(&(j as u32)).ok().map(|p| val[p])
    }

    pub fn map<W: Copy>(&self, mut f: impl FnMut(usize, V) -> W) -> CsrMatrix<W> {
        CsrMatrix {
            n_cols: self.n_cols,
            indptr: self.indptr.clone(),
            indices: self.indices.clone(),
            values: self.indices.iter().zip(&self.values).map(|(&c, &v)| f(c as usize, v)).collect(),
        }
    }

    /// New matrix holding the listed rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let mut m = Self::empty(self.n_cols);
        for &r in rows {
            let (idx, val) = self.row(r);
            m.push_row(idx.iter().copied().zip(val.iter().copied()));
        }
        m
    }

    /// Transpose, keeping ascending order within rows.
    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.n_cols + 1];
        for &c in &self.indices {
            counts[c as usize + 1] += 1;
        }
        for j in 0..self.n_cols {
            counts[j + 1] += counts[j];
        }
        let indptr = counts.clone();
        let mut next = counts;
        let mut indices = vec![0u32; self.nnz()];
        let mut values: Vec<Option<V>> = vec![None; self.nnz()];
        for i in 0..self.n_rows() {
            let (idx, val) = self.row(i);
            for (&c, &v) in idx.iter().zip(val) {
                let p = next[c as usize];
                indices[p] = i as u32;
                values[p] = Some(v);
                next[c as usize] += 1;
            }
        }
        CsrMatrix {
            n_cols: self.n_rows(),
            indptr,
            indices,
            values: values.into_iter().map(|v| v.expect("filled")).collect(),
        }
    }
}

impl<T: Scalar> CsrMatrix<T> {
    pub fn to_dense(&self) -> Array2<T> {
        let mut out = Array2::zeros((self.n_rows(), self.n_cols));
        for i in 0..self.n_rows() {
            for (j, v) in self.row_iter(i) {
                out[[i, j]] = v;
            }
        }
        out
    }
}

/// Read access to the rows of a feature matrix, dense or sparse.
pub trait FeatureRows<T: Scalar>: Sync {
    fn n_rows(&self) -> usize;
    fn n_cols(&self) -> usize;
    /// `x_i · w`
    fn row_dot(&self, i: usize, w: &[T]) -> T;
    /// `w += alpha * x_i`
    fn row_axpy(&self, i: usize, alpha: T, w: &mut [T]);
    fn row_sq_norm(&self, i: usize) -> T;
    /// First stored entry that is NaN or infinite.
    fn find_non_finite(&self) -> Option<(usize, usize)>;
}

impl<T: Scalar> FeatureRows<T> for CsrMatrix<T> {
    fn n_rows(&self) -> usize {
        CsrMatrix::n_rows(self)
    }

    fn n_cols(&self) -> usize {
        self.n_cols
    }

    #[inline]
    fn row_dot(&self, i: usize, w: &[T]) -> T {
        let (idx, val) = self.row(i);
        idx.iter().zip(val).fold(T::zero(), |acc, (&c, &v)| acc + v * w[c as usize])
    }

    #[inline]
    fn row_axpy(&self, i: usize, alpha: T, w: &mut [T]) {
        let (idx, val) = self.row(i);
        for (&c, &v) in idx.iter().zip(val) {
            w[c as usize] += alpha * v;
        }
    }

    fn row_sq_norm(&self, i: usize) -> T {
        self.row(i).1.iter().fold(T::zero(), |acc, &v| acc + v * v)
    }

    fn find_non_finite(&self) -> Option<(usize, usize)> {
        (0..CsrMatrix::n_rows(self)).find_map(|i| self.row_iter(i).find(|(_, v)| !v.is_finite()).map(|(j, _)| (i, j)))
    }
}

impl<T: Scalar> FeatureRows<T> for Array2<T> {
    fn n_rows(&self) -> usize {
        self.nrows()
    }

    fn n_cols(&self) -> usize {
        self.ncols()
    }

    #[inline]
    fn row_dot(&self, i: usize, w: &[T]) -> T {
        match self.row(i).as_slice() {
            Some(r) => scalar::dot(r, w),
            None => self.row(i).iter().zip(w).fold(T::zero(), |a, (&x, &y)| a + x * y),
        }
    }

    #[inline]
    fn row_axpy(&self, i: usize, alpha: T, w: &mut [T]) {
        for (wj, &x) in w.iter_mut().zip(self.row(i).iter()) {
            *wj += alpha * x;
        }
    }

    fn row_sq_norm(&self, i: usize) -> T {
        self.row(i).iter().fold(T::zero(), |a, &x| a + x * x)
    }

    fn find_non_finite(&self) -> Option<(usize, usize)> {
        self.indexed_iter().find(|(_, v)| !v.is_finite()).map(|(ij, _)| ij)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> CsrMatrix<f64> {
        CsrMatrix::from_rows(3, vec![vec![(0, 1.0), (2, 2.0)], vec![], vec![(1, -1.0)]])
    }

    #[test]
    fn transpose_twice_is_identity() {
        let m = sample();
        let t = m.transpose();
        assert_eq!(t.n_rows(), 3);
        assert_eq!(t.get(2, 0), Some(2.0));
        assert_eq!(t.transpose(), m);
    }

    #[test]
    fn dense_and_sparse_rows_agree() {
        let m = sample();
        let d = m.to_dense();
        let w = [0.5, -2.0, 3.0];
        for i in 0..3 {
            assert_eq!(FeatureRows::row_dot(&m, i, &w), FeatureRows::row_dot(&d, i, &w));
            assert_eq!(FeatureRows::row_sq_norm(&m, i), FeatureRows::row_sq_norm(&d, i));
        }
    }
}
