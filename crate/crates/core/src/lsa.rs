//! LSA baseline: randomized truncated SVD of the word × document
//! log-count-ratio matrix, with fold-in for unseen documents.

use std::io::Write;

use nalgebra::DMatrix;
use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::corpus::CountMatrix;
use crate::error::{Error, Result};
use crate::features::LogCountRatio;
use crate::scalar::Scalar;
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SvdConfig {
    pub oversample: usize,
    pub power_iters: usize,
    pub seed: u64,
    /// Weight entries by occurrence count instead of presence.
    pub raw_counts: bool,
}

impl Default for SvdConfig {
    fn default() -> Self {
        Self {
            oversample: 10,
            power_iters: 4,
            seed: 1,
            raw_counts: false,
        }
    }
}

/// `X ≈ U diag(S) Vᵀ` with `U: rows × K`, `V: cols × K`, `S` non-increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct SvdFactors<T> {
    pub u: Array2<T>,
    pub s: Vec<T>,
    pub v: Array2<T>,
}

/// Word × document matrix with `X[w, d] = r_w` when word `w` occurs in
/// document `d` (times its count when `raw_counts`). `counts` is documents ×
/// words.
pub fn build_lsa_matrix<T: Scalar>(counts: &CountMatrix, r: &LogCountRatio<T>, raw_counts: bool) -> Result<CsrMatrix<T>> {
    if r.len() != counts.n_ngrams() {
        return Err(Error::LengthMismatch {
            expected: counts.n_ngrams(),
            found: r.len(),
        });
    }
    let docs_by_word = CsrMatrix::from_rows(
        counts.n_ngrams(),
        (0..counts.n_docs()).map(|i| {
            counts
                .row(i)
                .filter(|&(t, _)| r.r[t] != T::zero())
                .map(|(t, c)| {
                    let v = if raw_counts { r.r[t] * T::lit(c as f64) } else { r.r[t] };
                    (t as u32, v)
                })
                .collect::<Vec<_>>()
        }),
    );
    Ok(docs_by_word.transpose())
}

/// Matrix that can be multiplied against dense blocks.
pub trait LinearOperator<T: Scalar> {
    fn shape(&self) -> (usize, usize);
    /// `self · b`
    fn mul_dense(&self, b: &DMatrix<f64>) -> DMatrix<f64>;
    /// `selfᵀ · b`
    fn tmul_dense(&self, b: &DMatrix<f64>) -> DMatrix<f64>;
}

impl<T: Scalar> LinearOperator<T> for CsrMatrix<T> {
    fn shape(&self) -> (usize, usize) {
        (self.n_rows(), self.n_cols())
    }

    fn mul_dense(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.n_rows(), b.ncols());
        for i in 0..self.n_rows() {
            for (j, v) in self.row_iter(i) {
                let v = v.as_f64();
                for c in 0..b.ncols() {
                    out[(i, c)] += v * b[(j, c)];
                }
            }
        }
        out
    }

    fn tmul_dense(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.n_cols(), b.ncols());
        for i in 0..self.n_rows() {
            for (j, v) in self.row_iter(i) {
                let v = v.as_f64();
                for c in 0..b.ncols() {
                    out[(j, c)] += v * b[(i, c)];
                }
            }
        }
        out
    }
}

impl<T: Scalar> LinearOperator<T> for Array2<T> {
    fn shape(&self) -> (usize, usize) {
        self.dim()
    }

    fn mul_dense(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        to_dmatrix(self) * b
    }

    fn tmul_dense(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        to_dmatrix(self).tr_mul(b)
    }
}

fn to_dmatrix<T: Scalar>(a: &Array2<T>) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[[i, j]].as_f64())
}

fn to_array<T: Scalar>(m: &DMatrix<f64>) -> Array2<T> {
    Array2::from_shape_fn((m.nrows(), m.ncols()), |(i, j)| T::lit(m[(i, j)]))
}

fn orthonormal_basis(y: DMatrix<f64>) -> DMatrix<f64> {
    y.qr().q()
}

/// Randomized range finder with `power_iters` subspace iterations, followed
/// by an exact SVD of the projected `(K + oversample) × cols` matrix.
/// Computation runs in `f64` regardless of `T`.
pub fn truncated_svd<T: Scalar, X: LinearOperator<T> + ?Sized>(x: &X, k: usize, config: &SvdConfig) -> Result<SvdFactors<T>> {
    let (rows, cols) = x.shape();
    let max = rows.min(cols);
    if k > max {
        return Err(Error::RankRequestTooLarge { requested: k, max });
    }
    if k == 0 {
        return Ok(SvdFactors {
            u: Array2::zeros((rows, 0)),
            s: Vec::new(),
            v: Array2::zeros((cols, 0)),
        });
    }
    let l = (k + config.oversample).min(max);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let omega = DMatrix::from_fn(cols, l, |_, _| StandardNormal.sample(&mut rng));
    let mut q = orthonormal_basis(x.mul_dense(&omega));
    for _ in 0..config.power_iters {
        let z = orthonormal_basis(x.tmul_dense(&q));
        q = orthonormal_basis(x.mul_dense(&z));
    }
    // B = Qᵀ X, computed as (Xᵀ Q)ᵀ.
    let b = x.tmul_dense(&q).transpose();
    let svd = b.svd(true, true);
    let small_u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested Vᵀ");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]).then(a.cmp(&b)));
    order.truncate(k);

    let full_u = &q * &small_u;
    let mut u = Array2::zeros((rows, k));
    let mut v = Array2::zeros((cols, k));
    let mut s = Vec::with_capacity(k);
    for (dst, &src) in order.iter().enumerate() {
        // Fix signs so the largest-magnitude entry of each u column is positive.
        let col = full_u.column(src);
        let pivot = col.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
        let flip = if pivot < 0.0 { -1.0 } else { 1.0 };
        for i in 0..rows {
            u[[i, dst]] = T::lit(flip * col[i]);
        }
        for j in 0..cols {
            v[[j, dst]] = T::lit(flip * v_t[(src, j)]);
        }
        s.push(T::lit(svd.singular_values[src]));
    }
    Ok(SvdFactors { u, s, v })
}

impl<T: Scalar> SvdFactors<T> {
    pub fn k(&self) -> usize {
        self.s.len()
    }

    /// `U diag(S) Vᵀ`.
    pub fn reconstruct(&self) -> Array2<T> {
        let mut us = self.u.clone();
        for (mut col, &s) in us.columns_mut().into_iter().zip(&self.s) {
            col.mapv_inplace(|v| v * s);
        }
        us.dot(&self.v.t())
    }

    /// Dense text export: `u<i>`, `s`, `v<j>` rows under a `<rows> <K>` header.
    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{} {}", self.u.nrows() + 1 + self.v.nrows(), self.k())?;
        let mut line = |name: String, vals: &mut dyn Iterator<Item = T>| -> Result<()> {
            w.write_all(name.as_bytes())?;
            for v in vals {
                write!(w, " {v}")?;
            }
            writeln!(w)?;
            Ok(())
        };
        for (i, row) in self.u.rows().into_iter().enumerate() {
            line(format!("u{i}"), &mut row.iter().copied())?;
        }
        line("s".into(), &mut self.s.iter().copied())?;
        for (j, row) in self.v.rows().into_iter().enumerate() {
            line(format!("v{j}"), &mut row.iter().copied())?;
        }
        Ok(())
    }
}

/// Training documents in LSA space: rows of `V diag(S)`.
pub fn lsa_document_features<T: Scalar>(factors: &SvdFactors<T>) -> Array2<T> {
    let mut out = factors.v.clone();
    for (mut col, &s) in out.columns_mut().into_iter().zip(&factors.s) {
        col.mapv_inplace(|v| v * s);
    }
    out
}

/// Projects new documents (columns of the word × document matrix `x`) onto
/// the factor space: `xᵀ U`, which equals `V diag(S)` for training columns.
pub fn fold_in<T: Scalar>(factors: &SvdFactors<T>, x: &CsrMatrix<T>) -> Result<Array2<T>> {
    if x.n_rows() != factors.u.nrows() {
        return Err(Error::DimensionMismatch {
            expected: factors.u.nrows(),
            found: x.n_rows(),
        });
    }
    let u = to_dmatrix(&factors.u);
    Ok(to_array(&LinearOperator::<T>::tmul_dense(x, &u)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn exact() -> SvdConfig {
        SvdConfig {
            oversample: 50,
            power_iters: 2,
            ..SvdConfig::default()
        }
    }

    #[test]
    fn diagonal_singular_values() {
        let x = array![[3.0, 0.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, 1.0]];
        let f = truncated_svd::<f64, _>(&x, 2, &exact()).unwrap();
        assert!((f.s[0] - 3.0).abs() < 1e-12 && (f.s[1] - 2.0).abs() < 1e-12);
        let feats = lsa_document_features(&f);
        assert!((feats[[0, 0]] - 3.0).abs() < 1e-12);
        assert!((feats[[1, 1]] - 2.0).abs() < 1e-12);
        assert!(feats[[2, 0]].abs() < 1e-12 && feats[[2, 1]].abs() < 1e-12);
    }

    #[test]
    fn rank_request_too_large() {
        let x = array![[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]];
        assert!(matches!(
            truncated_svd::<f64, _>(&x, 3, &exact()),
            Err(Error::RankRequestTooLarge { requested: 3, max: 2 })
        ));
    }

    #[test]
    fn toy_matrix_and_exact_factorization() {
        let counts = CountMatrix::from_dense_rows(2, &[vec![2, 0], vec![0, 1]]);
        let r = crate::features::log_count_ratio::<f64>(&counts, &[1, -1]).unwrap();
        let x = build_lsa_matrix(&counts, &r, false).unwrap();
        let dense = x.to_dense();
        assert_eq!(dense, array![[r.r[0], 0.0], [0.0, r.r[1]]]);
        let f = truncated_svd::<f64, _>(&x, 2, &exact()).unwrap();
        let rec = f.reconstruct();
        for (a, b) in rec.iter().zip(dense.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
        let raw = build_lsa_matrix(&counts, &r, true).unwrap().to_dense();
        assert_eq!(raw[[0, 0]], 2.0 * r.r[0]);
    }

    #[test]
    fn fold_in_matches_training_features() {
        let x = array![[1.0, 0.0, 2.0, 0.5], [0.0, 3.0, 1.0, 0.0], [2.0, 1.0, 0.0, 1.0]];
        let f = truncated_svd::<f64, _>(&x, 3, &exact()).unwrap();
        let folded = fold_in(&f, &crate::features::dense_to_csr(&x)).unwrap();
        let train = lsa_document_features(&f);
        for (a, b) in folded.iter().zip(train.iter()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_ratio_gives_empty_matrix() {
        let counts = CountMatrix::from_dense_rows(2, &[vec![2, 1]]);
        let r = LogCountRatio {
            r: vec![0.0, 0.0],
            p: vec![1.0; 2],
            q: vec![1.0; 2],
        };
        assert_eq!(build_lsa_matrix(&counts, &r, false).unwrap().nnz(), 0);
    }
}
