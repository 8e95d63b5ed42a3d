//! Naive-Bayes log-count ratios and the document representations built on
//! them: per-concept max-|r| features, per-concept frequencies, and the
//! binarized bag-of-words baseline.

use std::io::{BufRead, Write};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::clustering::Assignment;
use crate::corpus::CountMatrix;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sparse::CsrMatrix;

/// Smoothed class counts `p`, `q` and `r = ln((p/‖p‖₁) / (q/‖q‖₁))`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogCountRatio<T> {
    pub r: Vec<T>,
    pub p: Vec<T>,
    pub q: Vec<T>,
}

impl<T: Scalar> LogCountRatio<T> {
    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    /// Appends `extra` columns with `r = 0` (n-grams never seen in training).
    pub fn padded(&self, extra: usize) -> Self {
        let pad = |v: &[T], fill: T| v.iter().copied().chain(std::iter::repeat_n(fill, extra)).collect();
        Self {
            r: pad(&self.r, T::zero()),
            p: pad(&self.p, T::one()),
            q: pad(&self.q, T::one()),
        }
    }

    /// Largest `|r_t|`.
    pub fn max_abs(&self) -> T {
        self.r.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }
}

/// Computes `r` from the rows of `counts` with label +1 or -1; rows labeled
/// 0 are ignored.
pub fn log_count_ratio<T: Scalar>(counts: &CountMatrix, labels: &[i8]) -> Result<LogCountRatio<T>> {
    if labels.len() != counts.n_docs() {
        return Err(Error::LengthMismatch {
            expected: counts.n_docs(),
            found: labels.len(),
        });
    }
    if !labels.contains(&1) || !labels.contains(&-1) {
        return Err(Error::SingleClass);
    }
    let n = counts.n_ngrams();
    let mut p = vec![1.0f64; n];
    let mut q = vec![1.0f64; n];
    for (i, &y) in labels.iter().enumerate() {
        let target = match y {
            1 => &mut p,
            -1 => &mut q,
            _ => continue,
        };
        for (t, c) in counts.row(i) {
            target[t] += c as f64;
        }
    }
    let p_norm: f64 = p.iter().sum();
    let q_norm: f64 = q.iter().sum();
    let r = p
        .iter()
        .zip(&q)
        // Difference of logs so that swapping the classes negates r exactly.
        .map(|(&pt, &qt)| T::lit((pt / p_norm).ln() - (qt / q_norm).ln()))
        .collect();
    Ok(LogCountRatio {
        r,
        p: p.into_iter().map(T::lit).collect(),
        q: q.into_iter().map(T::lit).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConceptMode {
    Frequency,
    NbMax,
}

/// `L × K` document representation.
#[derive(Debug, Clone, PartialEq)]
pub struct ConceptFeatures<T> {
    pub matrix: Array2<T>,
    pub mode: ConceptMode,
}

fn check_assignment(counts: &CountMatrix, assignment: &Assignment, k: usize) -> Result<()> {
    if assignment.len() != counts.n_ngrams() {
        return Err(Error::LengthMismatch {
            expected: counts.n_ngrams(),
            found: assignment.len(),
        });
    }
    if let Some(&bad) = assignment.labels.iter().find(|&&l| l as usize >= k) {
        return Err(Error::LengthMismatch {
            expected: k,
            found: bad as usize + 1,
        });
    }
    Ok(())
}

/// For each document and cluster, the signed `r_t` of largest magnitude among
/// the cluster's n-grams present in the document (0 if none; ties keep the
/// smallest `t`).
pub fn concept_features_nb<T: Scalar>(
    counts: &CountMatrix,
    assignment: &Assignment,
    r: &LogCountRatio<T>,
    k: usize,
) -> Result<ConceptFeatures<T>> {
    check_assignment(counts, assignment, k)?;
    if r.len() != counts.n_ngrams() {
        return Err(Error::LengthMismatch {
            expected: counts.n_ngrams(),
            found: r.len(),
        });
    }
    let mut matrix: Array2<T> = Array2::zeros((counts.n_docs(), k));
    for (i, mut out) in matrix.rows_mut().into_iter().enumerate() {
        // Rows are sorted by t, so a strict comparison keeps the smallest index.
        for (t, _) in counts.row(i) {
            let c = assignment.labels[t] as usize;
            if r.r[t].abs() > out[c].abs() {
                out[c] = r.r[t];
            }
        }
    }
    Ok(ConceptFeatures {
        matrix,
        mode: ConceptMode::NbMax,
    })
}

/// Number of n-gram occurrences from each cluster.
pub fn concept_features_freq<T: Scalar>(counts: &CountMatrix, assignment: &Assignment, k: usize) -> Result<ConceptFeatures<T>> {
    check_assignment(counts, assignment, k)?;
    let mut matrix = Array2::zeros((counts.n_docs(), k));
    for (i, mut out) in matrix.rows_mut().into_iter().enumerate() {
        for (t, c) in counts.row(i) {
            out[assignment.labels[t] as usize] += T::lit(c as f64);
        }
    }
    Ok(ConceptFeatures {
        matrix,
        mode: ConceptMode::Frequency,
    })
}

/// Presence-binarized counts scaled by `r`. Entries whose `r_t` is exactly 0
/// are not stored.
pub fn bow_nb_features<T: Scalar>(counts: &CountMatrix, r: &LogCountRatio<T>) -> Result<CsrMatrix<T>> {
    if r.len() != counts.n_ngrams() {
        return Err(Error::LengthMismatch {
            expected: counts.n_ngrams(),
            found: r.len(),
        });
    }
    Ok(CsrMatrix::from_rows(
        counts.n_ngrams(),
        (0..counts.n_docs()).map(|i| {
            counts
                .row(i)
                .filter(|&(t, _)| r.r[t] != T::zero())
                .map(|(t, _)| (t as u32, r.r[t]))
                .collect::<Vec<_>>()
        }),
    ))
}

/// Dense rows as a sparse matrix, dropping exact zeros.
pub fn dense_to_csr<T: Scalar>(m: &Array2<T>) -> CsrMatrix<T> {
    CsrMatrix::from_rows(
        m.ncols(),
        m.rows().into_iter().map(|row| {
            row.iter()
                .enumerate()
                .filter(|(_, v)| **v != T::zero())
                .map(|(j, &v)| (j as u32, v))
                .collect::<Vec<_>>()
        }),
    )
}

/// Writes `<label> <index>:<value> …` lines with 1-based ascending indices.
/// Values use the shortest representation that parses back exactly.
pub fn write_svmlight<T: Scalar, W: Write>(mut w: W, features: &CsrMatrix<T>, labels: &[i8]) -> Result<()> {
    if labels.len() != features.n_rows() {
        return Err(Error::LengthMismatch {
            expected: features.n_rows(),
            found: labels.len(),
        });
    }
    for (i, &y) in labels.iter().enumerate() {
        w.write_all(if y >= 0 { b"+1" } else { b"-1" })?;
        for (j, v) in features.row_iter(i) {
            write!(w, " {}:{}", j + 1, v)?;
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

/// Parses the format written by [`write_svmlight`]. The column count is the
/// largest index seen unless `n_cols` is given. `#` starts a comment.
pub fn read_svmlight<T: Scalar, R: BufRead>(reader: R, n_cols: Option<usize>) -> Result<(CsrMatrix<T>, Vec<i8>)> {
    let mut rows: Vec<Vec<(u32, T)>> = Vec::new();
    let mut labels = Vec::new();
    let mut max_col = 0usize;
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let bad = |message: String| Error::MalformedLine { line: lineno + 1, message };
        let mut fields = content.split_whitespace();
        let label = fields.next().expect("non-empty line");
        let y: f64 = label.parse().map_err(|_| bad(format!("bad label {label:?}")))?;
        labels.push(if y > 0.0 { 1 } else { -1 });
        let mut row = Vec::new();
        let mut last = 0usize;
        for f in fields {
            let (idx, val) = f.split_once(':').ok_or_else(|| bad(format!("expected index:value, got {f:?}")))?;
            let idx: usize = idx.parse().map_err(|_| bad(format!("bad index {idx:?}")))?;
            if idx == 0 || idx <= last {
                return Err(bad("indices must be 1-based and ascending".into()));
            }
            last = idx;
            let v: T = val.parse().map_err(|_| bad(format!("bad value {val:?}")))?;
            if let Some(n) = n_cols {
                if idx > n {
                    return Err(bad(format!("index {idx} exceeds {n} columns")));
                }
            }
            max_col = max_col.max(idx);
            row.push(((idx - 1) as u32, v));
        }
        rows.push(row);
    }
    Ok((CsrMatrix::from_rows(n_cols.unwrap_or(max_col), rows), labels))
}
