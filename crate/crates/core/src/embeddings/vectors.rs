//! Word vectors and the whitespace-separated text format.
//!
//! ```text
//! <count> <dim>
//! <word> <v1> ... <vdim>
//! ```
//!
//! The header line is optional; without it the dimension is inferred from
//! the first row.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use log::warn;
use ndarray::{Array2, ArrayView1};

use crate::corpus::Dictionary;
use crate::error::{Error, Result};
use crate::scalar::{self, Scalar};

/// Dictionary of words with one `dim`-dimensional row each.
#[derive(Debug, Clone)]
pub struct WordVectors<T> {
    dictionary: Arc<Dictionary>,
    matrix: Array2<T>,
}

impl<T: Scalar> WordVectors<T> {
    pub fn new(dictionary: Dictionary, matrix: Array2<T>) -> Result<Self> {
        if dictionary.len() != matrix.nrows() {
            return Err(Error::LengthMismatch {
                expected: dictionary.len(),
                found: matrix.nrows(),
            });
        }
        if let Some(((row, _), _)) = matrix.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::MalformedLine {
                line: row + 1,
                message: format!("non-finite component for word {:?}", dictionary.word(row as u32)),
            });
        }
        Ok(Self {
            dictionary: Arc::new(dictionary),
            matrix: matrix.as_standard_layout().into_owned(),
        })
    }

    /// Builds from `(word, vector)` pairs, all of the same length.
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, Vec<T>)>) -> Result<Self> {
        let mut dictionary = Dictionary::new();
        let mut data = Vec::new();
        let mut dim = None;
        for (word, v) in pairs {
            let expected = *dim.get_or_insert(v.len());
            if v.len() != expected {
                return Err(Error::DimensionMismatch { expected, found: v.len() });
            }
            dictionary.insert(word);
            data.extend(v);
        }
        let rows = dictionary.len();
        let matrix = Array2::from_shape_vec((rows, dim.unwrap_or(0)), data).expect("rows × dim elements");
        Self::new(dictionary, matrix)
    }

    pub fn dim(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn len(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dictionary(&self) -> &Arc<Dictionary> {
        &self.dictionary
    }

    pub fn matrix(&self) -> &Array2<T> {
        &self.matrix
    }

    #[inline]
    pub fn row(&self, id: u32) -> &[T] {
        self.matrix.row(id as usize).to_slice().expect("standard layout")
    }

    pub fn get(&self, word: &str) -> Option<ArrayView1<'_, T>> {
        self.dictionary.id(word).map(|id| self.matrix.row(id as usize))
    }

    pub fn cast<U: Scalar>(&self) -> WordVectors<U> {
        WordVectors {
            dictionary: self.dictionary.clone(),
            matrix: self.matrix.mapv(|v| U::lit(v.as_f64())),
        }
    }

    /// `k` words with the highest cosine similarity to `query`, best first.
    pub fn nearest(&self, query: &[T], k: usize) -> Vec<(&str, T)> {
        let qn = scalar::dot(query, query).sqrt();
        let mut scored: Vec<(usize, T)> = (0..self.len())
            .map(|i| {
                let r = self.row(i as u32);
                let denom = qn * scalar::dot(r, r).sqrt();
                let cos = if denom > T::zero() {
                    scalar::dot(query, r) / denom
                } else {
                    T::zero()
                };
                (i, cos)
            })
            .collect();
        scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal).then(a.0.cmp(&b.0)));
        scored
            .into_iter()
            .take(k)
            .map(|(i, c)| (self.dictionary.word(i as u32), c))
            .collect()
    }

    /// Parses the text format. Returns the vectors and one warning per
    /// duplicated word (the last occurrence wins).
    pub fn read_text<R: BufRead>(reader: R, expected_dim: Option<usize>) -> Result<(Self, Vec<String>)> {
        let mut warnings = Vec::new();
        let mut dictionary = Dictionary::new();
        let mut data: Vec<T> = Vec::new();
        let mut dim = expected_dim;
        let mut declared_count = None;
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let lineno = lineno + 1;
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.is_empty() {
                continue;
            }
            if lineno == 1 && fields.len() == 2 {
                if let (Ok(count), Ok(header_dim)) = (fields[0].parse::<usize>(), fields[1].parse::<usize>()) {
                    if let Some(e) = expected_dim {
                        if e != header_dim {
                            return Err(Error::DimensionMismatch {
                                expected: e,
                                found: header_dim,
                            });
                        }
                    }
                    dim = Some(header_dim);
                    declared_count = Some(count);
                    continue;
                }
            }
            let word = fields[0];
            let values = &fields[1..];
            let d = *dim.get_or_insert(values.len());
            if values.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: values.len(),
                });
            }
            let mut row = Vec::with_capacity(d);
            for v in values {
                let x: T = v.parse().map_err(|_| Error::MalformedLine {
                    line: lineno,
                    message: format!("cannot parse {v:?} as a number"),
                })?;
                if !x.is_finite() {
                    return Err(Error::MalformedLine {
                        line: lineno,
                        message: format!("non-finite value {v:?}"),
                    });
                }
                row.push(x);
            }
            match dictionary.id(word) {
                Some(id) => {
                    warnings.push(format!("line {lineno}: duplicate word {word:?}, keeping the last vector"));
                    let start = id as usize * d;
                    data[start..start + d].copy_from_slice(&row);
                }
                None => {
                    dictionary.insert(word);
                    data.extend(row);
                }
            }
        }
        if let Some(count) = declared_count {
            let rows = dictionary.len() + warnings.len();
            if count != rows {
                warnings.push(format!("header declares {count} rows, found {rows}"));
            }
        }
        let d = dim.unwrap_or(0);
        let matrix = Array2::from_shape_vec((dictionary.len(), d), data).expect("rows × dim elements");
        Ok((Self::new(dictionary, matrix)?, warnings))
    }

    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{} {}", self.len(), self.dim())?;
        for (i, word) in self.dictionary.words().iter().enumerate() {
            w.write_all(word.as_bytes())?;
            for v in self.row(i as u32) {
                write!(w, " {v}")?;
            }
            writeln!(w)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_text(BufWriter::new(File::create(path)?))
    }
}

/// Reads a word-vector file, logging duplicate-word warnings.
pub fn load_word_vectors<T: Scalar>(path: impl AsRef<Path>, expected_dim: Option<usize>) -> Result<WordVectors<T>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::UnreadableFile {
        path: path.to_path_buf(),
        source,
    })?;
    let (wv, warnings) = WordVectors::read_text(BufReader::new(file), expected_dim)?;
    for w in warnings {
        warn!("{}: {w}", path.display());
    }
    Ok(wv)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str, dim: Option<usize>) -> Result<(WordVectors<f64>, Vec<String>)> {
        WordVectors::read_text(text.as_bytes(), dim)
    }

    #[test]
    fn parses_header_format() {
        let (wv, warnings) = parse("2 3\na 1 0 0\nb 0 1 0\n", None).unwrap();
        assert_eq!((wv.len(), wv.dim()), (2, 3));
        assert_eq!(wv.get("b").unwrap().to_vec(), vec![0.0, 1.0, 0.0]);
        assert!(warnings.is_empty());
    }

    #[test]
    fn headerless_infers_dimension() {
        let (wv, _) = parse("a 1 2\nb 3 4\n", None).unwrap();
        assert_eq!((wv.len(), wv.dim()), (2, 2));
    }

    #[test]
    fn short_row_is_dimension_mismatch() {
        let err = parse("2 3\na 1 0 0\nb 0 1\n", None).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { expected: 3, found: 2 }));
        let err = parse("a 1 0 0\n", Some(2)).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { expected: 2, found: 3 }));
    }

    #[test]
    fn unparsable_value_reports_line() {
        let err = parse("2 2\na 1 0\nb x 1\n", None).unwrap_err();
        assert!(matches!(err, Error::MalformedLine { line: 3, .. }));
    }

    #[test]
    fn duplicate_word_keeps_last_and_warns() {
        let (wv, warnings) = parse("2 2\na 1 0\na 5 6\n", None).unwrap();
        assert_eq!(wv.len(), 1);
        assert_eq!(wv.get("a").unwrap().to_vec(), vec![5.0, 6.0]);
        assert_eq!(warnings.len(), 1);
    }

    #[test]
    fn text_round_trip_is_exact() {
        let wv = WordVectors::<f32>::from_pairs([("x", vec![0.1f32, -1.0 / 3.0]), ("y", vec![1e-7, 12345.678])]).unwrap();
        let mut buf = Vec::new();
        wv.write_text(&mut buf).unwrap();
        let (back, _) = WordVectors::<f32>::read_text(buf.as_slice(), Some(2)).unwrap();
        assert_eq!(back.matrix(), wv.matrix());
        assert_eq!(back.dictionary().words(), wv.dictionary().words());
    }

    #[test]
    fn nearest_ranks_by_cosine() {
        let wv = WordVectors::<f64>::from_pairs([("a", vec![1.0, 0.0]), ("b", vec![0.7, 0.7]), ("c", vec![-1.0, 0.0])]).unwrap();
        let hits = wv.nearest(&[1.0, 0.1], 2);
        assert_eq!(hits[0].0, "a");
        assert_eq!(hits[1].0, "b");
    }
}
