//! Linear SVM with squared hinge loss and no bias:
//!
//! ```text
//! min_w ½‖w‖² + C Σ_i max(0, 1 − y_i w·x_i)²
//! ```
//!
//! solved by coordinate descent on the dual. With `D = 1/(2C)`, each step
//! updates one `α_i ≥ 0` in closed form:
//!
//! ```text
//! G  = y_i w·x_i − 1 + D α_i
//! α' = max(α_i − G / (‖x_i‖² + D), 0)
//! w += (α' − α_i) y_i x_i
//! ```
//!
//! Training stops when the spread of projected gradients over an epoch falls
//! below `tolerance`, or after `max_epochs`.
//!
//! The primal value of `w(α)` can rise between epochs even though the dual
//! value falls. The solver therefore keeps a separate primal iterate `u` and
//! after each epoch moves it to the exact minimizer of the primal on the
//! segment `[u, w(α)]`. `u` is what gets returned, its objective never
//! increases, and it tends to the optimum because `w(α)` does.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{self, Scalar};
use crate::sparse::FeatureRows;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SvmConfig {
    #[serde(rename = "C")]
    pub c: f64,
    pub max_epochs: usize,
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for SvmConfig {
    fn default() -> Self {
        Self {
            c: 1.0,
            max_epochs: 1000,
            tolerance: 1e-4,
            seed: 1,
        }
    }
}

impl SvmConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0) || !(self.tolerance > 0.0) || self.max_epochs == 0 {
            return Err(Error::Config("C and tolerance must be > 0, max_epochs ≥ 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel<T> {
    pub w: Vec<T>,
    pub trained_c: f64,
}

impl<T: Scalar> LinearModel<T> {
    pub fn dim(&self) -> usize {
        self.w.len()
    }

    /// `sign(w·f)`, with 0 mapped to +1.
    pub fn predict(&self, f: &[T]) -> Result<i8> {
        if f.len() != self.w.len() {
            return Err(Error::DimensionMismatch {
                expected: self.w.len(),
                found: f.len(),
            });
        }
        Ok(sign(scalar::dot(&self.w, f)))
    }

    pub fn predict_rows<X: FeatureRows<T> + ?Sized>(&self, x: &X) -> Result<Vec<i8>> {
        if x.n_cols() != self.w.len() {
            return Err(Error::DimensionMismatch {
                expected: self.w.len(),
                found: x.n_cols(),
            });
        }
        Ok((0..x.n_rows()).map(|i| sign(x.row_dot(i, &self.w))).collect())
    }

    /// `dim <d>`, `C <value>`, then one weight per line with 17 significant
    /// digits.
    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "dim {}", self.w.len())?;
        writeln!(w, "C {:.16e}", self.trained_c)?;
        for v in &self.w {
            writeln!(w, "{:.16e}", v.as_f64())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_text<R: BufRead>(reader: R) -> Result<Self> {
        let bad = |line: usize, message: String| Error::MalformedLine { line, message };
        let mut lines = reader
            .lines()
            .enumerate()
            .filter(|(_, l)| l.as_ref().map_or(true, |l| !l.trim().is_empty()));
        let mut header = |key: &str| -> Result<(usize, String)> {
            let (n, line) = lines.next().ok_or_else(|| bad(0, format!("missing {key:?} line")))?;
            let line = line?;
            let value = line
                .trim()
                .strip_prefix(key)
                .map(str::trim)
                .ok_or_else(|| bad(n + 1, format!("expected {key:?}")))?
                .to_string();
            Ok((n + 1, value))
        };
        let (n, dim) = header("dim")?;
        let dim: usize = dim.parse().map_err(|_| bad(n, format!("bad dimension {dim:?}")))?;
        let (n, c) = header("C")?;
        let trained_c: f64 = c.parse().map_err(|_| bad(n, format!("bad C {c:?}")))?;
        let mut w = Vec::with_capacity(dim);
        for (n, line) in lines {
            let line = line?;
            let v: f64 = line
                .trim()
                .parse()
                .map_err(|_| bad(n + 1, format!("bad weight {:?}", line.trim())))?;
            w.push(T::lit(v));
        }
        if w.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: w.len(),
            });
        }
        Ok(Self { w, trained_c })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_text(BufWriter::new(File::create(path)?))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|source| Error::UnreadableFile {
            path: path.to_path_buf(),
            source,
        })?;
        Self::read_text(BufReader::new(file))
    }
}

#[inline]
fn sign<T: Scalar>(v: T) -> i8 {
    if v < T::zero() {
        -1
    } else {
        1
    }
}

pub fn svm_predict<T: Scalar>(model: &LinearModel<T>, f: &[T]) -> Result<i8> {
    model.predict(f)
}

fn check_shapes<T: Scalar, X: FeatureRows<T> + ?Sized>(w: &[T], x: &X, labels: &[i8]) -> Result<()> {
    if x.n_cols() != w.len() {
        return Err(Error::DimensionMismatch {
            expected: w.len(),
            found: x.n_cols(),
        });
    }
    if labels.len() != x.n_rows() {
        return Err(Error::LengthMismatch {
            expected: x.n_rows(),
            found: labels.len(),
        });
    }
    Ok(())
}

#[inline]
fn y_of<T: Scalar>(label: i8) -> T {
    if label < 0 {
        -T::one()
    } else {
        T::one()
    }
}

/// Primal objective `½‖w‖² + C Σ max(0, 1 − y_i w·x_i)²`.
pub fn svm_objective<T: Scalar, X: FeatureRows<T> + ?Sized>(w: &[T], x: &X, labels: &[i8], c: T) -> Result<T> {
    check_shapes(w, x, labels)?;
    Ok(objective_from_margins(w, &margins(w, x, labels), c))
}

/// `y_i w·x_i` for every row.
fn margins<T: Scalar, X: FeatureRows<T> + ?Sized>(w: &[T], x: &X, labels: &[i8]) -> Vec<T> {
    labels.iter().enumerate().map(|(i, &y)| y_of::<T>(y) * x.row_dot(i, w)).collect()
}

fn objective_from_margins<T: Scalar>(w: &[T], margins: &[T], c: T) -> T {
    let loss = margins.iter().fold(T::zero(), |acc, &m| {
        let slack = (T::one() - m).max(T::zero());
        acc + slack * slack
    });
    T::lit(0.5) * scalar::dot(w, w) + c * loss
}

/// Minimizer over `t ∈ [0, 1]` of the primal at `u + t b`, given the margins
/// `m` of `u` and their change `d` along `b`. The derivative is piecewise
/// linear and increasing, so Newton steps inside a shrinking bracket find
/// the root exactly once the active set settles.
fn segment_minimizer<T: Scalar>(ub: T, bb: T, m: &[T], d: &[T], c: T) -> T {
    let two_c = c + c;
    let slope = |t: T| {
        let mut g = ub + t * bb;
        let mut h = bb;
        for (&mi, &di) in m.iter().zip(d) {
            let slack = T::one() - mi - t * di;
            if slack > T::zero() {
                g -= two_c * slack * di;
                h += two_c * di * di;
            }
        }
        (g, h)
    };
    let (g0, _) = slope(T::zero());
    if g0 >= T::zero() {
        return T::zero();
    }
    let (g1, _) = slope(T::one());
    if g1 <= T::zero() {
        return T::one();
    }
    let (mut lo, mut hi) = (T::zero(), T::one());
    let mut t = T::zero();
    for _ in 0..100 {
        let (g, h) = slope(t);
        if g == T::zero() {
            break;
        }
        if g < T::zero() {
            lo = t;
        } else {
            hi = t;
        }
        let newton = t - g / h;
        let next = if newton > lo && newton < hi {
            newton
        } else {
            T::lit(0.5) * (lo + hi)
        };
        if next == t || hi - lo <= T::epsilon() {
            break;
        }
        t = next;
    }
    t
}

/// Gradient `w − 2C Σ max(0, 1 − y_i w·x_i) y_i x_i`.
pub fn svm_gradient<T: Scalar, X: FeatureRows<T> + ?Sized>(w: &[T], x: &X, labels: &[i8], c: T) -> Result<Vec<T>> {
    check_shapes(w, x, labels)?;
    let mut g = w.to_vec();
    let two_c = c + c;
    for (i, &y) in labels.iter().enumerate() {
        let yv = y_of::<T>(y);
        let slack = T::one() - yv * x.row_dot(i, w);
        if slack > T::zero() {
            x.row_axpy(i, -two_c * slack * yv, &mut g);
        }
    }
    Ok(g)
}

/// Trained weights plus the primal objective of the returned iterate after
/// every epoch. The last entry equals `svm_objective` of the model.
#[derive(Debug, Clone)]
pub struct SvmFit<T> {
    pub model: LinearModel<T>,
    pub epochs: usize,
    pub converged: bool,
    pub objective_trace: Vec<T>,
}

pub fn svm_train<T: Scalar, X: FeatureRows<T> + ?Sized>(x: &X, labels: &[i8], config: &SvmConfig) -> Result<LinearModel<T>> {
    Ok(train(x, labels, config)?.model)
}

/// As [`svm_train`], also recording the primal objective after each epoch.
pub fn svm_train_traced<T: Scalar, X: FeatureRows<T> + ?Sized>(x: &X, labels: &[i8], config: &SvmConfig) -> Result<SvmFit<T>> {
    train(x, labels, config)
}

fn train<T: Scalar, X: FeatureRows<T> + ?Sized>(x: &X, labels: &[i8], config: &SvmConfig) -> Result<SvmFit<T>> {
    config.validate()?;
    if labels.len() != x.n_rows() {
        return Err(Error::LengthMismatch {
            expected: x.n_rows(),
            found: labels.len(),
        });
    }
    if let Some((row, col)) = x.find_non_finite() {
        return Err(Error::NonFiniteFeature { row, col });
    }
    let n = x.n_rows();
    let c = T::lit(config.c);
    let diag = T::lit(0.5 / config.c);
    let qd: Vec<T> = (0..n).map(|i| x.row_sq_norm(i) + diag).collect();
    let ys: Vec<T> = labels.iter().map(|&y| y_of(y)).collect();
    let mut alpha = vec![T::zero(); n];
    let mut w = vec![T::zero(); x.n_cols()];
    let mut u = w.clone();
    let mut mu = vec![T::zero(); n];
    let mut pu = objective_from_margins(&u, &mu, c);
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut objective_trace = Vec::new();
    let tol = T::lit(config.tolerance);
    let mut epochs = 0;
    let mut converged = n == 0;

    while !converged && epochs < config.max_epochs {
        order.shuffle(&mut rng);
        let mut pg_max = T::neg_infinity();
        let mut pg_min = T::infinity();
        for &i in &order {
            let g = ys[i] * x.row_dot(i, &w) - T::one() + diag * alpha[i];
            let pg = if alpha[i] == T::zero() { g.min(T::zero()) } else { g };
            pg_max = pg_max.max(pg);
            pg_min = pg_min.min(pg);
            if pg != T::zero() {
                let old = alpha[i];
                alpha[i] = (old - g / qd[i]).max(T::zero());
                let delta = (alpha[i] - old) * ys[i];
                if delta != T::zero() {
                    x.row_axpy(i, delta, &mut w);
                }
            }
        }
        epochs += 1;
        converged = pg_max - pg_min <= tol;

        let mw = margins(&w, x, labels);
        let pw = objective_from_margins(&w, &mw, c);
        if pw <= pu {
            u.copy_from_slice(&w);
            mu = mw;
            pu = pw;
        } else {
            let b: Vec<T> = w.iter().zip(&u).map(|(&a, &b)| a - b).collect();
            let d: Vec<T> = mw.iter().zip(&mu).map(|(&a, &b)| a - b).collect();
            let t = segment_minimizer(scalar::dot(&u, &b), scalar::dot(&b, &b), &mu, &d, c);
            if t > T::zero() {
                let cand: Vec<T> = u.iter().zip(&b).map(|(&a, &b)| a + t * b).collect();
                let mc = margins(&cand, x, labels);
                let pc = objective_from_margins(&cand, &mc, c);
                // rounding can undo a vanishing improvement
                if pc <= pu {
                    u = cand;
                    mu = mc;
                    pu = pc;
                }
            }
        }
        objective_trace.push(pu);
    }
    Ok(SvmFit {
        model: LinearModel { w: u, trained_c: config.c },
        epochs,
        converged,
        objective_trace,
    })
}
