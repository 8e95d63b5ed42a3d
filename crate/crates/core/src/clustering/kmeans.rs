use ndarray::{Array2, ArrayView2};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::parallel::map_ranges;
use crate::scalar::{self, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    #[default]
    Lloyd,
    Minibatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Init {
    #[default]
    Kmeanspp,
    RandomPoints,
}

/// K-means settings. `iterations` counts Lloyd steps or, for the mini-batch
/// variant, sampled batches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KMeansConfig {
    pub k: usize,
    pub iterations: usize,
    pub variant: Variant,
    pub batch_size: usize,
    pub init: Init,
    pub seed: u64,
    /// Threads for the assignment and accumulation passes. Results are
    /// bit-identical only for a fixed value.
    pub workers: usize,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        Self {
            k: 300,
            iterations: 10,
            variant: Variant::Lloyd,
            batch_size: 10_000,
            init: Init::Kmeanspp,
            seed: 1,
            workers: 1,
        }
    }
}

impl KMeansConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.iterations == 0 || self.batch_size == 0 || self.workers == 0 {
            return Err(Error::Config("k, iterations, batch_size and workers must be positive".into()));
        }
        Ok(())
    }
}

/// Cluster centers, one row per cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct Centroids<T> {
    pub matrix: Array2<T>,
    pub seed: u64,
}

impl<T: Scalar> Centroids<T> {
    pub fn new(matrix: Array2<T>, seed: u64) -> Result<Self> {
        if matrix.nrows() == 0 {
            return Err(Error::Config("at least one centroid is required".into()));
        }
        if let Some(((row, col), _)) = matrix.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFiniteFeature { row, col });
        }
        Ok(Self {
            matrix: matrix.as_standard_layout().into_owned(),
            seed,
        })
    }

    pub fn k(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn dim(&self) -> usize {
        self.matrix.ncols()
    }

    #[inline]
    pub fn row(&self, k: usize) -> &[T] {
        self.matrix.row(k).to_slice().expect("standard layout")
    }

    /// Nearest centroid; ties go to the smallest index.
    pub fn assign(&self, x: &[T]) -> Result<usize> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        Ok(self.nearest(x).0)
    }

    #[inline]
    fn nearest(&self, x: &[T]) -> (usize, T) {
        scalar::argmin((0..self.k()).map(|k| scalar::squared_distance(x, self.row(k)))).expect("K ≥ 1")
    }
}

/// Cluster index of each point.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub labels: Vec<u32>,
}

impl Assignment {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn cluster_sizes(&self, k: usize) -> Vec<usize> {
        let mut sizes = vec![0; k];
        for &l in &self.labels {
            sizes[l as usize] += 1;
        }
        sizes
    }

    /// Point indices per cluster, ascending.
    pub fn members(&self, k: usize) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); k];
        for (i, &l) in self.labels.iter().enumerate() {
            out[l as usize].push(i);
        }
        out
    }
}

/// Nearest-centroid index for a single vector.
pub fn assign<T: Scalar>(x: &[T], centroids: &Centroids<T>) -> Result<usize> {
    centroids.assign(x)
}

fn check_dims<T: Scalar>(x: &ArrayView2<'_, T>, centroids: &Centroids<T>) -> Result<()> {
    if x.ncols() != centroids.dim() {
        return Err(Error::DimensionMismatch {
            expected: centroids.dim(),
            found: x.ncols(),
        });
    }
    Ok(())
}

/// Row-major view of `x`, copying only when the input is not contiguous.
struct Rows<'a, T> {
    data: &'a [T],
    dim: usize,
}

impl<'a, T: Scalar> Rows<'a, T> {
    fn row(&self, i: usize) -> &'a [T] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }
}

fn with_rows<T: Scalar, R>(x: ArrayView2<'_, T>, f: impl FnOnce(Rows<'_, T>) -> R) -> R {
    let dim = x.ncols();
    match x.as_slice() {
        Some(data) => f(Rows { data, dim }),
        None => {
            let owned = x.as_standard_layout().into_owned();
            let data = owned.as_slice().expect("standard layout");
            f(Rows { data, dim })
        }
    }
}

fn assign_rows<T: Scalar>(rows: &Rows<'_, T>, n: usize, centroids: &Centroids<T>, workers: usize) -> (Vec<u32>, Vec<T>) {
    let parts = map_ranges(n, workers, |r| {
        let mut labels = Vec::with_capacity(r.len());
        let mut dists = Vec::with_capacity(r.len());
        for i in r {
            let (k, d) = centroids.nearest(rows.row(i));
            labels.push(k as u32);
            dists.push(d);
        }
        (labels, dists)
    });
    let mut labels = Vec::with_capacity(n);
    let mut dists = Vec::with_capacity(n);
    for (l, d) in parts {
        labels.extend(l);
        dists.extend(d);
    }
    (labels, dists)
}

/// Nearest-centroid labels for every row of `x`.
pub fn assign_all<T: Scalar>(x: ArrayView2<'_, T>, centroids: &Centroids<T>, workers: usize) -> Result<Assignment> {
    check_dims(&x, centroids)?;
    let n = x.nrows();
    Ok(with_rows(x, |rows| Assignment {
        labels: assign_rows(&rows, n, centroids, workers).0,
    }))
}

/// Sum of squared distances from each row of `x` to its nearest centroid.
pub fn inertia<T: Scalar>(x: ArrayView2<'_, T>, centroids: &Centroids<T>) -> Result<T> {
    check_dims(&x, centroids)?;
    let n = x.nrows();
    Ok(with_rows(x, |rows| {
        (0..n).fold(T::zero(), |acc, i| acc + centroids.nearest(rows.row(i)).1)
    }))
}

fn check_fit_input<T: Scalar>(x: &ArrayView2<'_, T>, config: &KMeansConfig) -> Result<()> {
    config.validate()?;
    if x.nrows() < config.k {
        return Err(Error::TooFewPoints {
            points: x.nrows(),
            k: config.k,
        });
    }
    if let Some(((row, col), _)) = x.indexed_iter().find(|(_, v)| !v.is_finite()) {
        return Err(Error::NonFiniteFeature { row, col });
    }
    Ok(())
}

fn kmeanspp<T: Scalar>(rows: &Rows<'_, T>, candidates: &[usize], k: usize, workers: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let n = candidates.len();
    let mut chosen = Vec::with_capacity(k);
    chosen.push(candidates[rng.random_range(0..n)]);
    let mut d2: Vec<f64> = vec![f64::INFINITY; n];
    while chosen.len() < k {
        let last = rows.row(*chosen.last().expect("non-empty"));
        let parts = map_ranges(n, workers, |r| {
            r.map(|j| scalar::squared_distance(rows.row(candidates[j]), last).as_f64())
                .collect::<Vec<_>>()
        });
        for (slot, d) in d2.iter_mut().zip(parts.into_iter().flatten()) {
            *slot = slot.min(d);
        }
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (j, &d) in d2.iter().enumerate() {
                acc += d;
                if acc > target && d > 0.0 {
                    pick = Some(j);
                    break;
                }
            }
            // Rounding can leave the target past the last positive weight.
            pick.unwrap_or_else(|| d2.iter().rposition(|&d| d > 0.0).expect("total > 0"))
        } else {
            // Every remaining candidate coincides with a chosen center.
            (0..n).find(|j| !chosen.contains(&candidates[*j])).expect("N ≥ K")
        };
        chosen.push(candidates[next]);
    }
    chosen
}

/// Initial centers as `fit` would choose them. For the mini-batch variant
/// k-means++ runs on a random subsample of `max(3 · batch_size, 10_000)`
/// points (all points when N is smaller).
pub fn initial_centroids<T: Scalar>(x: ArrayView2<'_, T>, config: &KMeansConfig) -> Result<Centroids<T>> {
    check_fit_input(&x, config)?;
    let n = x.nrows();
    with_rows(x, |rows| {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let chosen = match config.init {
            Init::RandomPoints => {
                let mut picked = index::sample(&mut rng, n, config.k).into_vec();
                picked.sort_unstable();
                picked
            }
            Init::Kmeanspp => {
                let pool = match config.variant {
                    Variant::Lloyd => n,
                    Variant::Minibatch => (3 * config.batch_size).max(10_000).min(n),
                };
                let candidates: Vec<usize> = if pool == n {
                    (0..n).collect()
                } else {
                    let mut c = index::sample(&mut rng, n, pool).into_vec();
                    c.sort_unstable();
                    c
                };
                kmeanspp(&rows, &candidates, config.k, config.workers, &mut rng)
            }
        };
        let mut matrix = Array2::zeros((config.k, rows.dim));
        for (mut dst, &i) in matrix.rows_mut().into_iter().zip(&chosen) {
            dst.assign(&ndarray::ArrayView1::from(rows.row(i)));
        }
        Centroids::new(matrix, config.seed)
    })
}

/// Result of a K-means fit. `inertia_trace[i]` is the objective with
/// nearest-centroid labels after iteration `i + 1`; entry 0 is the value at
/// initialization, so the trace has `iterations + 1` entries for Lloyd.
#[derive(Debug, Clone)]
pub struct KMeansFit<T> {
    pub centroids: Centroids<T>,
    pub assignment: Assignment,
    pub inertia_trace: Vec<T>,
}

impl<T: Scalar> KMeansFit<T> {
    pub fn inertia(&self) -> T {
        *self.inertia_trace.last().expect("trace is never empty")
    }
}

/// Runs the configured variant.
pub fn fit<T: Scalar>(x: ArrayView2<'_, T>, config: &KMeansConfig) -> Result<KMeansFit<T>> {
    match config.variant {
        Variant::Lloyd => kmeans_fit(x, config),
        Variant::Minibatch => minibatch_kmeans_fit(x, config),
    }
}

/// Moves every empty cluster onto the point farthest from its centroid,
/// taking points only from clusters with more than one member.
fn repair_empty<T: Scalar>(rows: &Rows<'_, T>, labels: &mut [u32], dists: &mut [T], centroids: &mut Centroids<T>) {
    let k = centroids.k();
    let mut sizes = vec![0usize; k];
    for &l in labels.iter() {
        sizes[l as usize] += 1;
    }
    for c in 0..k {
        if sizes[c] > 0 {
            continue;
        }
        let mut best: Option<(usize, T)> = None;
        for (i, (&l, &d)) in labels.iter().zip(dists.iter()).enumerate() {
            if sizes[l as usize] > 1 && best.is_none_or(|(_, bd)| d > bd) {
                best = Some((i, d));
            }
        }
        let (i, _) = best.expect("N ≥ K leaves a cluster with two members");
        sizes[labels[i] as usize] -= 1;
        sizes[c] = 1;
        labels[i] = c as u32;
        dists[i] = T::zero();
        centroids.matrix.row_mut(c).assign(&ndarray::ArrayView1::from(rows.row(i)));
    }
}

fn recompute_means<T: Scalar>(rows: &Rows<'_, T>, labels: &[u32], centroids: &mut Centroids<T>, workers: usize) {
    let (k, dim) = (centroids.k(), centroids.dim());
    let partial = map_ranges(labels.len(), workers, |r| {
        let mut sums = vec![T::zero(); k * dim];
        let mut counts = vec![0usize; k];
        for i in r {
            let c = labels[i] as usize;
            counts[c] += 1;
            for (s, &v) in sums[c * dim..(c + 1) * dim].iter_mut().zip(rows.row(i)) {
                *s += v;
            }
        }
        (sums, counts)
    });
    let mut sums = vec![T::zero(); k * dim];
    let mut counts = vec![0usize; k];
    for (s, c) in partial {
        scalar::axpy(T::one(), &s, &mut sums);
        for (a, b) in counts.iter_mut().zip(c) {
            *a += b;
        }
    }
    for c in 0..k {
        if counts[c] == 0 {
            continue;
        }
        let inv = T::one() / T::lit(counts[c] as f64);
        for (dst, &s) in centroids.matrix.row_mut(c).iter_mut().zip(&sums[c * dim..(c + 1) * dim]) {
            *dst = s * inv;
        }
    }
}

/// Lloyd's algorithm: initialization, then `iterations` rounds of
/// (assign, repair empty clusters, recompute means), then a final
/// assignment so labels are nearest to the returned centroids.
pub fn kmeans_fit<T: Scalar>(x: ArrayView2<'_, T>, config: &KMeansConfig) -> Result<KMeansFit<T>> {
    let centroids = initial_centroids(x, config)?;
    lloyd_from(x, centroids, config.iterations, config.workers)
}

/// Lloyd iterations from given starting centers.
pub fn lloyd_from<T: Scalar>(x: ArrayView2<'_, T>, mut centroids: Centroids<T>, iterations: usize, workers: usize) -> Result<KMeansFit<T>> {
    check_dims(&x, &centroids)?;
    if x.nrows() < centroids.k() {
        return Err(Error::TooFewPoints {
            points: x.nrows(),
            k: centroids.k(),
        });
    }
    let n = x.nrows();
    Ok(with_rows(x, |rows| {
        let (mut labels, mut dists) = assign_rows(&rows, n, &centroids, workers);
        let mut trace = vec![dists.iter().copied().fold(T::zero(), |a, d| a + d)];
        for _ in 0..iterations {
            repair_empty(&rows, &mut labels, &mut dists, &mut centroids);
            recompute_means(&rows, &labels, &mut centroids, workers);
            (labels, dists) = assign_rows(&rows, n, &centroids, workers);
            trace.push(dists.iter().copied().fold(T::zero(), |a, d| a + d));
        }
        KMeansFit {
            centroids,
            assignment: Assignment { labels },
            inertia_trace: trace,
        }
    }))
}

/// Mini-batch K-means. Each step samples `batch_size` distinct points
/// (processed in ascending index order), labels them with the current
/// centroids, then applies `n_k += 1; γ_k += (x − γ_k) / n_k` per point.
/// Counts persist across steps. A final full pass produces the labels.
pub fn minibatch_kmeans_fit<T: Scalar>(x: ArrayView2<'_, T>, config: &KMeansConfig) -> Result<KMeansFit<T>> {
    let mut centroids = initial_centroids(x, config)?;
    let n = x.nrows();
    let batch = config.batch_size.min(n);
    let dim = centroids.dim();
    Ok(with_rows(x, |rows| {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x6D69_6E69_6261_7463);
        let mut counts = vec![0u64; centroids.k()];
        let mut batch_labels = Vec::with_capacity(batch);
        for _ in 0..config.iterations {
            let mut idx = if batch == n {
                (0..n).collect()
            } else {
                index::sample(&mut rng, n, batch).into_vec()
            };
            idx.sort_unstable();
            let sub_rows: Vec<usize> = idx;
            let parts = map_ranges(sub_rows.len(), config.workers, |r| {
                r.map(|j| centroids.nearest(rows.row(sub_rows[j])).0).collect::<Vec<_>>()
            });
            batch_labels.clear();
            batch_labels.extend(parts.into_iter().flatten());
            for (&i, &c) in sub_rows.iter().zip(&batch_labels) {
                counts[c] += 1;
                let eta = T::one() / T::lit(counts[c] as f64);
                let mut row = centroids.matrix.row_mut(c);
                let dst = row.as_slice_mut().expect("standard layout");
                for (g, &v) in dst.iter_mut().zip(rows.row(i)) {
                    *g += eta * (v - *g);
                }
            }
            debug_assert_eq!(centroids.matrix.ncols(), dim);
        }
        let (labels, dists) = assign_rows(&rows, n, &centroids, config.workers);
        KMeansFit {
            centroids,
            assignment: Assignment { labels },
            inertia_trace: vec![dists.iter().copied().fold(T::zero(), |a, d| a + d)],
        }
    }))
}
