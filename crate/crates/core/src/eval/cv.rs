use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Train and test indices of one fold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Stratified k-fold split over documents with label ±1 (0 entries are
/// skipped). Each class is shuffled, then positives followed by negatives are
/// dealt to folds round-robin, so per-class fold sizes differ by at most one.
/// Index lists are ascending.
pub fn kfold_split(labels: &[i8], folds: usize, seed: u64) -> Result<Vec<Fold>> {
    let labeled: usize = labels.iter().filter(|&&y| y != 0).count();
    if folds < 2 || folds > labeled {
        return Err(Error::TooFewDocuments { documents: labeled, folds });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order = Vec::with_capacity(labeled);
    for class in [1i8, -1] {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        idx.shuffle(&mut rng);
        order.extend(idx);
    }
    let mut fold_of = vec![usize::MAX; labels.len()];
    for (pos, &i) in order.iter().enumerate() {
        fold_of[i] = pos % folds;
    }
    Ok((0..folds)
        .map(|f| {
            let (test, train) = (0..labels.len())
                .filter(|&i| fold_of[i] != usize::MAX)
                .partition(|&i| fold_of[i] == f);
            Fold { train, test }
        })
        .collect())
}

/// Fraction of positions where the two label vectors agree.
pub fn accuracy(predictions: &[i8], labels: &[i8]) -> Result<f64> {
    if predictions.len() != labels.len() {
        return Err(Error::LengthMismatch {
            expected: labels.len(),
            found: predictions.len(),
        });
    }
    if labels.is_empty() {
        return Ok(0.0);
    }
    let hits = predictions.iter().zip(labels).filter(|(a, b)| a == b).count();
    Ok(hits as f64 / labels.len() as f64)
}
