use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphbuild::{Dataset, Label};

/// Node indices of one cross-validation iteration.
///
/// Only interest nodes are split into folds. The non-interest nodes are split
/// once into a test half and a validation half that every fold shares.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldSplit {
    pub train_interest: Vec<usize>,
    pub val_interest: Vec<usize>,
    pub val_non_interest: Vec<usize>,
    pub test_interest: Vec<usize>,
    pub test_non_interest: Vec<usize>,
}

impl FoldSplit {
    /// Interest nodes not held out for testing (training plus validation).
    pub fn training_pool_len(&self) -> usize {
        self.train_interest.len() + self.val_interest.len()
    }

    pub fn validation_nodes(&self) -> Vec<usize> {
        merged(&self.val_interest, &self.val_non_interest)
    }

    pub fn test_nodes(&self) -> Vec<usize> {
        merged(&self.test_interest, &self.test_non_interest)
    }
}

fn merged(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out: Vec<usize> = a.iter().chain(b).copied().collect();
    out.sort_unstable();
    out
}

fn sorted(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v
}

/// One-class k-fold protocol.
///
/// Interest nodes are shuffled and cut into `n_folds` contiguous folds (the
/// last `n % n_folds` folds hold one extra node). For each fold, that fold is
/// the test interest set; 10% of the remaining interest pool (rounded down,
/// at least 1) is the validation interest set and the rest trains. Non-interest
/// nodes are shuffled once: the first `⌊m/2⌋` go to test, the rest to
/// validation.
pub fn make_folds(dataset: &Dataset, n_folds: usize, seed: u64) -> Result<Vec<FoldSplit>> {
    make_folds_from_labels(dataset.labels(), n_folds, seed)
}

pub fn make_folds_from_labels(labels: &[Label], n_folds: usize, seed: u64) -> Result<Vec<FoldSplit>> {
    if n_folds < 2 {
        return Err(Error::param(format!("need at least 2 folds, got {n_folds}")));
    }
    let mut interest: Vec<usize> = (0..labels.len()).filter(|&i| labels[i].is_interest()).collect();
    let mut non_interest: Vec<usize> = (0..labels.len()).filter(|&i| !labels[i].is_interest()).collect();
    if interest.len() < n_folds {
        return Err(Error::param(format!(
            "{} interest nodes cannot fill {n_folds} folds",
            interest.len()
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    interest.shuffle(&mut rng);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    non_interest.shuffle(&mut rng);

    let half = non_interest.len() / 2;
    let test_non_interest = sorted(non_interest[..half].to_vec());
    let val_non_interest = sorted(non_interest[half..].to_vec());

    let base = interest.len() / n_folds;
    let extra = interest.len() % n_folds;
    let mut folds = Vec::with_capacity(n_folds);
    let mut start = 0;
    for f in 0..n_folds {
        let size = base + usize::from(f >= n_folds - extra);
        let end = start + size;
        let pool: Vec<usize> = interest[..start].iter().chain(&interest[end..]).copied().collect();
        let n_val = (pool.len() / 10).max(1);
        if pool.len() <= n_val {
            return Err(Error::param(format!(
                "fold {f}: {} interest nodes leave nothing to train on",
                pool.len()
            )));
        }
        folds.push(FoldSplit {
            train_interest: sorted(pool[n_val..].to_vec()),
            val_interest: sorted(pool[..n_val].to_vec()),
            val_non_interest: val_non_interest.clone(),
            test_interest: sorted(interest[start..end].to_vec()),
            test_non_interest: test_non_interest.clone(),
        });
        start = end;
    }
    Ok(folds)
}
