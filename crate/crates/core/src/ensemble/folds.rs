//! Deterministic k-fold assignment from a seeded shuffle.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

/// Partition of `0..n` into `k` folds whose sizes differ by at most one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldAssignment {
    fold_of: Vec<usize>,
    k: usize,
}

impl FoldAssignment {
    pub fn n(&self) -> usize {
        self.fold_of.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn fold_of(&self, index: usize) -> usize {
        self.fold_of[index]
    }

    /// Indices held out by `fold`, in dataset order.
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.fold_of[i] == fold).collect()
    }

    /// Indices trained on when `fold` is held out, in dataset order.
    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.fold_of[i] != fold).collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.fold_of {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Shuffle `0..n` with the given seed and cut it into `k` folds; the first
/// `n % k` folds take the extra sample.
pub fn kfold_split(n: usize, k: usize, seed_value: u64) -> Result<FoldAssignment> {
    if k == 0 {
        return Err(Error::Invalid("fold count must be positive".into()));
    }
    if n < k {
        return Err(Error::Invalid(format!("cannot split {n} samples into {k} folds")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut seed::rng(seed_value, "kfold"));

    let base = n / k;
    let extra = n % k;
    let mut fold_of = vec![0; n];
    let mut cursor = 0;
    for fold in 0..k {
        let size = base + usize::from(fold < extra);
        for &idx in &order[cursor..cursor + size] {
            fold_of[idx] = fold;
        }
        cursor += size;
    }
    Ok(FoldAssignment { fold_of, k })
}
