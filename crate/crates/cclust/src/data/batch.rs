//! Seeded batch iteration. A fresh permutation is derived from
//! (seed, epoch), so any epoch's batches can be regenerated independently —
//! this is what makes checkpoint resume bit-exact.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{DataError, Dataset};
use crate::rng::{mix_seed, seeded_rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchSampler {
    pub batch_size: usize,
    pub seed: u64,
    pub stratified: bool,
}

impl BatchSampler {
    pub fn new(batch_size: usize, seed: u64, stratified: bool) -> Result<Self, DataError> {
        if batch_size < 2 {
            return Err(DataError::BatchTooSmall(batch_size));
        }
        Ok(BatchSampler { batch_size, seed, stratified })
    }
}

fn shuffle(indices: &mut [usize], rng: &mut impl Rng) {
    // Fisher-Yates
    for i in (1..indices.len()).rev() {
        let j = rng.gen_range(0..=i);
        indices.swap(i, j);
    }
}

/// One epoch's batches: a seeded permutation chunked into `batch_size`
/// groups, dropping a trailing chunk smaller than 2 (pair losses need at
/// least two samples). Stratified mode interleaves per-class permutations
/// round-robin so every batch mixes classes evenly.
pub fn iterate_batches(
    ds: &Dataset,
    sampler: &BatchSampler,
    epoch: usize,
) -> Result<Vec<Vec<usize>>, DataError> {
    if sampler.batch_size < 2 {
        return Err(DataError::BatchTooSmall(sampler.batch_size));
    }
    if sampler.batch_size > ds.n() {
        return Err(DataError::BatchTooLarge { batch_size: sampler.batch_size, n: ds.n() });
    }
    let mut rng = seeded_rng(mix_seed(sampler.seed, epoch as u64));

    let order: Vec<usize> = if sampler.stratified {
        let labels = ds.labels.as_ref().ok_or(DataError::StratifiedNeedsLabels)?;
        let mut classes: Vec<usize> = labels.clone();
        classes.sort_unstable();
        classes.dedup();
        let mut per_class: Vec<Vec<usize>> = classes
            .iter()
            .map(|&c| (0..ds.n()).filter(|&i| labels[i] == c).collect())
            .collect();
        for group in &mut per_class {
            shuffle(group, &mut rng);
        }
        // round-robin across classes until every list is drained
        let mut order = Vec::with_capacity(ds.n());
        let mut cursor = vec![0usize; per_class.len()];
        while order.len() < ds.n() {
            for (group, cur) in per_class.iter().zip(&mut cursor) {
                if *cur < group.len() {
                    order.push(group[*cur]);
                    *cur += 1;
                }
            }
        }
        order
    } else {
        let mut order: Vec<usize> = (0..ds.n()).collect();
        shuffle(&mut order, &mut rng);
        order
    };

    Ok(order
        .chunks(sampler.batch_size)
        .filter(|chunk| chunk.len() >= 2)
        .map(<[usize]>::to_vec)
        .collect())
}
