use super::store::{Record, SegmentStore};
use crate::error::{Error, Result};
use crate::rng::SplitMix64;

/// Draws record indices without replacement: each epoch is a fresh seeded
/// permutation of `0..len`, consumed in batches. A batch never straddles two
/// epochs, so the last batch of an epoch may be short.
#[derive(Debug, Clone)]
pub struct EpochSampler {
    order: Vec<usize>,
    cursor: usize,
    epoch: usize,
    rng: SplitMix64,
}

impl EpochSampler {
    pub fn new(len: usize, seed: u64) -> Result<Self> {
        if len == 0 {
            return Err(Error::EmptyStore);
        }
        Ok(Self {
            order: (0..len).collect(),
            cursor: len,
            epoch: 0,
            rng: SplitMix64::new(seed),
        })
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Number of permutations drawn so far.
    pub fn epoch(&self) -> usize {
        self.epoch
    }

    /// Batches per epoch for a given batch size.
    pub fn batches_per_epoch(&self, batch_size: usize) -> usize {
        self.order.len().div_ceil(batch_size)
    }

    pub fn next_batch(&mut self, batch_size: usize) -> Vec<usize> {
        assert!(batch_size > 0, "batch_size must be positive");
        if self.cursor == self.order.len() {
            self.order.iter_mut().enumerate().for_each(|(i, v)| *v = i);
            self.rng.shuffle(&mut self.order);
            self.cursor = 0;
            self.epoch += 1;
        }
        let end = (self.cursor + batch_size).min(self.order.len());
        let batch = self.order[self.cursor..end].to_vec();
        self.cursor = end;
        batch
    }
}

/// The next batch of records from `store`.
pub fn sample_batch<'a>(
    store: &'a SegmentStore,
    batch_size: usize,
    sampler: &mut EpochSampler,
) -> Result<Vec<&'a Record>> {
    if store.is_empty() {
        return Err(Error::EmptyStore);
    }
    if sampler.len() != store.len() {
        return Err(Error::ShapeMismatch(format!(
            "sampler over {} records used with a store of {}",
            sampler.len(),
            store.len()
        )));
    }
    Ok(sampler
        .next_batch(batch_size)
        .into_iter()
        .map(|i| &store.records()[i])
        .collect())
}
