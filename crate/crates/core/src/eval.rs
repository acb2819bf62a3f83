//! Store-level evaluation at segment and clip granularity.

use rayon::prelude::*;

use crate::data::SegmentStore;
use crate::error::{Error, Result};
use crate::metrics::ConfusionMatrix;
use crate::model::{combine_posteriors, predict_segment, VFNetParams};

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub segments: ConfusionMatrix,
    /// One item per speaker: the mean posterior over that speaker's segments.
    pub clips: ConfusionMatrix,
}

fn posteriors(params: &VFNetParams, store: &SegmentStore) -> Result<Vec<(usize, Vec<f64>)>> {
    (0..store.len())
        .into_par_iter()
        .map(|i| predict_segment(params, &store.spectrogram(i)))
        .collect()
}

pub fn evaluate(params: &VFNetParams, store: &SegmentStore) -> Result<Evaluation> {
    if store.is_empty() {
        return Err(Error::EmptyStore);
    }
    let preds = posteriors(params, store)?;
    let mut segments = ConfusionMatrix::new();
    for ((class, _), record) in preds.iter().zip(store.records()) {
        segments.update(*class, record.label.index())?;
    }
    let mut clips = ConfusionMatrix::new();
    for indices in store.records_by_speaker().values() {
        let post: Vec<Vec<f64>> = indices.iter().map(|&i| preds[i].1.clone()).collect();
        let (class, _) = combine_posteriors(&post)?;
        clips.update(class, store.records()[indices[0]].label.index())?;
    }
    Ok(Evaluation { segments, clips })
}

/// Fraction (not percentage) of segments classified correctly.
pub fn segment_accuracy(params: &VFNetParams, store: &SegmentStore) -> Result<f64> {
    if store.is_empty() {
        return Err(Error::EmptyStore);
    }
    let preds = posteriors(params, store)?;
    let correct = preds
        .iter()
        .zip(store.records())
        .filter(|((class, _), r)| *class == r.label.index())
        .count();
    Ok(correct as f64 / store.len() as f64)
}
