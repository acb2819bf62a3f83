use std::collections::HashSet;

use super::store::SegmentStore;
use crate::error::{Error, Result};
use crate::label::{Label, NUM_CLASSES};
use crate::rng::SplitMix64;

/// Partitions a store by speaker: every segment of a speaker lands on the
/// same side. Returns `(train, test)`.
///
/// Speakers are shuffled once with the seeded generator, then labels take
/// turns claiming their next shuffled speaker for the test side until each
/// holds `ceil(test_fraction * n_label)` speakers, clamped to `[1, n - 1]`.
/// A speaker's label is the label of its first record.
pub fn split_by_speaker(
    store: &SegmentStore,
    test_fraction: f64,
    seed: u64,
) -> Result<(SegmentStore, SegmentStore)> {
    assert!(
        test_fraction > 0.0 && test_fraction < 1.0,
        "test_fraction must lie in (0, 1)"
    );
    let mut speakers: Vec<(u32, Label)> = store
        .records_by_speaker()
        .into_iter()
        .map(|(spk, idx)| (spk, store.records()[idx[0]].label))
        .collect();
    SplitMix64::new(seed).shuffle(&mut speakers);

    let queues: Vec<Vec<u32>> = Label::ALL
        .iter()
        .map(|&l| speakers.iter().filter(|s| s.1 == l).map(|s| s.0).collect())
        .collect();
    let mut quotas = [0usize; NUM_CLASSES];
    for (label, queue) in Label::ALL.iter().zip(&queues) {
        let n = queue.len();
        match n {
            0 => continue,
            1 => {
                return Err(Error::TooFewSpeakers {
                    label: label.name(),
                    speakers: 1,
                })
            }
            _ => {}
        }
        let wanted = (test_fraction * n as f64 - 1e-9).ceil() as usize;
        quotas[label.index()] = wanted.clamp(1, n - 1);
    }

    let mut taken = [0usize; NUM_CLASSES];
    let mut test_speakers = HashSet::new();
    while (0..NUM_CLASSES).any(|l| taken[l] < quotas[l]) {
        for l in 0..NUM_CLASSES {
            if taken[l] < quotas[l] {
                test_speakers.insert(queues[l][taken[l]]);
                taken[l] += 1;
            }
        }
    }
    let train = store.filter(|r| !test_speakers.contains(&r.speaker));
    let test = store.filter(|r| test_speakers.contains(&r.speaker));
    Ok((train, test))
}
