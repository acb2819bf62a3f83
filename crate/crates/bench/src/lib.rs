//! Shared fixtures for the criterion benchmarks.

use vfnet::data::synth_dataset;
use vfnet::dsp::{segments_of, DspConfig};
use vfnet::Spectrogram;

/// One model-sized segment cut from a synthetic clip.
pub fn synthetic_segment(seed: u64) -> Spectrogram {
    let dsp = DspConfig::default();
    let clips = synth_dataset(seed, 1, dsp.sample_rate_hz);
    segments_of(&clips[0].clip, &dsp)
        .expect("synthetic clip spans at least one segment")
        .remove(0)
}
