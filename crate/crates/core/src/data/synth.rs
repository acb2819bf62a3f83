//! Band-limited synthetic "accents": each class is a mix of tones confined
//! to its own frequency band, separated from the others by wide guard bands.

use std::f64::consts::TAU;

use crate::dsp::AudioClip;
use crate::label::{Label, NUM_CLASSES};
use crate::rng::SplitMix64;

/// Tone band per class, in Hz, indexed by class.
pub const CLASS_BANDS_HZ: [(f64, f64); NUM_CLASSES] = [(300.0, 800.0), (1200.0, 2000.0), (2800.0, 3600.0)];

const TONES_PER_CLIP: usize = 6;
const DURATION_SECS: f64 = 2.0;
/// Signal-to-noise ratio of the additive white noise, in dB.
const SNR_DB: f64 = 20.0;
const PEAK: f64 = 0.8;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthClip {
    pub clip: AudioClip,
    pub label: Label,
    pub speaker_id: String,
}

/// `clips_per_class` clips per label, each 2 s long and with its own speaker
/// id, generated class by class from one seeded stream.
pub fn synth_dataset(seed: u64, clips_per_class: usize, sample_rate_hz: u32) -> Vec<SynthClip> {
    assert!(clips_per_class >= 1, "clips_per_class must be positive");
    let mut rng = SplitMix64::new(seed);
    let mut out = Vec::with_capacity(NUM_CLASSES * clips_per_class);
    for label in Label::ALL {
        for i in 0..clips_per_class {
            let clip = synth_clip(&mut rng, CLASS_BANDS_HZ[label.index()], sample_rate_hz);
            out.push(SynthClip {
                clip,
                label,
                speaker_id: format!("{}_{i:03}", label.name().to_ascii_lowercase()),
            });
        }
    }
    out
}

fn synth_clip(rng: &mut SplitMix64, (lo, hi): (f64, f64), rate: u32) -> AudioClip {
    let n = (DURATION_SECS * rate as f64).round() as usize;
    let tones: Vec<(f64, f64, f64)> = (0..TONES_PER_CLIP)
        .map(|_| (rng.uniform(lo, hi), rng.uniform(0.5, 1.0), rng.uniform(0.0, TAU)))
        .collect();
    let mut x: Vec<f64> = (0..n)
        .map(|k| {
            let t = k as f64 / rate as f64;
            tones.iter().map(|&(f, a, p)| a * (TAU * f * t + p).sin()).sum()
        })
        .collect();
    let power = x.iter().map(|v| v * v).sum::<f64>() / n as f64;
    let sigma = (power / 10f64.powf(SNR_DB / 10.0)).sqrt();
    x.iter_mut().for_each(|v| *v += sigma * rng.gaussian());
    let peak = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let gain = if peak > 0.0 { PEAK / peak } else { 1.0 };
    x.iter_mut().for_each(|v| *v *= gain);
    AudioClip::new(x, rate).expect("peak-normalized samples lie in [-1, 1]")
}
