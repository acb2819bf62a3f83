//! Audio front end: WAV ingestion, resampling, windowed FFT analysis and the
//! log-magnitude spectrogram cut into fixed-width segments.

mod fft;
mod spectrogram;
mod wav;

pub use fft::{fft, naive_dft, Fft};
pub use spectrogram::{log_magnitude, make_window, segment, stft, Spectrogram, StftFrames, WindowKind};
pub use wav::{decode_wav, encode_wav, resample, AudioClip};

pub use num_complex::Complex64;

use crate::error::Result;

/// Front-end settings shared by preprocessing and inference.
#[derive(Debug, Clone, PartialEq)]
pub struct DspConfig {
    pub sample_rate_hz: u32,
    pub window_size: usize,
    pub hop: usize,
    pub window_kind: WindowKind,
    pub floor_eps: f64,
    pub segment_width: usize,
}

impl Default for DspConfig {
    fn default() -> Self {
        Self {
            sample_rate_hz: 16_000,
            window_size: 256,
            hop: 128,
            window_kind: WindowKind::Hann,
            floor_eps: 1e-10,
            segment_width: 120,
        }
    }
}

impl DspConfig {
    pub fn freq_bins(&self) -> usize {
        self.window_size / 2 + 1
    }
}

/// Resample, STFT and log-magnitude: the full spectrogram of one clip.
pub fn spectrogram_of(clip: &AudioClip, cfg: &DspConfig) -> Result<Spectrogram> {
    let clip = resample(clip, cfg.sample_rate_hz);
    let frames = stft(&clip, cfg.window_size, cfg.hop, cfg.window_kind)?;
    Ok(log_magnitude(&frames, cfg.floor_eps))
}

/// [`spectrogram_of`] cut into model-sized segments.
pub fn segments_of(clip: &AudioClip, cfg: &DspConfig) -> Result<Vec<Spectrogram>> {
    Ok(segment(&spectrogram_of(clip, cfg)?, cfg.segment_width))
}
