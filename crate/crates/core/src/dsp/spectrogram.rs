use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use super::fft::Fft;
use super::wav::AudioClip;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WindowKind {
    #[default]
    Hann,
    Rectangular,
}

impl FromStr for WindowKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hann" => Ok(WindowKind::Hann),
            "rectangular" | "rect" => Ok(WindowKind::Rectangular),
            other => Err(Error::InvalidConfig(format!("unknown window kind {other:?}"))),
        }
    }
}

impl fmt::Display for WindowKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WindowKind::Hann => "hann",
            WindowKind::Rectangular => "rectangular",
        })
    }
}

/// Symmetric window of length `n`.
pub fn make_window(kind: WindowKind, n: usize) -> Vec<f64> {
    assert!(n >= 1, "window length must be positive");
    match kind {
        WindowKind::Rectangular => vec![1.0; n],
        WindowKind::Hann if n == 1 => vec![1.0],
        WindowKind::Hann => {
            let denom = (n - 1) as f64;
            (0..n)
                .map(|k| 0.5 * (1.0 - (TAU * k as f64 / denom).cos()))
                .collect()
        }
    }
}

/// One-sided STFT, stored bin-major: `frames[bin * num_frames + frame]`.
#[derive(Debug, Clone, PartialEq)]
pub struct StftFrames {
    data: Vec<Complex64>,
    num_bins: usize,
    num_frames: usize,
    window_size: usize,
    hop: usize,
}

impl StftFrames {
    pub fn num_bins(&self) -> usize {
        self.num_bins
    }

    pub fn num_frames(&self) -> usize {
        self.num_frames
    }

    pub fn window_size(&self) -> usize {
        self.window_size
    }

    pub fn hop(&self) -> usize {
        self.hop
    }

    pub fn get(&self, bin: usize, frame: usize) -> Complex64 {
        self.data[bin * self.num_frames + frame]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    /// Frame count for a signal of `num_samples` samples.
    pub fn frame_count(num_samples: usize, window_size: usize, hop: usize) -> usize {
        if num_samples < window_size {
            0
        } else {
            (num_samples - window_size) / hop + 1
        }
    }
}

pub fn stft(clip: &AudioClip, window_size: usize, hop: usize, kind: WindowKind) -> Result<StftFrames> {
    assert!(hop >= 1, "hop must be positive");
    let plan = Fft::new(window_size)?;
    let x = clip.samples();
    if x.len() < window_size {
        return Err(Error::ClipTooShort {
            samples: x.len(),
            needed: window_size,
        });
    }
    let window = make_window(kind, window_size);
    let num_bins = window_size / 2 + 1;
    let num_frames = StftFrames::frame_count(x.len(), window_size, hop);
    let mut data = vec![Complex64::default(); num_bins * num_frames];
    let mut buf = vec![Complex64::default(); window_size];
    for frame in 0..num_frames {
        let start = frame * hop;
        for ((b, &s), &w) in buf.iter_mut().zip(&x[start..start + window_size]).zip(&window) {
            *b = Complex64::new(s * w, 0.0);
        }
        plan.process(&mut buf)?;
        for (bin, v) in buf[..num_bins].iter().enumerate() {
            data[bin * num_frames + frame] = *v;
        }
    }
    Ok(StftFrames {
        data,
        num_bins,
        num_frames,
        window_size,
        hop,
    })
}

/// Real `bins x cols` matrix, row-major (one row per frequency bin).
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram {
    bins: usize,
    cols: usize,
    values: Vec<f64>,
}

impl Spectrogram {
    pub fn new(bins: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if bins == 0 || cols == 0 {
            return Err(Error::ShapeMismatch(format!(
                "spectrogram dimensions must be positive, got {bins}x{cols}"
            )));
        }
        if values.len() != bins * cols {
            return Err(Error::ShapeMismatch(format!(
                "{} values for a {bins}x{cols} spectrogram",
                values.len()
            )));
        }
        Ok(Self { bins, cols, values })
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, bin: usize, col: usize) -> f64 {
        self.values[bin * self.cols + col]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Columns `[start, start + width)` as a new spectrogram.
    pub fn columns(&self, start: usize, width: usize) -> Spectrogram {
        assert!(width > 0 && start + width <= self.cols);
        let values = (0..self.bins)
            .flat_map(|b| {
                let row = b * self.cols;
                self.values[row + start..row + start + width].iter().copied()
            })
            .collect();
        Spectrogram {
            bins: self.bins,
            cols: width,
            values,
        }
    }

    /// Joins spectrograms of equal height side by side.
    pub fn concat_columns(parts: &[Spectrogram]) -> Result<Spectrogram> {
        let first = parts.first().ok_or(Error::EmptySegmentList)?;
        let bins = first.bins;
        if let Some(p) = parts.iter().find(|p| p.bins != bins) {
            return Err(Error::ShapeMismatch(format!("{} bins vs {bins}", p.bins)));
        }
        let cols: usize = parts.iter().map(|p| p.cols).sum();
        let mut values = Vec::with_capacity(bins * cols);
        for b in 0..bins {
            for p in parts {
                values.extend_from_slice(&p.values[b * p.cols..(b + 1) * p.cols]);
            }
        }
        Ok(Spectrogram { bins, cols, values })
    }
}

/// `ln(max(|z|, floor_eps))` for every STFT coefficient.
pub fn log_magnitude(frames: &StftFrames, floor_eps: f64) -> Spectrogram {
    assert!(floor_eps > 0.0, "floor_eps must be positive");
    Spectrogram {
        bins: frames.num_bins,
        cols: frames.num_frames,
        values: frames.data.iter().map(|z| z.norm().max(floor_eps).ln()).collect(),
    }
}

/// Splits into `floor(cols / width)` segments of exactly `width` columns, left
/// to right. Trailing columns that do not fill a segment are dropped.
pub fn segment(spec: &Spectrogram, width: usize) -> Vec<Spectrogram> {
    assert!(width >= 1, "segment width must be positive");
    (0..spec.cols / width)
        .map(|i| spec.columns(i * width, width))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::naive_dft;

    #[test]
    fn hann_four() {
        let w = make_window(WindowKind::Hann, 4);
        // 0.5 (1 - cos(2 pi k / 3)): 0, 0.75, 0.75, 0
        let expected = [0.0, 0.75, 0.75, 0.0];
        for (a, b) in w.iter().zip(expected) {
            assert!((a - b).abs() < 1e-15, "{w:?}");
        }
    }

    #[test]
    fn hann_five_endpoints_and_center() {
        let w = make_window(WindowKind::Hann, 5);
        assert!(w[0].abs() < 1e-15 && w[4].abs() < 1e-15);
        assert!((w[2] - 1.0).abs() < 1e-15);
        assert!((w[1] - w[3]).abs() < 1e-15);
    }

    #[test]
    fn degenerate_and_rectangular_windows() {
        assert_eq!(make_window(WindowKind::Hann, 1), vec![1.0]);
        assert_eq!(make_window(WindowKind::Rectangular, 3), vec![1.0; 3]);
    }

    #[test]
    fn window_kind_parses() {
        assert_eq!("Hann".parse::<WindowKind>().unwrap(), WindowKind::Hann);
        assert_eq!("rectangular".parse::<WindowKind>().unwrap(), WindowKind::Rectangular);
        assert!("hamming".parse::<WindowKind>().is_err());
    }

    fn clip(samples: Vec<f64>) -> AudioClip {
        AudioClip::new(samples, 16000).unwrap()
    }

    #[test]
    fn zero_signal_gives_zero_frames() {
        let frames = stft(&clip(vec![0.0; 1000]), 64, 16, WindowKind::Hann).unwrap();
        assert!(frames.as_slice().iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn bin_four_sine_matches_per_frame_dft() {
        let n = 64;
        let samples: Vec<f64> = (0..n * 5)
            .map(|t| 0.5 * (TAU * 4.0 * t as f64 / n as f64).sin())
            .collect();
        let frames = stft(&clip(samples.clone()), n, n, WindowKind::Rectangular).unwrap();
        assert_eq!(frames.num_frames(), 5);
        assert_eq!(frames.num_bins(), 33);
        for f in 0..frames.num_frames() {
            let peak = (0..frames.num_bins())
                .max_by(|&a, &b| frames.get(a, f).norm().total_cmp(&frames.get(b, f).norm()))
                .unwrap();
            assert_eq!(peak, 4);
            let chunk: Vec<Complex64> = samples[f * n..(f + 1) * n]
                .iter()
                .map(|&s| Complex64::new(s, 0.0))
                .collect();
            let oracle = naive_dft(&chunk);
            for bin in 0..frames.num_bins() {
                assert!((frames.get(bin, f) - oracle[bin]).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn window_plus_hop_gives_two_frames() {
        let frames = stft(&clip(vec![0.1; 256 + 128]), 256, 128, WindowKind::Hann).unwrap();
        assert_eq!(frames.num_frames(), 2);
    }

    #[test]
    fn short_clip_rejected() {
        let err = stft(&clip(vec![0.1; 100]), 256, 128, WindowKind::Hann).unwrap_err();
        assert!(matches!(err, Error::ClipTooShort { samples: 100, needed: 256 }));
    }

    #[test]
    fn non_power_of_two_window_rejected() {
        let err = stft(&clip(vec![0.1; 1000]), 200, 100, WindowKind::Hann).unwrap_err();
        assert!(matches!(err, Error::LengthNotPowerOfTwo(200)));
    }

    fn frames_of(values: &[Complex64]) -> StftFrames {
        StftFrames {
            data: values.to_vec(),
            num_bins: values.len(),
            num_frames: 1,
            window_size: 2 * (values.len() - 1),
            hop: 1,
        }
    }

    #[test]
    fn log_magnitude_examples() {
        let frames = frames_of(&[
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(std::f64::consts::E, 0.0),
        ]);
        let spec = log_magnitude(&frames, 1e-10);
        assert_eq!(spec.get(0, 0), 0.0);
        assert!((spec.get(1, 0) - (-23.025_850_929_940_457)).abs() < 1e-12);
        assert!((spec.get(2, 0) - 1.0).abs() < 1e-15);
    }

    fn ramp_spec(bins: usize, cols: usize) -> Spectrogram {
        Spectrogram::new(bins, cols, (0..bins * cols).map(|v| v as f64).collect()).unwrap()
    }

    #[test]
    fn segment_counts() {
        let s = ramp_spec(3, 365);
        let segs = segment(&s, 120);
        assert_eq!(segs.len(), 3);
        assert!(segs.iter().all(|g| g.bins() == 3 && g.cols() == 120));
        assert_eq!(segs[1].get(2, 0), s.get(2, 120));

        let s = ramp_spec(3, 120);
        assert_eq!(segment(&s, 120), vec![s.clone()]);

        assert!(segment(&ramp_spec(3, 119), 120).is_empty());
    }

    #[test]
    fn spectrogram_shape_checked() {
        assert!(Spectrogram::new(0, 4, vec![]).is_err());
        assert!(Spectrogram::new(2, 2, vec![0.0; 3]).is_err());
    }
}
