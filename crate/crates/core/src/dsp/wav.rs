use std::io::Cursor;

use crate::error::{Error, Result};

/// Mono audio with amplitudes in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip {
    samples: Vec<f64>,
    sample_rate_hz: u32,
}

impl AudioClip {
    pub fn new(samples: Vec<f64>, sample_rate_hz: u32) -> Result<Self> {
        if sample_rate_hz == 0 {
            return Err(Error::InvalidConfig("sample rate must be positive".into()));
        }
        if samples.is_empty() {
            return Err(Error::ShapeMismatch("audio clip has no samples".into()));
        }
        if let Some(i) = samples.iter().position(|a| !(-1.0..=1.0).contains(a)) {
            return Err(Error::ShapeMismatch(format!(
                "sample {i} = {} outside [-1, 1]",
                samples[i]
            )));
        }
        Ok(Self {
            samples,
            sample_rate_hz,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_secs(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz as f64
    }
}

/// Decodes a 16-bit PCM RIFF/WAVE file. Stereo frames are averaged to mono.
pub fn decode_wav(bytes: &[u8]) -> Result<AudioClip> {
    let reader = hound::WavReader::new(Cursor::new(bytes)).map_err(map_hound)?;
    let spec = reader.spec();
    if spec.sample_format != hound::SampleFormat::Int || spec.bits_per_sample != 16 {
        return Err(Error::UnsupportedEncoding(format!(
            "{:?} with {} bits per sample; only 16-bit PCM is accepted",
            spec.sample_format, spec.bits_per_sample
        )));
    }
    let channels = spec.channels as usize;
    if !(1..=2).contains(&channels) {
        return Err(Error::UnsupportedEncoding(format!(
            "{channels} channels; only mono or stereo is accepted"
        )));
    }
    let raw = reader
        .into_samples::<i16>()
        .collect::<std::result::Result<Vec<i16>, _>>()
        .map_err(map_hound)?;
    if raw.is_empty() {
        return Err(Error::MalformedHeader("data chunk holds no samples".into()));
    }
    let samples = raw
        .chunks_exact(channels)
        .map(|frame| {
            let sum: f64 = frame.iter().map(|&s| s as f64 / 32768.0).sum();
            sum / channels as f64
        })
        .collect();
    AudioClip::new(samples, spec.sample_rate)
}

/// Encodes a clip as mono 16-bit PCM, the inverse of [`decode_wav`] up to
/// quantization.
pub fn encode_wav(clip: &AudioClip) -> Result<Vec<u8>> {
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: clip.sample_rate_hz,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut cursor = Cursor::new(Vec::new());
    {
        let mut writer = hound::WavWriter::new(&mut cursor, spec).map_err(map_hound)?;
        for &a in &clip.samples {
            let q = (a * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
            writer.write_sample(q).map_err(map_hound)?;
        }
        writer.finalize().map_err(map_hound)?;
    }
    Ok(cursor.into_inner())
}

fn map_hound(e: hound::Error) -> Error {
    match e {
        hound::Error::IoError(io) => Error::MalformedHeader(format!("truncated or unreadable: {io}")),
        hound::Error::FormatError(msg) => Error::MalformedHeader(msg.to_string()),
        hound::Error::Unsupported => Error::UnsupportedEncoding("format not supported".into()),
        hound::Error::TooWide => Error::UnsupportedEncoding("sample too wide".into()),
        other => Error::MalformedHeader(other.to_string()),
    }
}

/// Linear-interpolation resampling, no anti-aliasing filter.
///
/// Output sample `i` sits at source position `i * source / target`; positions
/// are computed in integer arithmetic so the fractional part is exact.
pub fn resample(clip: &AudioClip, target_rate_hz: u32) -> AudioClip {
    assert!(target_rate_hz > 0, "target rate must be positive");
    let source = clip.sample_rate_hz as u64;
    let target = target_rate_hz as u64;
    if source == target {
        return clip.clone();
    }
    let n = clip.samples.len();
    let out_len = (n as u64 * target / source) as usize;
    let x = &clip.samples;
    let samples = (0..out_len as u64)
        .map(|i| {
            let num = i * source;
            let i0 = (num / target) as usize;
            let frac = (num % target) as f64 / target as f64;
            let a = x[i0];
            let b = x[(i0 + 1).min(n - 1)];
            a + (b - a) * frac
        })
        .collect();
    AudioClip {
        samples,
        sample_rate_hz: target_rate_hz,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Minimal hand-assembled RIFF container, independent of the encoder.
    fn wav_bytes(format_tag: u16, channels: u16, rate: u32, bits: u16, data: &[u8]) -> Vec<u8> {
        let block_align = channels * bits / 8;
        let mut b = Vec::new();
        b.extend_from_slice(b"RIFF");
        b.extend_from_slice(&(36 + data.len() as u32).to_le_bytes());
        b.extend_from_slice(b"WAVE");
        b.extend_from_slice(b"fmt ");
        b.extend_from_slice(&16u32.to_le_bytes());
        b.extend_from_slice(&format_tag.to_le_bytes());
        b.extend_from_slice(&channels.to_le_bytes());
        b.extend_from_slice(&rate.to_le_bytes());
        b.extend_from_slice(&(rate * block_align as u32).to_le_bytes());
        b.extend_from_slice(&block_align.to_le_bytes());
        b.extend_from_slice(&bits.to_le_bytes());
        b.extend_from_slice(b"data");
        b.extend_from_slice(&(data.len() as u32).to_le_bytes());
        b.extend_from_slice(data);
        b
    }

    fn pcm16(values: &[i16]) -> Vec<u8> {
        values.iter().flat_map(|v| v.to_le_bytes()).collect()
    }

    #[test]
    fn single_max_sample() {
        let clip = decode_wav(&wav_bytes(1, 1, 22050, 16, &pcm16(&[32767]))).unwrap();
        assert_eq!(clip.samples(), &[32767.0 / 32768.0]);
        assert!((clip.samples()[0] - 0.999969).abs() < 1e-6);
        assert_eq!(clip.sample_rate_hz(), 22050);
    }

    #[test]
    fn silence_decodes_to_zeros() {
        let clip = decode_wav(&wav_bytes(1, 1, 16000, 16, &pcm16(&[0; 64]))).unwrap();
        assert_eq!(clip.len(), 64);
        assert!(clip.samples().iter().all(|&s| s == 0.0));
    }

    #[test]
    fn stereo_is_averaged() {
        let clip = decode_wav(&wav_bytes(1, 2, 8000, 16, &pcm16(&[16384; 8]))).unwrap();
        assert_eq!(clip.samples(), &[0.5; 4]);
    }

    #[test]
    fn minimum_sample_maps_to_minus_one() {
        let clip = decode_wav(&wav_bytes(1, 1, 8000, 16, &pcm16(&[-32768, 0]))).unwrap();
        assert_eq!(clip.samples(), &[-1.0, 0.0]);
    }

    #[test]
    fn missing_riff_is_malformed() {
        let mut bytes = wav_bytes(1, 1, 8000, 16, &pcm16(&[1, 2]));
        bytes[..4].copy_from_slice(b"RIFX");
        assert!(matches!(decode_wav(&bytes), Err(Error::MalformedHeader(_))));
        assert!(matches!(decode_wav(b"nonsense"), Err(Error::MalformedHeader(_))));
        assert!(matches!(decode_wav(&[]), Err(Error::MalformedHeader(_))));
    }

    #[test]
    fn missing_data_chunk_is_malformed() {
        let bytes = wav_bytes(1, 1, 8000, 16, &[]);
        let header_only = &bytes[..36];
        assert!(matches!(decode_wav(header_only), Err(Error::MalformedHeader(_))));
    }

    #[test]
    fn eight_bit_is_unsupported() {
        let bytes = wav_bytes(1, 1, 8000, 8, &[128, 129]);
        assert!(matches!(decode_wav(&bytes), Err(Error::UnsupportedEncoding(_))));
    }

    #[test]
    fn float_is_unsupported() {
        let data: Vec<u8> = [0.5f32, -0.5].iter().flat_map(|v| v.to_le_bytes()).collect();
        let bytes = wav_bytes(3, 1, 8000, 32, &data);
        assert!(matches!(decode_wav(&bytes), Err(Error::UnsupportedEncoding(_))));
    }

    #[test]
    fn encode_decode_preserves_quantized_samples() {
        let samples: Vec<f64> = (-4..4).map(|k| k as f64 / 4.0).collect();
        let clip = AudioClip::new(samples.clone(), 16000).unwrap();
        let back = decode_wav(&encode_wav(&clip).unwrap()).unwrap();
        assert_eq!(back.samples(), samples.as_slice());
        assert_eq!(back.sample_rate_hz(), 16000);
    }

    #[test]
    fn resample_constant_halves_length() {
        let clip = AudioClip::new(vec![0.3; 3200], 32000).unwrap();
        let out = resample(&clip, 16000);
        assert_eq!(out.len(), 1600);
        assert_eq!(out.sample_rate_hz(), 16000);
        assert!(out.samples().iter().all(|&s| (s - 0.3).abs() < 1e-15));
    }

    #[test]
    fn resample_identity_is_exact() {
        let clip = AudioClip::new(vec![0.1, -0.7, 0.25, 0.0], 44100).unwrap();
        assert_eq!(resample(&clip, 44100), clip);
    }

    #[test]
    fn resample_ramp_matches_interpolation_formula() {
        let ramp: Vec<f64> = (0..10).map(|k| k as f64 / 10.0).collect();
        let clip = AudioClip::new(ramp.clone(), 4000).unwrap();
        let out = resample(&clip, 2000);
        assert_eq!(out.len(), 5);
        // Output i sits at source position 2i, an integer: x[2i] exactly.
        for (i, &y) in out.samples().iter().enumerate() {
            assert_eq!(y, ramp[2 * i]);
        }
    }

    #[test]
    fn resample_upsampling_interpolates_between_neighbours() {
        let clip = AudioClip::new(vec![0.0, 0.4, -0.4], 2000).unwrap();
        let out = resample(&clip, 5000);
        // floor(3 * 5/2) = 7 outputs at positions 0, .4, .8, 1.2, 1.6, 2.0, 2.4.
        let expected = [0.0, 0.16, 0.32, 0.24, -0.08, -0.4, -0.4];
        assert_eq!(out.len(), expected.len());
        for (y, e) in out.samples().iter().zip(expected) {
            assert!((y - e).abs() < 1e-12, "{y} vs {e}");
        }
    }
}
