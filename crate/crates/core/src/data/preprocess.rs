use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::manifest::ManifestEntry;
use super::store::SegmentStore;
use crate::config::TrainConfig;
use crate::dsp::{decode_wav, segments_of, Spectrogram};
use crate::error::{Error, Result};

#[derive(Debug)]
pub struct Preprocessed {
    pub store: SegmentStore,
    /// Clips that produced no segment (too short for one window or one
    /// segment width).
    pub skipped: Vec<PathBuf>,
}

/// Turns every manifest entry into labelled segments and writes the store to
/// `out_path`. Clips are processed in parallel; records are assembled in
/// manifest order, then segment order.
pub fn preprocess_corpus(entries: &[ManifestEntry], cfg: &TrainConfig, out_path: impl AsRef<Path>) -> Result<Preprocessed> {
    let dsp = &cfg.dsp;
    let per_clip: Vec<Result<Vec<Spectrogram>>> = entries
        .par_iter()
        .map(|e| clip_segments(&e.path, cfg).map_err(|err| err.at_path(&e.path)))
        .collect();

    let mut store = SegmentStore::new(dsp.freq_bins(), dsp.segment_width);
    let mut skipped = Vec::new();
    for (entry, segments) in entries.iter().zip(per_clip) {
        let segments = segments?;
        if segments.is_empty() {
            log::warn!("{}: shorter than one segment, no records produced", entry.path.display());
            skipped.push(entry.path.clone());
        }
        for s in &segments {
            store.push(s, entry.label, &entry.speaker_id)?;
        }
    }
    store.write(out_path)?;
    Ok(Preprocessed { store, skipped })
}

fn clip_segments(path: &Path, cfg: &TrainConfig) -> Result<Vec<Spectrogram>> {
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let clip = decode_wav(&fs::read(path)?)?;
    match segments_of(&clip, &cfg.dsp) {
        Err(Error::ClipTooShort { .. }) => Ok(Vec::new()),
        other => other,
    }
}
