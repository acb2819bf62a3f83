//! Binary segment store, little-endian:
//!
//! ```text
//! magic     8 bytes "VFNSEGST"
//! version   u32
//! f, t      u32, u32
//! records   u64
//! speakers  u32 count, then per speaker u32 byte length + UTF-8 bytes
//! record    label u8, speaker u32, f*t f32 values (row-major, bin by bin)
//! ```

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use crate::dsp::Spectrogram;
use crate::error::{Error, Result};
use crate::label::{Label, NUM_CLASSES};

pub const STORE_MAGIC: &[u8; 8] = b"VFNSEGST";
pub const STORE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub label: Label,
    pub speaker: u32,
    pub values: Vec<f32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentStore {
    freq_bins: usize,
    segment_width: usize,
    speakers: Vec<String>,
    speaker_index: HashMap<String, u32>,
    records: Vec<Record>,
}

impl SegmentStore {
    pub fn new(freq_bins: usize, segment_width: usize) -> Self {
        Self {
            freq_bins,
            segment_width,
            speakers: Vec::new(),
            speaker_index: HashMap::new(),
            records: Vec::new(),
        }
    }

    pub fn freq_bins(&self) -> usize {
        self.freq_bins
    }

    pub fn segment_width(&self) -> usize {
        self.segment_width
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn speakers(&self) -> &[String] {
        &self.speakers
    }

    pub fn speaker_name(&self, index: u32) -> &str {
        &self.speakers[index as usize]
    }

    /// Appends a segment, narrowing values to `f32`.
    pub fn push(&mut self, segment: &Spectrogram, label: Label, speaker: &str) -> Result<()> {
        if segment.bins() != self.freq_bins || segment.cols() != self.segment_width {
            return Err(Error::ShapeMismatch(format!(
                "segment {}x{} pushed into a {}x{} store",
                segment.bins(),
                segment.cols(),
                self.freq_bins,
                self.segment_width
            )));
        }
        let speaker = self.intern(speaker);
        self.records.push(Record {
            label,
            speaker,
            values: segment.values().iter().map(|&v| v as f32).collect(),
        });
        Ok(())
    }

    fn intern(&mut self, speaker: &str) -> u32 {
        if let Some(&i) = self.speaker_index.get(speaker) {
            return i;
        }
        let i = self.speakers.len() as u32;
        self.speakers.push(speaker.to_string());
        self.speaker_index.insert(speaker.to_string(), i);
        i
    }

    /// Record `i` widened back to `f64`.
    pub fn spectrogram(&self, i: usize) -> Spectrogram {
        let values = self.records[i].values.iter().map(|&v| v as f64).collect();
        Spectrogram::new(self.freq_bins, self.segment_width, values).expect("store shape invariant")
    }

    pub fn label_counts(&self) -> [usize; NUM_CLASSES] {
        let mut counts = [0; NUM_CLASSES];
        for r in &self.records {
            counts[r.label.index()] += 1;
        }
        counts
    }

    /// Record indices grouped by speaker, in speaker-table order.
    pub fn records_by_speaker(&self) -> BTreeMap<u32, Vec<usize>> {
        let mut groups: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        for (i, r) in self.records.iter().enumerate() {
            groups.entry(r.speaker).or_default().push(i);
        }
        groups
    }

    /// A new store holding the records for which `keep` is true, in order,
    /// with the speaker table compacted to the speakers that remain.
    pub fn filter(&self, mut keep: impl FnMut(&Record) -> bool) -> SegmentStore {
        let mut out = SegmentStore::new(self.freq_bins, self.segment_width);
        for r in self.records.iter().filter(|r| keep(r)) {
            let speaker = out.intern(&self.speakers[r.speaker as usize]);
            out.records.push(Record {
                label: r.label,
                speaker,
                values: r.values.clone(),
            });
        }
        out
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let per_record = 5 + 4 * self.freq_bins * self.segment_width;
        let mut out = Vec::with_capacity(32 + self.records.len() * per_record);
        out.extend_from_slice(STORE_MAGIC);
        out.extend_from_slice(&STORE_VERSION.to_le_bytes());
        out.extend_from_slice(&(self.freq_bins as u32).to_le_bytes());
        out.extend_from_slice(&(self.segment_width as u32).to_le_bytes());
        out.extend_from_slice(&(self.records.len() as u64).to_le_bytes());
        out.extend_from_slice(&(self.speakers.len() as u32).to_le_bytes());
        for s in &self.speakers {
            out.extend_from_slice(&(s.len() as u32).to_le_bytes());
            out.extend_from_slice(s.as_bytes());
        }
        for r in &self.records {
            out.push(r.label.index() as u8);
            out.extend_from_slice(&r.speaker.to_le_bytes());
            for v in &r.values {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Cursor { bytes, pos: 0 };
        if r.take(8)? != STORE_MAGIC {
            return Err(Error::FormatVersionMismatch("not a segment store (bad magic)".into()));
        }
        let version = r.u32()?;
        if version != STORE_VERSION {
            return Err(Error::FormatVersionMismatch(format!(
                "segment store version {version}, expected {STORE_VERSION}"
            )));
        }
        let f = r.u32()? as usize;
        let t = r.u32()? as usize;
        if f == 0 || t == 0 {
            return Err(Error::FormatVersionMismatch(format!("store shape {f}x{t}")));
        }
        let count = r.u64()?;
        let mut store = SegmentStore::new(f, t);
        let n_speakers = r.u32()?;
        for _ in 0..n_speakers {
            let len = r.u32()? as usize;
            let name = std::str::from_utf8(r.take(len)?)
                .map_err(|_| Error::FormatVersionMismatch("speaker name is not UTF-8".into()))?;
            if store.speaker_index.contains_key(name) {
                return Err(Error::FormatVersionMismatch(format!("duplicate speaker {name:?}")));
            }
            store.intern(name);
        }
        let per_record = 5 + 4 * f * t;
        let remaining = (bytes.len() - r.pos) as u64;
        if remaining != count.saturating_mul(per_record as u64) {
            return Err(Error::FormatVersionMismatch(format!(
                "{count} records need {} bytes, found {remaining}",
                count.saturating_mul(per_record as u64)
            )));
        }
        store.records.reserve(count as usize);
        for i in 0..count {
            let label = r.take(1)?[0];
            let label = Label::from_index(label as usize).ok_or_else(|| {
                Error::FormatVersionMismatch(format!("record {i}: label index {label}"))
            })?;
            let speaker = r.u32()?;
            if speaker >= n_speakers {
                return Err(Error::FormatVersionMismatch(format!(
                    "record {i}: speaker index {speaker} beyond table of {n_speakers}"
                )));
            }
            let values = r
                .take(4 * f * t)?
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
                .collect();
            store.records.push(Record {
                label,
                speaker,
                values,
            });
        }
        Ok(store)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_bytes()).map_err(|e| Error::from(e).at_path(path))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        if !path.exists() {
            return Err(Error::MissingFile(path.to_path_buf()));
        }
        let bytes = fs::read(path).map_err(|e| Error::from(e).at_path(path))?;
        Self::from_bytes(&bytes).map_err(|e| e.at_path(path))
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(Error::FormatVersionMismatch("segment store truncated".into()));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn seg(f: usize, t: usize, fill: f64) -> Spectrogram {
        Spectrogram::new(f, t, (0..f * t).map(|i| fill + i as f64 * 0.25).collect()).unwrap()
    }

    #[test]
    fn push_interns_speakers() {
        let mut s = SegmentStore::new(2, 3);
        s.push(&seg(2, 3, 0.0), Label::Eng, "a").unwrap();
        s.push(&seg(2, 3, 1.0), Label::Man, "b").unwrap();
        s.push(&seg(2, 3, 2.0), Label::Eng, "a").unwrap();
        assert_eq!(s.speakers(), &["a".to_string(), "b".to_string()]);
        assert_eq!(s.records()[2].speaker, 0);
        assert_eq!(s.label_counts(), [2, 0, 1]);
        assert_eq!(s.spectrogram(1), seg(2, 3, 1.0));
        assert!(s.push(&seg(3, 3, 0.0), Label::Eng, "a").is_err());
    }

    #[test]
    fn corrupt_stores_rejected() {
        let mut s = SegmentStore::new(2, 2);
        s.push(&seg(2, 2, 0.0), Label::Ara, "x").unwrap();
        let bytes = s.to_bytes();
        for cut in [0, 7, 12, 20, bytes.len() - 1] {
            assert!(matches!(
                SegmentStore::from_bytes(&bytes[..cut]),
                Err(Error::FormatVersionMismatch(_))
            ));
        }
        let mut bad_label = bytes.clone();
        let label_at = bytes.len() - (5 + 16);
        bad_label[label_at] = 3;
        assert!(SegmentStore::from_bytes(&bad_label).is_err());
        let mut bad_speaker = bytes.clone();
        bad_speaker[label_at + 1] = 1;
        assert!(SegmentStore::from_bytes(&bad_speaker).is_err());
        let mut bad_magic = bytes;
        bad_magic[3] = 0;
        assert!(SegmentStore::from_bytes(&bad_magic).is_err());
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.bin");
        let mut s = SegmentStore::new(2, 2);
        s.push(&seg(2, 2, -3.5), Label::Man, "spk").unwrap();
        s.write(&path).unwrap();
        assert_eq!(SegmentStore::read(&path).unwrap(), s);
        assert!(matches!(
            SegmentStore::read(dir.path().join("nope")),
            Err(Error::MissingFile(_))
        ));
    }

    proptest! {
        #[test]
        fn round_trip_and_counts(
            rows in proptest::collection::vec((0usize..3, 0usize..4, proptest::collection::vec(-30.0f32..10.0, 6)), 0..20)
        ) {
            let mut s = SegmentStore::new(3, 2);
            for (label, speaker, values) in &rows {
                let sp = Spectrogram::new(3, 2, values.iter().map(|&v| v as f64).collect()).unwrap();
                s.push(&sp, Label::from_index(*label).unwrap(), &format!("spk{speaker}")).unwrap();
            }
            let back = SegmentStore::from_bytes(&s.to_bytes()).unwrap();
            prop_assert_eq!(&back, &s);
            prop_assert_eq!(back.label_counts().iter().sum::<usize>(), back.len());
            for (r, (_, _, values)) in back.records().iter().zip(&rows) {
                prop_assert_eq!(&r.values, values);
            }
        }
    }
}
