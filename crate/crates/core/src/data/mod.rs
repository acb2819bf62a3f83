//! Corpus ingestion and the segment store that training reads from.

mod manifest;
mod preprocess;
mod sampler;
mod split;
mod store;
mod synth;

pub use manifest::{load_manifest, parse_manifest, write_manifest, ManifestEntry, MANIFEST_HEADER};
pub use preprocess::{preprocess_corpus, Preprocessed};
pub use sampler::{sample_batch, EpochSampler};
pub use split::split_by_speaker;
pub use store::{Record, SegmentStore, STORE_MAGIC, STORE_VERSION};
pub use synth::{synth_dataset, SynthClip, CLASS_BANDS_HZ};
