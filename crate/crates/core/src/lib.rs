//! Accent classification from log-magnitude spectrograms with a
//! variable-filter-height convolutional network, written without an ML
//! framework: FFT front end, analytic backpropagation, Adam, and
//! confusion-matrix reporting.

pub mod config;
pub mod data;
pub mod dsp;
pub mod error;
pub mod eval;
pub mod label;
pub mod metrics;
pub mod model;
pub mod optim;
pub mod rng;
pub mod tensor;

pub use config::TrainConfig;
pub use data::{ManifestEntry, SegmentStore};
pub use dsp::{AudioClip, DspConfig, Spectrogram, WindowKind};
pub use error::{Error, Result};
pub use eval::{evaluate, Evaluation};
pub use label::{Label, NUM_CLASSES};
pub use metrics::ConfusionMatrix;
pub use model::{VFNetConfig, VFNetParams};
pub use optim::{train, AdamState, EpochMetrics, TrainOutcome};
pub use tensor::Tensor;
