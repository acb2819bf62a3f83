use crate::dsp::DspConfig;
use crate::error::{Error, Result};
use crate::label::NUM_CLASSES;
use crate::model::VFNetConfig;

/// Every pipeline hyperparameter in one record.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_eps: f64,
    pub batch_size: usize,
    pub epochs: usize,
    /// Root seed; consumers derive their own streams via `rng::seed_offset`.
    pub seed: u64,
    pub test_fraction: f64,
    pub dsp: DspConfig,
    pub filter_heights: Vec<usize>,
    pub channels_per_height: usize,
    pub pool_regions: usize,
    pub hidden_units: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        let model = VFNetConfig::default();
        Self {
            learning_rate: 0.001,
            beta1: 0.9,
            beta2: 0.999,
            adam_eps: 1e-8,
            batch_size: 32,
            epochs: 30,
            seed: 0,
            test_fraction: 0.2,
            dsp: DspConfig::default(),
            filter_heights: model.filter_heights,
            channels_per_height: model.channels_per_height,
            pool_regions: model.pool_regions,
            hidden_units: model.hidden_units,
        }
    }
}

impl TrainConfig {
    /// The classifier architecture implied by these settings.
    pub fn model_config(&self) -> VFNetConfig {
        VFNetConfig {
            filter_heights: self.filter_heights.clone(),
            channels_per_height: self.channels_per_height,
            freq_bins: self.dsp.freq_bins(),
            segment_width: self.dsp.segment_width,
            pool_regions: self.pool_regions,
            hidden_units: self.hidden_units,
            num_classes: NUM_CLASSES,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return bad("beta1 and beta2 must lie in [0, 1)");
        }
        if !(self.adam_eps > 0.0) {
            return bad("adam_eps must be positive");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1");
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return bad("test_fraction must lie in (0, 1)");
        }
        let d = &self.dsp;
        if d.sample_rate_hz == 0 {
            return bad("sample_rate_hz must be positive");
        }
        if !d.window_size.is_power_of_two() || d.window_size < 2 {
            return bad("window_size must be a power of two >= 2");
        }
        if d.hop == 0 || d.segment_width == 0 {
            return bad("hop and segment_width must be positive");
        }
        if !(d.floor_eps > 0.0) {
            return bad("floor_eps must be positive");
        }
        self.model_config().validate()
    }
}
