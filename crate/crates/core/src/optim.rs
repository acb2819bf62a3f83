//! Adam and the mini-batch training loop.

use std::io::Write;

use rayon::prelude::*;

use crate::config::TrainConfig;
use crate::data::{EpochSampler, SegmentStore};
use crate::error::{Error, Result};
use crate::eval::segment_accuracy;
use crate::model::{backward_into, forward, init_params, VFNetParams};
use crate::rng::{derive_seed, seed_offset};

/// Adam hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Adam {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Adam {
    pub fn from_config(cfg: &TrainConfig) -> Self {
        Self {
            learning_rate: cfg.learning_rate,
            beta1: cfg.beta1,
            beta2: cfg.beta2,
            eps: cfg.adam_eps,
        }
    }

    /// One bias-corrected update of `theta` in place, `step` being the
    /// 1-based index of this update.
    pub fn update(&self, theta: &mut [f64], grad: &[f64], m: &mut [f64], v: &mut [f64], step: u64) {
        let t = step as i32;
        let c1 = 1.0 - self.beta1.powi(t);
        let c2 = 1.0 - self.beta2.powi(t);
        for (((p, &g), m), v) in theta.iter_mut().zip(grad).zip(m.iter_mut()).zip(v.iter_mut()) {
            *m = self.beta1 * *m + (1.0 - self.beta1) * g;
            *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *p -= self.learning_rate * m_hat / (v_hat.sqrt() + self.eps);
        }
    }
}

/// First and second moment estimates plus the update counter.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: VFNetParams,
    pub v: VFNetParams,
    pub step: u64,
}

impl AdamState {
    pub fn new(params: &VFNetParams) -> Result<Self> {
        Ok(Self {
            m: VFNetParams::zeros(params.config())?,
            v: VFNetParams::zeros(params.config())?,
            step: 0,
        })
    }
}

/// Applies one Adam update to every parameter. Nothing is modified when the
/// gradient has a non-finite coordinate.
pub fn adam_step(params: &mut VFNetParams, grads: &VFNetParams, state: &mut AdamState, cfg: &TrainConfig) -> Result<()> {
    if !grads.same_shape(params) || !state.m.same_shape(params) || !state.v.same_shape(params) {
        return Err(Error::ShapeMismatch("parameters, gradients and Adam state disagree".into()));
    }
    if let Some(i) = grads
        .tensors()
        .iter()
        .flat_map(|t| t.data())
        .position(|g| !g.is_finite())
    {
        return Err(Error::NonFiniteGradient(i));
    }
    state.step += 1;
    let adam = Adam::from_config(cfg);
    let step = state.step;
    let AdamState { m, v, .. } = state;
    for (((p, g), m), v) in params
        .tensors_mut()
        .into_iter()
        .zip(grads.tensors())
        .zip(m.tensors_mut())
        .zip(v.tensors_mut())
    {
        adam.update(p.data_mut(), g.data(), m.data_mut(), v.data_mut(), step);
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochMetrics {
    /// 1-based.
    pub epoch: usize,
    /// Mean per-segment loss over the epoch, each measured before the update
    /// of its batch.
    pub train_loss: f64,
    /// Fraction of eval segments classified correctly after the epoch.
    pub eval_segment_accuracy: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: VFNetParams,
    pub state: AdamState,
    pub log: Vec<EpochMetrics>,
}

/// Trains from a fresh initialization. The run is a deterministic function
/// of `cfg` and the two stores: per-segment work runs in parallel but
/// gradients are reduced in batch order on one thread.
pub fn train(cfg: &TrainConfig, store: &SegmentStore, eval_store: &SegmentStore) -> Result<TrainOutcome> {
    train_with(cfg, store, eval_store, |m| {
        log::info!(
            "epoch {:>3}  loss {:.6}  eval segment accuracy {:.4}",
            m.epoch,
            m.train_loss,
            m.eval_segment_accuracy
        )
    })
}

/// [`train`] with a callback after every epoch.
pub fn train_with(
    cfg: &TrainConfig,
    store: &SegmentStore,
    eval_store: &SegmentStore,
    mut on_epoch: impl FnMut(&EpochMetrics),
) -> Result<TrainOutcome> {
    cfg.validate()?;
    if store.is_empty() || eval_store.is_empty() {
        return Err(Error::EmptyStore);
    }
    let model_cfg = cfg.model_config();
    for s in [store, eval_store] {
        if s.freq_bins() != model_cfg.freq_bins || s.segment_width() != model_cfg.segment_width {
            return Err(Error::ShapeMismatch(format!(
                "store segments are {}x{}, config expects {}x{}",
                s.freq_bins(),
                s.segment_width(),
                model_cfg.freq_bins,
                model_cfg.segment_width
            )));
        }
    }

    let mut params = init_params(&model_cfg, derive_seed(cfg.seed, seed_offset::INIT))?;
    let mut state = AdamState::new(&params)?;
    let mut grads = VFNetParams::zeros(&model_cfg)?;
    let mut sampler = EpochSampler::new(store.len(), derive_seed(cfg.seed, seed_offset::SHUFFLE))?;
    let batches = sampler.batches_per_epoch(cfg.batch_size);
    let mut log = Vec::with_capacity(cfg.epochs);

    for epoch in 1..=cfg.epochs {
        let mut loss_sum = 0.0;
        for _ in 0..batches {
            let batch = sampler.next_batch(cfg.batch_size);
            let caches = batch
                .par_iter()
                .map(|&i| forward(&params, &store.spectrogram(i)).map(|(_, c)| c))
                .collect::<Result<Vec<_>>>()?;
            grads.fill_zero();
            let scale = 1.0 / batch.len() as f64;
            for (&i, cache) in batch.iter().zip(&caches) {
                let label = store.records()[i].label.index();
                loss_sum += backward_into(&params, cache, label, scale, &mut grads)?;
            }
            adam_step(&mut params, &grads, &mut state, cfg)?;
        }
        let metrics = EpochMetrics {
            epoch,
            train_loss: loss_sum / store.len() as f64,
            eval_segment_accuracy: segment_accuracy(&params, eval_store)?,
        };
        on_epoch(&metrics);
        log.push(metrics);
    }
    Ok(TrainOutcome { params, state, log })
}

pub const METRICS_CSV_HEADER: &str = "epoch,train_loss,eval_segment_accuracy";

pub fn write_metrics_csv(log: &[EpochMetrics], mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "{METRICS_CSV_HEADER}")?;
    for m in log {
        writeln!(out, "{},{:.6},{:.6}", m.epoch, m.train_loss, m.eval_segment_accuracy)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::Spectrogram;
    use crate::label::Label;
    use crate::model::VFNetConfig;

    fn tiny_params() -> VFNetParams {
        let cfg = VFNetConfig {
            filter_heights: vec![1],
            channels_per_height: 1,
            freq_bins: 2,
            segment_width: 1,
            pool_regions: 1,
            hidden_units: 0,
            num_classes: 3,
        };
        init_params(&cfg, 1).unwrap()
    }

    #[test]
    fn zero_gradient_is_identity() {
        let cfg = TrainConfig::default();
        let mut params = tiny_params();
        let before = params.clone();
        let grads = VFNetParams::zeros(params.config()).unwrap();
        let mut state = AdamState::new(&params).unwrap();
        adam_step(&mut params, &grads, &mut state, &cfg).unwrap();
        assert_eq!(params, before);
        assert_eq!(state.step, 1);
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        let cfg = TrainConfig::default();
        for g in [-3.0, 1e-3, 0.5, 250.0] {
            let mut params = tiny_params();
            let before = params.clone();
            let mut grads = VFNetParams::zeros(params.config()).unwrap();
            for t in grads.tensors_mut() {
                t.data_mut().fill(g);
            }
            let mut state = AdamState::new(&params).unwrap();
            adam_step(&mut params, &grads, &mut state, &cfg).unwrap();
            let expected = 0.001 * g.abs() / (g.abs() + 1e-8);
            for (a, b) in params.tensors().iter().zip(before.tensors()) {
                for (x, y) in a.data().iter().zip(b.data()) {
                    assert!(((y - x) - expected * g.signum()).abs() < 1e-15);
                    assert!(((y - x).abs() - 0.001).abs() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn scalar_three_step_trace() {
        // theta = 1, g = 1 each step, default hyperparameters:
        //   m_t = 1 - 0.9^t, v_t = 1 - 0.999^t, so m_hat = v_hat = 1 and each
        //   step subtracts 0.001 / (1 + 1e-8).
        let adam = Adam::from_config(&TrainConfig::default());
        let (mut theta, mut m, mut v) = ([1.0], [0.0], [0.0]);
        let per_step = 0.001 / (1.0 + 1e-8);
        let mut expected = 1.0;
        for step in 1..=3u64 {
            adam.update(&mut theta, &[1.0], &mut m, &mut v, step);
            expected -= per_step;
            assert!((theta[0] - expected).abs() < 1e-12, "step {step}: {}", theta[0]);
            assert!((m[0] - (1.0 - 0.9f64.powi(step as i32))).abs() < 1e-15);
            assert!((v[0] - (1.0 - 0.999f64.powi(step as i32))).abs() < 1e-15);
        }
        assert!((theta[0] - 0.997_000_000_029_999_7).abs() < 1e-12);
    }

    #[test]
    fn update_opposes_gradient_sign() {
        let adam = Adam::from_config(&TrainConfig::default());
        for g in [-2.0, -1e-6, 1e-6, 7.0] {
            let (mut theta, mut m, mut v) = ([0.25], [0.0], [0.0]);
            adam.update(&mut theta, &[g], &mut m, &mut v, 1);
            assert_eq!((theta[0] - 0.25f64).signum(), -g.signum());
        }
    }

    #[test]
    fn non_finite_gradient_rejected_without_side_effects() {
        let cfg = TrainConfig::default();
        let mut params = tiny_params();
        let before = params.clone();
        let mut grads = VFNetParams::zeros(params.config()).unwrap();
        grads.output.bias.data_mut()[1] = f64::NAN;
        let mut state = AdamState::new(&params).unwrap();
        assert!(matches!(
            adam_step(&mut params, &grads, &mut state, &cfg),
            Err(Error::NonFiniteGradient(_))
        ));
        assert_eq!(params, before);
        assert_eq!(state.step, 0);
    }

    fn toy_stores(cfg: &TrainConfig, n: usize) -> (SegmentStore, SegmentStore) {
        let f = cfg.dsp.freq_bins();
        let t = cfg.dsp.segment_width;
        let mut store = SegmentStore::new(f, t);
        for i in 0..n {
            let label = Label::ALL[i % 3];
            let values = (0..f * t)
                .map(|k| if (k / t) % 3 == label.index() { 1.0 } else { -1.0 } + 0.01 * (i as f64))
                .collect();
            store.push(&Spectrogram::new(f, t, values).unwrap(), label, &format!("s{i}")).unwrap();
        }
        (store.clone(), store)
    }

    fn toy_config() -> TrainConfig {
        let mut cfg = TrainConfig::default();
        cfg.dsp.window_size = 16;
        cfg.dsp.segment_width = 4;
        cfg.filter_heights = vec![2, 3];
        cfg.channels_per_height = 4;
        cfg.hidden_units = 8;
        cfg.pool_regions = 2;
        cfg.epochs = 3;
        cfg.batch_size = 4;
        cfg
    }

    #[test]
    fn training_is_deterministic() {
        let cfg = toy_config();
        let (train_store, eval_store) = toy_stores(&cfg, 10);
        let a = train(&cfg, &train_store, &eval_store).unwrap();
        let b = train(&cfg, &train_store, &eval_store).unwrap();
        assert_eq!(a.log.len(), 3);
        let bits = |log: &[EpochMetrics]| -> Vec<(u64, u64)> {
            log.iter().map(|m| (m.train_loss.to_bits(), m.eval_segment_accuracy.to_bits())).collect()
        };
        assert_eq!(bits(&a.log), bits(&b.log));
        assert_eq!(a.params, b.params);
        assert_eq!(a.state.step, 9);
    }

    #[test]
    fn one_full_batch_is_one_step() {
        let mut cfg = toy_config();
        cfg.epochs = 1;
        cfg.batch_size = 64;
        let (train_store, eval_store) = toy_stores(&cfg, 10);
        let out = train(&cfg, &train_store, &eval_store).unwrap();
        assert_eq!(out.state.step, 1);
    }

    #[test]
    fn training_rejects_bad_stores() {
        let cfg = toy_config();
        let (train_store, eval_store) = toy_stores(&cfg, 4);
        let empty = SegmentStore::new(train_store.freq_bins(), train_store.segment_width());
        assert!(matches!(train(&cfg, &empty, &eval_store), Err(Error::EmptyStore)));
        assert!(matches!(train(&cfg, &train_store, &empty), Err(Error::EmptyStore)));
        let mut other = cfg.clone();
        other.dsp.window_size = 32;
        assert!(matches!(train(&other, &train_store, &eval_store), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn metrics_csv_format() {
        let log = [
            EpochMetrics { epoch: 1, train_loss: 1.0986122886681098, eval_segment_accuracy: 0.5 },
            EpochMetrics { epoch: 2, train_loss: 0.25, eval_segment_accuracy: 1.0 },
        ];
        let mut out = Vec::new();
        write_metrics_csv(&log, &mut out).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "epoch,train_loss,eval_segment_accuracy\n1,1.098612,0.500000\n2,0.250000,1.000000\n"
        );
    }
}
