//! Variable-filter-height convolutional classifier.
//!
//! Each filter bank `i` holds `C` filters of height `h_i` spanning the full
//! segment width. A filter slides along frequency only and its response goes
//! through ReLU. The activation map is max-pooled over `P` frequency regions
//! (`P = 1` is a global max), so every bank yields `C * P` values whatever its
//! height. The `k * C * P` pooled values, concatenated height by height, form
//! the feature vector fed to a fully connected head.

mod io;

pub use io::{
    decode_params, encode_params, load_params, load_params_for, save_params, PARAMS_MAGIC, PARAMS_VERSION,
};

use crate::dsp::Spectrogram;
use crate::error::{Error, Result};
use crate::rng::SplitMix64;
use crate::tensor::{conv_freq_into, matmul, relu, Tensor};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VFNetConfig {
    pub filter_heights: Vec<usize>,
    pub channels_per_height: usize,
    pub freq_bins: usize,
    pub segment_width: usize,
    /// Number of frequency regions each activation map is max-pooled over.
    pub pool_regions: usize,
    /// Zero means the feature vector feeds the output layer directly.
    pub hidden_units: usize,
    pub num_classes: usize,
}

impl Default for VFNetConfig {
    fn default() -> Self {
        Self {
            filter_heights: vec![3, 5, 7, 9],
            channels_per_height: 64,
            freq_bins: 129,
            segment_width: 120,
            pool_regions: 8,
            hidden_units: 128,
            num_classes: 3,
        }
    }
}

impl VFNetConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.filter_heights.is_empty() {
            return bad("at least one filter height is required".into());
        }
        if self.filter_heights.contains(&0) {
            return bad("filter heights must be positive".into());
        }
        let mut sorted = self.filter_heights.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.filter_heights.len() {
            return bad(format!("filter heights {:?} are not distinct", self.filter_heights));
        }
        if sorted[sorted.len() - 1] > self.freq_bins {
            return bad(format!(
                "filter height {} exceeds {} frequency bins",
                sorted[sorted.len() - 1],
                self.freq_bins
            ));
        }
        if self.channels_per_height == 0 || self.segment_width == 0 || self.num_classes == 0 {
            return bad("channels, segment width and class count must be positive".into());
        }
        let fewest_positions = self.freq_bins - sorted[sorted.len() - 1] + 1;
        if self.pool_regions == 0 || self.pool_regions > fewest_positions {
            return bad(format!(
                "pool_regions must lie in [1, {fewest_positions}] for these filter heights"
            ));
        }
        Ok(())
    }

    /// Length of the concatenated feature vector, `k * C * P`.
    pub fn feature_len(&self) -> usize {
        self.filter_heights.len() * self.channels_per_height * self.pool_regions
    }
}

/// One filter bank: `C` filters of shape `height x segment_width`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvBank {
    pub height: usize,
    /// Shape `[C, height, segment_width]`.
    pub weights: Tensor,
    /// Shape `[C]`.
    pub bias: Tensor,
}

/// Fully connected layer computing `x W + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    /// Shape `[inputs, outputs]`.
    pub weights: Tensor,
    /// Shape `[outputs]`.
    pub bias: Tensor,
}

impl Dense {
    fn zeros(inputs: usize, outputs: usize) -> Self {
        Self {
            weights: Tensor::zeros(&[inputs, outputs]),
            bias: Tensor::zeros(&[outputs]),
        }
    }

    pub fn inputs(&self) -> usize {
        self.weights.shape()[0]
    }

    pub fn outputs(&self) -> usize {
        self.weights.shape()[1]
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let row = Tensor::new(&[1, x.len()], x.to_vec()).expect("non-empty input");
        let mut out = matmul(&row, &self.weights).expect("layer shapes fixed at init").into_data();
        for (o, b) in out.iter_mut().zip(self.bias.data()) {
            *o += b;
        }
        out
    }

    /// Accumulates `dW += x^T dy`, `db += dy` and returns `dx = dy W^T`.
    fn backward(&self, x: &[f64], dy: &[f64], grad: &mut Dense) -> Vec<f64> {
        let outputs = dy.len();
        let gw = grad.weights.data_mut();
        for (i, &xi) in x.iter().enumerate() {
            for (g, &d) in gw[i * outputs..(i + 1) * outputs].iter_mut().zip(dy) {
                *g += xi * d;
            }
        }
        for (g, &d) in grad.bias.data_mut().iter_mut().zip(dy) {
            *g += d;
        }
        let w = self.weights.data();
        (0..x.len())
            .map(|i| w[i * outputs..(i + 1) * outputs].iter().zip(dy).map(|(a, b)| a * b).sum())
            .collect()
    }
}

/// Every learnable value of the classifier. Also used, with the same shapes,
/// for gradients and optimizer moments.
#[derive(Debug, Clone, PartialEq)]
pub struct VFNetParams {
    config: VFNetConfig,
    pub conv: Vec<ConvBank>,
    pub hidden: Option<Dense>,
    pub output: Dense,
}

impl VFNetParams {
    /// All-zero parameters shaped for `config`.
    pub fn zeros(config: &VFNetConfig) -> Result<Self> {
        config.validate()?;
        let c = config.channels_per_height;
        let t = config.segment_width;
        let conv = config
            .filter_heights
            .iter()
            .map(|&h| ConvBank {
                height: h,
                weights: Tensor::zeros(&[c, h, t]),
                bias: Tensor::zeros(&[c]),
            })
            .collect();
        let features = config.feature_len();
        let (hidden, head_in) = match config.hidden_units {
            0 => (None, features),
            units => (Some(Dense::zeros(features, units)), units),
        };
        Ok(Self {
            config: config.clone(),
            conv,
            hidden,
            output: Dense::zeros(head_in, config.num_classes),
        })
    }

    pub fn config(&self) -> &VFNetConfig {
        &self.config
    }

    /// Tensors in declaration order: per bank weights then bias, then the
    /// hidden layer (if any), then the output layer.
    pub fn tensors(&self) -> Vec<&Tensor> {
        let mut out = Vec::with_capacity(2 * self.conv.len() + 4);
        for bank in &self.conv {
            out.push(&bank.weights);
            out.push(&bank.bias);
        }
        if let Some(h) = &self.hidden {
            out.push(&h.weights);
            out.push(&h.bias);
        }
        out.push(&self.output.weights);
        out.push(&self.output.bias);
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut Tensor> {
        let mut out = Vec::with_capacity(2 * self.conv.len() + 4);
        for bank in &mut self.conv {
            out.push(&mut bank.weights);
            out.push(&mut bank.bias);
        }
        if let Some(h) = &mut self.hidden {
            out.push(&mut h.weights);
            out.push(&mut h.bias);
        }
        out.push(&mut self.output.weights);
        out.push(&mut self.output.bias);
        out
    }

    pub fn num_values(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.data().iter().all(|v| v.is_finite()))
    }

    /// Overwrites every value with zero, keeping shapes.
    pub fn fill_zero(&mut self) {
        for t in self.tensors_mut() {
            t.data_mut().fill(0.0);
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for t in self.tensors_mut() {
            t.data_mut().iter_mut().for_each(|v| *v *= factor);
        }
    }

    pub fn same_shape(&self, other: &VFNetParams) -> bool {
        self.config == other.config
    }
}

/// Glorot-uniform weights and zero biases, deterministic in `seed`.
///
/// For a filter bank of height `h` over `t` columns with `C` channels the
/// fans are `h * t` and `C * h * t`; for a dense layer they are its input and
/// output widths.
pub fn init_params(config: &VFNetConfig, seed: u64) -> Result<VFNetParams> {
    let mut params = VFNetParams::zeros(config)?;
    let mut rng = SplitMix64::new(seed);
    let c = config.channels_per_height;
    let t = config.segment_width;
    for bank in &mut params.conv {
        let receptive = bank.height * t;
        fill_uniform(&mut rng, bank.weights.data_mut(), receptive, c * receptive);
    }
    if let Some(h) = &mut params.hidden {
        let (i, o) = (h.inputs(), h.outputs());
        fill_uniform(&mut rng, h.weights.data_mut(), i, o);
    }
    let (i, o) = (params.output.inputs(), params.output.outputs());
    fill_uniform(&mut rng, params.output.weights.data_mut(), i, o);
    Ok(params)
}

pub fn glorot_bound(fan_in: usize, fan_out: usize) -> f64 {
    (6.0 / (fan_in + fan_out) as f64).sqrt()
}

fn fill_uniform(rng: &mut SplitMix64, values: &mut [f64], fan_in: usize, fan_out: usize) {
    let bound = glorot_bound(fan_in, fan_out);
    for v in values {
        *v = rng.uniform(-bound, bound);
    }
}

/// Intermediate values kept by [`forward`] for backpropagation.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    pub input: Spectrogram,
    /// Per bank, `C` pre-activation maps of length `f - h + 1`, flattened.
    pub pre_activations: Vec<Vec<f64>>,
    /// Per bank, channel and region (in feature order), the first position
    /// of the region's maximum in the ReLU-activated map.
    pub argmax: Vec<usize>,
    /// Concatenated pooled features, length `k * C * P`.
    pub features: Vec<f64>,
    pub hidden_pre: Option<Vec<f64>>,
    pub hidden: Option<Vec<f64>>,
    pub logits: Vec<f64>,
}

pub fn forward(params: &VFNetParams, x: &Spectrogram) -> Result<(Vec<f64>, ForwardCache)> {
    let cfg = &params.config;
    if x.bins() != cfg.freq_bins || x.cols() != cfg.segment_width {
        return Err(Error::ShapeMismatch(format!(
            "segment is {}x{}, model expects {}x{}",
            x.bins(),
            x.cols(),
            cfg.freq_bins,
            cfg.segment_width
        )));
    }
    let f = cfg.freq_bins;
    let t = cfg.segment_width;
    let c = cfg.channels_per_height;
    let mut pre_activations = Vec::with_capacity(params.conv.len());
    let mut argmax = Vec::with_capacity(cfg.feature_len());
    let mut features = Vec::with_capacity(cfg.feature_len());
    for bank in &params.conv {
        let positions = f - bank.height + 1;
        let span = bank.height * t;
        let mut maps = vec![0.0; c * positions];
        for ch in 0..c {
            let map = &mut maps[ch * positions..(ch + 1) * positions];
            conv_freq_into(x.values(), t, &bank.weights.data()[ch * span..(ch + 1) * span], map);
            let b = bank.bias.data()[ch];
            map.iter_mut().for_each(|v| *v += b);
            for r in 0..cfg.pool_regions {
                let (start, end) = pool_region(positions, cfg.pool_regions, r);
                let (pos, best) = first_max(map[start..end].iter().map(|&v| v.max(0.0)));
                argmax.push(start + pos);
                features.push(best);
            }
        }
        pre_activations.push(maps);
    }
    let (hidden_pre, hidden, logits) = match &params.hidden {
        Some(layer) => {
            let pre = layer.apply(&features);
            let act = relu(&Tensor::new(&[pre.len()], pre.clone())?).into_data();
            let logits = params.output.apply(&act);
            (Some(pre), Some(act), logits)
        }
        None => (None, None, params.output.apply(&features)),
    };
    let cache = ForwardCache {
        input: x.clone(),
        pre_activations,
        argmax,
        features,
        hidden_pre,
        hidden,
        logits: logits.clone(),
    };
    Ok((logits, cache))
}

/// Position range `[start, end)` of region `r` out of `regions`, using the
/// adaptive-pooling split `floor(r n / P) .. ceil((r + 1) n / P)`.
pub fn pool_region(positions: usize, regions: usize, r: usize) -> (usize, usize) {
    let start = r * positions / regions;
    let end = ((r + 1) * positions).div_ceil(regions);
    (start, end)
}

fn first_max(values: impl Iterator<Item = f64>) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in values.enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best
}

/// Numerically stable softmax (max subtracted before exponentiation).
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let m = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&z| (z - m).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// `-ln softmax(logits)[label]`, via log-sum-exp.
pub fn cross_entropy(logits: &[f64], label: usize) -> Result<f64> {
    check_label(label, logits.len())?;
    let m = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = m + logits.iter().map(|&z| (z - m).exp()).sum::<f64>().ln();
    Ok((lse - logits[label]).max(0.0))
}

fn check_label(label: usize, num_classes: usize) -> Result<()> {
    if label >= num_classes {
        return Err(Error::LabelOutOfRange { label, num_classes });
    }
    Ok(())
}

/// Backpropagates the cross-entropy of `cache` against `label`, adding
/// `scale` times the gradient into `grads`. Returns the loss.
pub fn backward_into(
    params: &VFNetParams,
    cache: &ForwardCache,
    label: usize,
    scale: f64,
    grads: &mut VFNetParams,
) -> Result<f64> {
    let cfg = &params.config;
    check_label(label, cfg.num_classes)?;
    if !grads.same_shape(params) {
        return Err(Error::ShapeMismatch("gradient buffer shaped for another config".into()));
    }
    let loss = cross_entropy(&cache.logits, label)?;
    let mut dlogits = softmax(&cache.logits);
    dlogits[label] -= 1.0;
    dlogits.iter_mut().for_each(|d| *d *= scale);

    let dfeatures = match (&params.hidden, &cache.hidden_pre, &cache.hidden) {
        (Some(layer), Some(pre), Some(act)) => {
            let mut dact = params.output.backward(act, &dlogits, &mut grads.output);
            for (d, &u) in dact.iter_mut().zip(pre) {
                if u <= 0.0 {
                    *d = 0.0;
                }
            }
            let ghidden = grads.hidden.as_mut().expect("same config has hidden layer");
            layer.backward(&cache.features, &dact, ghidden)
        }
        _ => params.output.backward(&cache.features, &dlogits, &mut grads.output),
    };

    let f = cfg.freq_bins;
    let t = cfg.segment_width;
    let c = cfg.channels_per_height;
    let p = cfg.pool_regions;
    let x = cache.input.values();
    for (i, (bank, gbank)) in params.conv.iter().zip(&mut grads.conv).enumerate() {
        let positions = f - bank.height + 1;
        let span = bank.height * t;
        for ch in 0..c {
            for r in 0..p {
                let slot = (i * c + ch) * p + r;
                let pos = cache.argmax[slot];
                // ReLU passes gradient only where the pre-activation is positive.
                if cache.pre_activations[i][ch * positions + pos] <= 0.0 {
                    continue;
                }
                let d = dfeatures[slot];
                let window = &x[pos * t..pos * t + span];
                let gw = &mut gbank.weights.data_mut()[ch * span..(ch + 1) * span];
                for (g, &xv) in gw.iter_mut().zip(window) {
                    *g += d * xv;
                }
                gbank.bias.data_mut()[ch] += d;
            }
        }
    }
    Ok(loss)
}

/// Cross-entropy loss and its exact gradient for one segment.
pub fn loss_and_grad(params: &VFNetParams, x: &Spectrogram, label: usize) -> Result<(f64, VFNetParams)> {
    check_label(label, params.config.num_classes)?;
    let (_, cache) = forward(params, x)?;
    let mut grads = VFNetParams::zeros(&params.config)?;
    let loss = backward_into(params, &cache, label, 1.0, &mut grads)?;
    Ok((loss, grads))
}

/// Index of the largest value; the lowest index wins ties.
pub fn argmax(values: &[f64]) -> usize {
    first_max(values.iter().copied()).0
}

/// Predicted class and softmax posterior for one segment.
pub fn predict_segment(params: &VFNetParams, x: &Spectrogram) -> Result<(usize, Vec<f64>)> {
    let (logits, _) = forward(params, x)?;
    let posterior = softmax(&logits);
    Ok((argmax(&logits), posterior))
}

/// Averages per-segment posteriors and returns the winning class with the
/// mean posterior.
pub fn combine_posteriors(posteriors: &[Vec<f64>]) -> Result<(usize, Vec<f64>)> {
    let first = posteriors.first().ok_or(Error::EmptySegmentList)?;
    let mut mean = vec![0.0; first.len()];
    for p in posteriors {
        if p.len() != mean.len() {
            return Err(Error::ShapeMismatch("posteriors of different lengths".into()));
        }
        mean.iter_mut().zip(p).for_each(|(m, v)| *m += v);
    }
    let n = posteriors.len() as f64;
    mean.iter_mut().for_each(|m| *m /= n);
    Ok((argmax(&mean), mean))
}

/// Utterance-level decision: mean segment posterior, then argmax.
pub fn predict_clip(params: &VFNetParams, segments: &[Spectrogram]) -> Result<usize> {
    predict_clip_posterior(params, segments).map(|(class, _)| class)
}

pub fn predict_clip_posterior(params: &VFNetParams, segments: &[Spectrogram]) -> Result<(usize, Vec<f64>)> {
    if segments.is_empty() {
        return Err(Error::EmptySegmentList);
    }
    let posteriors = segments
        .iter()
        .map(|s| predict_segment(params, s).map(|(_, p)| p))
        .collect::<Result<Vec<_>>>()?;
    combine_posteriors(&posteriors)
}
