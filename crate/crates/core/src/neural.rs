//! Feed-forward classifiers with hand-written backpropagation.
//!
//! A network has one stack of dense layers per enabled input channel. The
//! channel outputs are concatenated (canonical channel order) and passed
//! through a fusion stack whose last layer is a softmax over the `G`
//! grades. A channel with an empty stack passes its input straight into
//! the fusion, which is how the raw-feature channel and the logistic
//! regression baseline are expressed.

use ndarray::linalg::general_mat_mul;
use ndarray::{concatenate, s, Array1, Array2, ArrayView2, Axis, Zip};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::docembed::{Channel, ChannelInputs};
use crate::error::{Error, Result};

pub const DEFAULT_SEMANTIC_WIDTHS: [usize; 4] = [512, 256, 128, 64];
pub const DEFAULT_SYNTACTIC_WIDTHS: [usize; 2] = [256, 64];
/// Hidden widths of the fusion stack; the softmax layer is appended.
pub const DEFAULT_FUSION_WIDTHS: [usize; 1] = [64];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    Identity,
    SoftmaxOutput,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub in_dim: usize,
    pub out_dim: usize,
    pub activation: Activation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelSpec {
    pub channel: Channel,
    pub input_dim: usize,
    pub stack: Vec<LayerSpec>,
    pub enabled: bool,
}

impl ChannelSpec {
    pub fn output_dim(&self) -> usize {
        self.stack.last().map_or(self.input_dim, |l| l.out_dim)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub channels: Vec<ChannelSpec>,
    pub fusion: Vec<LayerSpec>,
    pub num_classes: usize,
}

/// ReLU layers of the given widths starting from `input_dim`.
pub fn relu_stack(input_dim: usize, widths: &[usize]) -> Vec<LayerSpec> {
    let mut dims = vec![input_dim];
    dims.extend_from_slice(widths);
    dims.windows(2)
        .map(|w| LayerSpec {
            in_dim: w[0],
            out_dim: w[1],
            activation: Activation::Relu,
        })
        .collect()
}

impl NetworkSpec {
    /// Builds a spec from per-channel `(channel, input_dim, hidden widths)`
    /// and the fusion hidden widths; a softmax layer to `num_classes` closes
    /// the fusion stack.
    pub fn from_widths(
        channels: &[(Channel, usize, &[usize])],
        fusion_hidden: &[usize],
        num_classes: usize,
    ) -> Result<Self> {
        let mut specs: Vec<ChannelSpec> = channels
            .iter()
            .map(|&(channel, input_dim, widths)| ChannelSpec {
                channel,
                input_dim,
                stack: relu_stack(input_dim, widths),
                enabled: true,
            })
            .collect();
        specs.sort_by_key(|c| c.channel);
        let fused: usize = specs.iter().map(ChannelSpec::output_dim).sum();
        let mut fusion = relu_stack(fused, fusion_hidden);
        fusion.push(LayerSpec {
            in_dim: fusion.last().map_or(fused, |l| l.out_dim),
            out_dim: num_classes,
            activation: Activation::SoftmaxOutput,
        });
        let spec = Self {
            channels: specs,
            fusion,
            num_classes,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn enabled_channels(&self) -> impl Iterator<Item = &ChannelSpec> {
        self.channels.iter().filter(|c| c.enabled)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::config(format!("network spec: {msg}")));
        if self.num_classes < 2 {
            return bad("need at least 2 classes".into());
        }
        let mut seen = Vec::new();
        for c in &self.channels {
            if seen.contains(&c.channel) {
                return bad(format!("channel {} listed twice", c.channel));
            }
            seen.push(c.channel);
            if c.input_dim == 0 {
                return bad(format!("{} channel has zero input width", c.channel));
            }
            let mut prev = c.input_dim;
            for l in &c.stack {
                if l.in_dim != prev || l.out_dim == 0 {
                    return bad(format!("{} channel layer dims do not chain", c.channel));
                }
                if l.activation == Activation::SoftmaxOutput {
                    return bad("softmax is only allowed on the final layer".into());
                }
                prev = l.out_dim;
            }
        }
        if self.enabled_channels().next().is_none() {
            return bad("no enabled channel".into());
        }
        let mut prev: usize = self.enabled_channels().map(ChannelSpec::output_dim).sum();
        for (i, l) in self.fusion.iter().enumerate() {
            if l.in_dim != prev || l.out_dim == 0 {
                return bad(format!(
                    "fusion layer {i} expects {} inputs but receives {prev}",
                    l.in_dim
                ));
            }
            let last = i + 1 == self.fusion.len();
            if (l.activation == Activation::SoftmaxOutput) != last {
                return bad("the fusion stack must end (and only end) in softmax".into());
            }
            prev = l.out_dim;
        }
        if self.fusion.is_empty() || prev != self.num_classes {
            return bad("fusion stack must end in a layer with one unit per class".into());
        }
        Ok(())
    }
}

/// Weights (`out × in`) and biases of one dense layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub weight: Array2<f64>,
    pub bias: Array1<f64>,
}

impl Dense {
    fn zeros(spec: &LayerSpec) -> Self {
        Self {
            weight: Array2::zeros((spec.out_dim, spec.in_dim)),
            bias: Array1::zeros(spec.out_dim),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InitRecord {
    pub scheme: String,
    pub seed: u64,
}

/// Parameters of every enabled channel stack and of the fusion stack. The
/// same shape doubles as the gradient container.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub channels: Vec<(Channel, Vec<Dense>)>,
    pub fusion: Vec<Dense>,
    pub init: InitRecord,
}

impl ModelParams {
    fn zeros_like(spec: &NetworkSpec) -> Self {
        Self {
            channels: spec
                .enabled_channels()
                .map(|c| (c.channel, c.stack.iter().map(Dense::zeros).collect()))
                .collect(),
            fusion: spec.fusion.iter().map(Dense::zeros).collect(),
            init: InitRecord {
                scheme: "zeros".into(),
                seed: 0,
            },
        }
    }

    pub fn layers(&self) -> impl Iterator<Item = &Dense> {
        self.channels
            .iter()
            .flat_map(|(_, ls)| ls.iter())
            .chain(self.fusion.iter())
    }

    pub fn layers_mut(&mut self) -> impl Iterator<Item = &mut Dense> {
        self.channels
            .iter_mut()
            .flat_map(|(_, ls)| ls.iter_mut())
            .chain(self.fusion.iter_mut())
    }

    pub fn num_params(&self) -> usize {
        self.layers().map(|d| d.weight.len() + d.bias.len()).sum()
    }

    /// All parameters, layer by layer, weights (row-major) before biases.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_params());
        for d in self.layers() {
            out.extend(d.weight.iter());
            out.extend(d.bias.iter());
        }
        out
    }

    pub fn set_flat(&mut self, flat: &[f64]) {
        assert_eq!(flat.len(), self.num_params(), "flat parameter length");
        let mut it = flat.iter();
        for d in self.layers_mut() {
            d.weight.iter_mut().for_each(|w| *w = *it.next().unwrap());
            d.bias.iter_mut().for_each(|b| *b = *it.next().unwrap());
        }
    }

    pub fn is_finite(&self) -> bool {
        self.layers()
            .all(|d| d.weight.iter().chain(d.bias.iter()).all(|v| v.is_finite()))
    }
}

/// He-uniform weights in `±√(6 / in_dim)`, zero biases. Only enabled
/// channels draw from the generator, so adding a disabled channel to a spec
/// does not change the parameters of the others.
pub fn init_params(spec: &NetworkSpec, seed: u64) -> ModelParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut params = ModelParams::zeros_like(spec);
    let layer_specs = spec
        .enabled_channels()
        .flat_map(|c| c.stack.iter())
        .chain(spec.fusion.iter());
    for (dense, ls) in params.layers_mut().zip(layer_specs) {
        let bound = (6.0 / ls.in_dim as f64).sqrt();
        dense
            .weight
            .iter_mut()
            .for_each(|w| *w = rng.random_range(-bound..bound));
    }
    params.init = InitRecord {
        scheme: "he_uniform".into(),
        seed,
    };
    params
}

struct LayerCache {
    input: Array2<f64>,
    pre: Array2<f64>,
}

struct ForwardCache {
    channels: Vec<Vec<LayerCache>>,
    channel_widths: Vec<usize>,
    fusion: Vec<LayerCache>,
    probs: Array2<f64>,
}

fn activate(z: &Array2<f64>, act: Activation) -> Array2<f64> {
    match act {
        Activation::Relu => z.mapv(|v| v.max(0.0)),
        Activation::Identity => z.clone(),
        Activation::SoftmaxOutput => softmax_rows(z.view()),
    }
}

/// Row-wise softmax with max subtraction.
pub fn softmax_rows(z: ArrayView2<'_, f64>) -> Array2<f64> {
    let mut out = z.to_owned();
    for mut row in out.rows_mut() {
        let max = row.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        row.mapv_inplace(|v| (v - max).exp());
        let sum = row.sum();
        row.mapv_inplace(|v| v / sum);
    }
    out
}

fn check_inputs(spec: &NetworkSpec, inputs: &ChannelInputs) -> Result<usize> {
    let mut n = None;
    for c in spec.enabled_channels() {
        let x = inputs
            .get(c.channel)
            .ok_or_else(|| Error::data(format!("missing input for the {} channel", c.channel)))?;
        if x.ncols() != c.input_dim {
            return Err(Error::Dimension {
                context: "channel input width",
                expected: c.input_dim,
                actual: x.ncols(),
            });
        }
        match n {
            None => n = Some(x.nrows()),
            Some(rows) if rows != x.nrows() => {
                return Err(Error::Dimension {
                    context: "channel input rows",
                    expected: rows,
                    actual: x.nrows(),
                })
            }
            _ => {}
        }
    }
    Ok(n.unwrap_or(0))
}

fn run_stack(
    x: Array2<f64>,
    specs: &[LayerSpec],
    layers: &[Dense],
    caches: &mut Vec<LayerCache>,
) -> Array2<f64> {
    let mut a = x;
    for (ls, d) in specs.iter().zip(layers) {
        let pre = a.dot(&d.weight.t()) + &d.bias;
        let next = activate(&pre, ls.activation);
        caches.push(LayerCache { input: a, pre });
        a = next;
    }
    a
}

fn forward_batch(params: &ModelParams, spec: &NetworkSpec, inputs: &ChannelInputs) -> ForwardCache {
    let mut channel_caches = Vec::new();
    let mut outputs = Vec::new();
    let mut widths = Vec::new();
    for (cs, (_, layers)) in spec.enabled_channels().zip(&params.channels) {
        let x = inputs.get(cs.channel).expect("checked").to_owned();
        let mut caches = Vec::new();
        let out = run_stack(x, &cs.stack, layers, &mut caches);
        widths.push(out.ncols());
        outputs.push(out);
        channel_caches.push(caches);
    }
    let views: Vec<_> = outputs.iter().map(|o| o.view()).collect();
    let fused = concatenate(Axis(1), &views).expect("same row count");
    let mut fusion_caches = Vec::new();
    let probs = run_stack(fused, &spec.fusion, &params.fusion, &mut fusion_caches);
    ForwardCache {
        channels: channel_caches,
        channel_widths: widths,
        fusion: fusion_caches,
        probs,
    }
}

/// Class probabilities, one row per document. Each document is evaluated
/// on its own, so results do not depend on which other rows are present.
pub fn forward(
    params: &ModelParams,
    spec: &NetworkSpec,
    inputs: &ChannelInputs,
) -> Result<Array2<f64>> {
    let n = check_inputs(spec, inputs)?;
    let mut out = Array2::zeros((n, spec.num_classes));
    for i in 0..n {
        let row = inputs.select_rows(&[i]);
        let cache = forward_batch(params, spec, &row);
        out.row_mut(i).assign(&cache.probs.row(0));
    }
    Ok(out)
}

/// Argmax with ties resolved to the lowest class index.
pub fn argmax(p: ndarray::ArrayView1<'_, f64>) -> usize {
    let mut best = 0;
    for (i, &v) in p.iter().enumerate() {
        if v > p[best] {
            best = i;
        }
    }
    best
}

pub fn predict(
    params: &ModelParams,
    spec: &NetworkSpec,
    inputs: &ChannelInputs,
) -> Result<Vec<usize>> {
    let probs = forward(params, spec, inputs)?;
    Ok(probs.rows().into_iter().map(argmax).collect())
}

/// Gradient with respect to the pre-activation of a layer.
fn layer_dz(grad: Array2<f64>, activation: Activation, pre: &Array2<f64>) -> Array2<f64> {
    match activation {
        // the softmax/cross-entropy gradient arrives already in z-space
        Activation::SoftmaxOutput | Activation::Identity => grad,
        Activation::Relu => {
            let mut g = grad;
            Zip::from(&mut g).and(pre).for_each(|g, &z| {
                if z <= 0.0 {
                    *g = 0.0;
                }
            });
            g
        }
    }
}

/// Receives `(layer index, layer, ∂L/∂z, layer input)` during a backward pass.
type LayerSink<'a> = dyn FnMut(usize, &mut Dense, &Array2<f64>, &Array2<f64>) + 'a;

/// Walks one stack backwards. `consume(i, dz, input)` receives each layer's
/// pre-activation gradient after the gradient for the layer below has been
/// taken from `layers[i]`, so it may update that layer in place. Returns the
/// gradient with respect to the stack input when `input_grad` is set.
fn backprop_stack(
    mut grad: Array2<f64>,
    specs: &[LayerSpec],
    layers: &mut [Dense],
    caches: &[LayerCache],
    input_grad: bool,
    consume: &mut LayerSink<'_>,
) -> Option<Array2<f64>> {
    for i in (0..specs.len()).rev() {
        let dz = layer_dz(grad, specs[i].activation, &caches[i].pre);
        let below = (i > 0 || input_grad).then(|| dz.dot(&layers[i].weight));
        consume(i, &mut layers[i], &dz, &caches[i].input);
        grad = below?;
    }
    Some(grad)
}

/// Checks the batch, runs the forward pass and returns the mean
/// cross-entropy with its gradient with respect to the output logits.
fn output_loss(
    params: &ModelParams,
    spec: &NetworkSpec,
    inputs: &ChannelInputs,
    labels: &[usize],
) -> Result<(f64, Array2<f64>, ForwardCache)> {
    let n = check_inputs(spec, inputs)?;
    if n == 0 || labels.len() != n {
        return Err(Error::data(format!(
            "batch has {n} rows but {} labels",
            labels.len()
        )));
    }
    if let Some(&bad) = labels.iter().find(|&&l| l >= spec.num_classes) {
        return Err(Error::data(format!(
            "label {bad} outside 0..{}",
            spec.num_classes
        )));
    }
    let cache = forward_batch(params, spec, inputs);
    let logits = &cache.fusion.last().expect("non-empty fusion").pre;
    let mut loss = 0.0;
    for (row, &y) in logits.rows().into_iter().zip(labels) {
        let max = row.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        let lse = max + row.mapv(|v| (v - max).exp()).sum().ln();
        loss += lse - row[y];
    }
    loss /= n as f64;

    let mut dz = cache.probs.clone();
    for (i, &y) in labels.iter().enumerate() {
        dz[[i, y]] -= 1.0;
    }
    dz /= n as f64;
    Ok((loss, dz, cache))
}

/// Backpropagates `dz` through the fusion stack and every channel stack of
/// `layers`, which must have the shape of the parameters used for `cache`.
fn backward(
    layers: &mut ModelParams,
    spec: &NetworkSpec,
    cache: &ForwardCache,
    dz: Array2<f64>,
    consume: &mut LayerSink<'_>,
) {
    let needs_fused_grad = spec.enabled_channels().any(|c| !c.stack.is_empty());
    let d_fused = backprop_stack(
        dz,
        &spec.fusion,
        &mut layers.fusion,
        &cache.fusion,
        needs_fused_grad,
        consume,
    );
    let Some(d_fused) = d_fused else { return };
    let mut offset = 0;
    for (k, cs) in spec.enabled_channels().enumerate() {
        let w = cache.channel_widths[k];
        if !cs.stack.is_empty() {
            let slice = d_fused.slice(s![.., offset..offset + w]).to_owned();
            backprop_stack(
                slice,
                &cs.stack,
                &mut layers.channels[k].1,
                &cache.channels[k],
                false,
                consume,
            );
        }
        offset += w;
    }
}

/// Mean softmax cross-entropy over the batch and its gradient with respect
/// to every parameter.
pub fn loss_and_grads(
    params: &ModelParams,
    spec: &NetworkSpec,
    inputs: &ChannelInputs,
    labels: &[usize],
) -> Result<(f64, ModelParams)> {
    let (loss, dz, cache) = output_loss(params, spec, inputs, labels)?;
    // the gradient buffers double as the weights read on the way down
    let mut grads = params.clone();
    backward(&mut grads, spec, &cache, dz, &mut |_, layer, dz, input| {
        layer.weight = dz.t().dot(input);
        layer.bias = dz.sum_axis(Axis(0));
    });
    Ok((loss, grads))
}

/// One plain SGD step on a batch, applying
/// `W ← (1 − lr·wd) W − lr ∂L/∂W` inside the backward pass so the weight
/// gradients are never stored. Returns the batch loss.
fn sgd_step(
    params: &mut ModelParams,
    spec: &NetworkSpec,
    inputs: &ChannelInputs,
    labels: &[usize],
    lr: f64,
    wd: f64,
) -> Result<f64> {
    let (loss, dz, cache) = output_loss(params, spec, inputs, labels)?;
    backward(params, spec, &cache, dz, &mut |_, layer, dz, input| {
        general_mat_mul(-lr, &dz.t(), input, 1.0 - lr * wd, &mut layer.weight);
        layer.bias.scaled_add(-lr, &dz.sum_axis(Axis(0)));
    });
    Ok(loss)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Optimizer {
    #[default]
    Sgd,
    Adam,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub optimizer: Optimizer,
    pub weight_decay: f64,
    /// Shuffling seed; set from the experiment seed by the pipeline.
    #[serde(skip)]
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            batch_size: 4,
            epochs: 60,
            learning_rate: 1e-4,
            optimizer: Optimizer::Sgd,
            weight_decay: 0.0,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 || !(self.learning_rate > 0.0) || !(self.weight_decay >= 0.0) {
            return Err(Error::config(
                "batch size and learning rate must be positive, weight decay non-negative",
            ));
        }
        Ok(())
    }
}

/// Labelled inputs for training or validation.
#[derive(Debug, Clone, Copy)]
pub struct Dataset<'a> {
    pub inputs: &'a ChannelInputs,
    pub labels: &'a [usize],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainOutcome {
    pub params: ModelParams,
    /// Mean training loss per epoch (averaged over documents, measured
    /// before each step).
    pub loss_trace: Vec<f64>,
    /// Mean validation loss after each epoch, when a validation set is given.
    pub validation_trace: Vec<f64>,
}

struct AdamState {
    m: ModelParams,
    v: ModelParams,
    t: i32,
}

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

fn adam_step(
    params: &mut ModelParams,
    grads: &ModelParams,
    cfg: &TrainConfig,
    state: &mut AdamState,
) {
    let lr = cfg.learning_rate;
    let wd = cfg.weight_decay;
    state.t += 1;
    let c1 = 1.0 - ADAM_BETA1.powi(state.t);
    let c2 = 1.0 - ADAM_BETA2.powi(state.t);
    let update = |p: &mut f64, g: f64, m: &mut f64, v: &mut f64| {
        *m = ADAM_BETA1 * *m + (1.0 - ADAM_BETA1) * g;
        *v = ADAM_BETA2 * *v + (1.0 - ADAM_BETA2) * g * g;
        *p -= lr * (*m / c1) / ((*v / c2).sqrt() + ADAM_EPS);
    };
    let layers = params
        .layers_mut()
        .zip(grads.layers())
        .zip(state.m.layers_mut().zip(state.v.layers_mut()));
    for ((p, g), (m, v)) in layers {
        Zip::from(&mut p.weight)
            .and(&g.weight)
            .and(&mut m.weight)
            .and(&mut v.weight)
            .for_each(|p, &g, m, v| {
                let g = g + wd * *p;
                update(p, g, m, v)
            });
        Zip::from(&mut p.bias)
            .and(&g.bias)
            .and(&mut m.bias)
            .and(&mut v.bias)
            .for_each(|p, &g, m, v| update(p, g, m, v));
    }
}

/// Shuffled minibatch descent starting from `params`.
pub fn train(
    spec: &NetworkSpec,
    cfg: &TrainConfig,
    mut params: ModelParams,
    train_set: Dataset<'_>,
    validation: Option<Dataset<'_>>,
) -> Result<TrainOutcome> {
    spec.validate()?;
    cfg.validate()?;
    let n = check_inputs(spec, train_set.inputs)?;
    if n == 0 || n != train_set.labels.len() {
        return Err(Error::data(
            "training set is empty or labels are misaligned",
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut adam = match cfg.optimizer {
        Optimizer::Sgd => None,
        Optimizer::Adam => Some(AdamState {
            m: ModelParams::zeros_like(spec),
            v: ModelParams::zeros_like(spec),
            t: 0,
        }),
    };
    let mut order: Vec<usize> = (0..n).collect();
    let mut loss_trace = Vec::with_capacity(cfg.epochs);
    let mut validation_trace = Vec::new();
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            let inputs = train_set.inputs.select_rows(batch);
            let labels: Vec<usize> = batch.iter().map(|&i| train_set.labels[i]).collect();
            let loss = match &mut adam {
                None => sgd_step(
                    &mut params,
                    spec,
                    &inputs,
                    &labels,
                    cfg.learning_rate,
                    cfg.weight_decay,
                )?,
                Some(state) => {
                    let (loss, grads) = loss_and_grads(&params, spec, &inputs, &labels)?;
                    adam_step(&mut params, &grads, cfg, state);
                    loss
                }
            };
            if !loss.is_finite() {
                return Err(Error::NonFinite {
                    stage: "classifier training",
                    epoch,
                });
            }
            total += loss * batch.len() as f64;
        }
        if !params.is_finite() {
            return Err(Error::NonFinite {
                stage: "classifier training",
                epoch,
            });
        }
        loss_trace.push(total / n as f64);
        if let Some(val) = validation {
            let (loss, _) = loss_and_grads(&params, spec, val.inputs, val.labels)?;
            validation_trace.push(loss);
        }
    }
    Ok(TrainOutcome {
        params,
        loss_trace,
        validation_trace,
    })
}

/// Spec of the multinomial logistic regression baseline: the raw channel
/// passed straight into a single softmax layer.
pub fn logistic_regression_spec(num_features: usize, num_classes: usize) -> Result<NetworkSpec> {
    NetworkSpec::from_widths(&[(Channel::Raw, num_features, &[])], &[], num_classes)
}

/// Multinomial logistic regression on standardized features, trained by
/// [`train`].
pub fn logistic_regression_fit(
    features: &Array2<f64>,
    labels: &[usize],
    num_classes: usize,
    cfg: &TrainConfig,
    init_seed: u64,
) -> Result<(NetworkSpec, TrainOutcome)> {
    let spec = logistic_regression_spec(features.ncols(), num_classes)?;
    let inputs = ChannelInputs {
        channels: vec![(Channel::Raw, features.clone())],
    };
    let params = init_params(&spec, init_seed);
    let outcome = train(
        &spec,
        cfg,
        params,
        Dataset {
            inputs: &inputs,
            labels,
        },
        None,
    )?;
    Ok((spec, outcome))
}
