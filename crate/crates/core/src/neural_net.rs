//! From-scratch feedforward networks: dense layers with sigmoid or identity
//! activations, cross-entropy or defer loss, and SGD/Adam training. Networks
//! are tiny (tens to hundreds of units), so everything is plain `Vec<f64>`.
//!
//! Training is fully deterministic given the seed: initialization, the
//! per-epoch shuffle, and optimizer state all derive from it.

use std::fmt::Write as _;
use std::path::Path;

use crate::defer_loss::{defer_loss_grad, defer_loss_value, DeferLossParams};
use crate::error::{LduError, Result};
use crate::numerics::softmax;
use crate::rng::{derive_seed, SplitMix64};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Activation {
    Sigmoid,
    Identity,
}

impl Activation {
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Sigmoid => 1.0 / (1.0 + (-x).exp()),
            Activation::Identity => x,
        }
    }

    /// Derivative expressed in terms of the activation output a.
    fn derivative_from_output(self, a: f64) -> f64 {
        match self {
            Activation::Sigmoid => a * (1.0 - a),
            Activation::Identity => 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LayerSpec {
    pub input_dim: usize,
    pub output_dim: usize,
    pub activation: Activation,
}

impl LayerSpec {
    pub fn new(input_dim: usize, output_dim: usize, activation: Activation) -> Self {
        LayerSpec { input_dim, output_dim, activation }
    }
}

/// Builds specs for an MLP with sigmoid hidden layers and an identity
/// (logit) output layer.
pub fn mlp_specs(input_dim: usize, hidden: &[usize], output_dim: usize) -> Vec<LayerSpec> {
    let mut specs = Vec::with_capacity(hidden.len() + 1);
    let mut prev = input_dim;
    for &h in hidden {
        specs.push(LayerSpec::new(prev, h, Activation::Sigmoid));
        prev = h;
    }
    specs.push(LayerSpec::new(prev, output_dim, Activation::Identity));
    specs
}

#[derive(Clone, Debug, PartialEq)]
pub struct Layer {
    pub spec: LayerSpec,
    /// Row-major, output_dim × input_dim.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NetworkParams {
    pub layers: Vec<Layer>,
}

impl NetworkParams {
    pub fn input_dim(&self) -> usize {
        self.layers[0].spec.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().expect("network has layers").spec.output_dim
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Optimizer {
    Sgd,
    Adam,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Loss {
    CrossEntropy,
    /// Defer loss with the given alpha; expects output_dim = class_count + 1.
    Defer { alpha: f64 },
}

#[derive(Clone, Copy, Debug)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub optimizer: Optimizer,
    pub weight_decay: f64,
    pub seed: u64,
    pub loss: Loss,
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.learning_rate <= 0.0 || !self.learning_rate.is_finite() {
            return Err(LduError::invalid("train config: learning_rate must be > 0"));
        }
        if self.batch_size == 0 {
            return Err(LduError::invalid("train config: batch_size must be >= 1"));
        }
        if self.weight_decay < 0.0 {
            return Err(LduError::invalid("train config: weight_decay must be >= 0"));
        }
        Ok(())
    }
}

fn check_chain(specs: &[LayerSpec]) -> Result<()> {
    if specs.is_empty() {
        return Err(LduError::invalid("init_params: no layer specs"));
    }
    for spec in specs {
        if spec.input_dim == 0 || spec.output_dim == 0 {
            return Err(LduError::invalid("init_params: zero layer dimension"));
        }
    }
    for pair in specs.windows(2) {
        if pair[0].output_dim != pair[1].input_dim {
            return Err(LduError::invalid(format!(
                "init_params: layer output dim {} does not chain into input dim {}",
                pair[0].output_dim, pair[1].input_dim
            )));
        }
    }
    Ok(())
}

/// Seeded initialization: weights uniform in ±√(6/(fan_in+fan_out)), biases zero.
pub fn init_params(specs: &[LayerSpec], seed: u64) -> Result<NetworkParams> {
    check_chain(specs)?;
    let mut rng = SplitMix64::new(seed);
    let layers = specs
        .iter()
        .map(|&spec| {
            let limit = (6.0 / (spec.input_dim + spec.output_dim) as f64).sqrt();
            let weights = (0..spec.input_dim * spec.output_dim)
                .map(|_| rng.uniform(-limit, limit))
                .collect();
            Layer { spec, weights, bias: vec![0.0; spec.output_dim] }
        })
        .collect();
    Ok(NetworkParams { layers })
}

/// Forward pass returning raw logits; softmax is applied by callers.
pub fn forward(params: &NetworkParams, features: &[f64]) -> Result<Vec<f64>> {
    if features.len() != params.input_dim() {
        return Err(LduError::invalid(format!(
            "forward: expected {} features, got {}",
            params.input_dim(),
            features.len()
        )));
    }
    let mut current = features.to_vec();
    for layer in &params.layers {
        current = affine(layer, &current)
            .into_iter()
            .map(|z| layer.spec.activation.apply(z))
            .collect();
    }
    Ok(current)
}

fn affine(layer: &Layer, input: &[f64]) -> Vec<f64> {
    let (rows, cols) = (layer.spec.output_dim, layer.spec.input_dim);
    let mut out = layer.bias.clone();
    for (r, o) in out.iter_mut().enumerate().take(rows) {
        let row = &layer.weights[r * cols..(r + 1) * cols];
        let mut acc = 0.0;
        for (w, x) in row.iter().zip(input) {
            acc += w * x;
        }
        *o += acc;
    }
    out
}

/// Gradients shaped like the parameters, plus the mean batch loss.
pub struct BatchGradients {
    pub layers: Vec<Layer>,
    pub mean_loss: f64,
}

fn zero_like(params: &NetworkParams) -> Vec<Layer> {
    params
        .layers
        .iter()
        .map(|l| Layer {
            spec: l.spec,
            weights: vec![0.0; l.weights.len()],
            bias: vec![0.0; l.bias.len()],
        })
        .collect()
}

fn loss_value_and_logit_grad(logits: &[f64], target: usize, loss: Loss) -> Result<(f64, Vec<f64>)> {
    match loss {
        Loss::CrossEntropy => {
            if target >= logits.len() {
                return Err(LduError::invalid(format!(
                    "cross-entropy: target {target} out of range for {} logits",
                    logits.len()
                )));
            }
            let probs = softmax(logits)?;
            let lse = crate::numerics::log_sum_exp(logits)?;
            let value = lse - logits[target];
            let mut grad = probs.into_vec();
            grad[target] -= 1.0;
            Ok((value, grad))
        }
        Loss::Defer { alpha } => {
            let class_count = logits.len().checked_sub(1).filter(|&c| c >= 2).ok_or_else(|| {
                LduError::invalid("defer loss: network must have at least 3 outputs")
            })?;
            let params = DeferLossParams::new(alpha, class_count)?;
            let value = defer_loss_value(logits, target, &params)?;
            let grad = defer_loss_grad(logits, target, &params)?;
            Ok((value, grad))
        }
    }
}

/// Backpropagation: gradient of the mean loss over the batch with respect to
/// every weight and bias.
pub fn network_gradients(
    params: &NetworkParams,
    features: &[Vec<f64>],
    targets: &[usize],
    loss: Loss,
) -> Result<BatchGradients> {
    if features.is_empty() {
        return Err(LduError::invalid("network_gradients: empty batch"));
    }
    if features.len() != targets.len() {
        return Err(LduError::invalid("network_gradients: features/targets length mismatch"));
    }
    let mut grads = zero_like(params);
    let mut total_loss = 0.0;
    let n = features.len() as f64;

    for (x, &target) in features.iter().zip(targets) {
        if x.len() != params.input_dim() {
            return Err(LduError::invalid("network_gradients: feature dimension mismatch"));
        }
        // forward trace: activations[0] is the input, activations[l+1] the
        // output of layer l
        let mut activations: Vec<Vec<f64>> = Vec::with_capacity(params.layers.len() + 1);
        activations.push(x.clone());
        for layer in &params.layers {
            let out: Vec<f64> = affine(layer, activations.last().unwrap())
                .into_iter()
                .map(|z| layer.spec.activation.apply(z))
                .collect();
            activations.push(out);
        }

        let logits = activations.last().unwrap();
        let (value, logit_grad) = loss_value_and_logit_grad(logits, target, loss)?;
        total_loss += value;

        // delta = dL/d(pre-activation) of the current layer
        let last = params.layers.len() - 1;
        let mut delta: Vec<f64> = logit_grad
            .iter()
            .zip(logits)
            .map(|(&g, &a)| g * params.layers[last].spec.activation.derivative_from_output(a))
            .collect();

        for l in (0..params.layers.len()).rev() {
            let layer = &params.layers[l];
            let input = &activations[l];
            let cols = layer.spec.input_dim;
            let g = &mut grads[l];
            for (r, &dr) in delta.iter().enumerate() {
                let d = dr / n;
                g.bias[r] += d;
                let row = &mut g.weights[r * cols..(r + 1) * cols];
                for (gw, xv) in row.iter_mut().zip(input) {
                    *gw += d * xv;
                }
            }
            if l > 0 {
                let below = &params.layers[l - 1];
                let mut next = vec![0.0; cols];
                for (r, &dr) in delta.iter().enumerate() {
                    let row = &layer.weights[r * cols..(r + 1) * cols];
                    for (nx, w) in next.iter_mut().zip(row) {
                        *nx += dr * w;
                    }
                }
                for (nx, &a) in next.iter_mut().zip(input) {
                    *nx *= below.spec.activation.derivative_from_output(a);
                }
                delta = next;
            }
        }
    }

    Ok(BatchGradients { layers: grads, mean_loss: total_loss / n })
}

struct AdamState {
    m: Vec<Layer>,
    v: Vec<Layer>,
    t: usize,
}

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

/// Trains a network on (features, targets). Mini-batches follow one seeded
/// permutation per epoch derived from (seed, epoch). Weight decay enters as
/// an L2 gradient term on the weights (not biases).
pub fn train(
    features: &[Vec<f64>],
    targets: &[usize],
    specs: &[LayerSpec],
    config: &TrainConfig,
) -> Result<NetworkParams> {
    config.validate()?;
    if features.is_empty() {
        return Err(LduError::invalid("train: empty dataset"));
    }
    if features.len() != targets.len() {
        return Err(LduError::invalid("train: features/targets length mismatch"));
    }
    let mut params = init_params(specs, config.seed)?;
    let mut adam = match config.optimizer {
        Optimizer::Adam => Some(AdamState { m: zero_like(&params), v: zero_like(&params), t: 0 }),
        Optimizer::Sgd => None,
    };

    let n = features.len();
    let mut step = 0usize;
    for epoch in 0..config.epochs {
        let mut order: Vec<usize> = (0..n).collect();
        let mut shuffle_rng = SplitMix64::new(derive_seed(config.seed, 1 + epoch as u64));
        shuffle_rng.shuffle(&mut order);

        for chunk in order.chunks(config.batch_size) {
            step += 1;
            let batch_x: Vec<Vec<f64>> = chunk.iter().map(|&i| features[i].clone()).collect();
            let batch_t: Vec<usize> = chunk.iter().map(|&i| targets[i]).collect();
            let mut grads = network_gradients(&params, &batch_x, &batch_t, config.loss)?;
            if !grads.mean_loss.is_finite() {
                return Err(LduError::TrainingDiverged {
                    step,
                    detail: format!("epoch {epoch}: non-finite batch loss"),
                });
            }
            if config.weight_decay > 0.0 {
                for (g, p) in grads.layers.iter_mut().zip(&params.layers) {
                    for (gw, w) in g.weights.iter_mut().zip(&p.weights) {
                        *gw += config.weight_decay * w;
                    }
                }
            }
            match &mut adam {
                None => {
                    for (p, g) in params.layers.iter_mut().zip(&grads.layers) {
                        for (w, gw) in p.weights.iter_mut().zip(&g.weights) {
                            *w -= config.learning_rate * gw;
                        }
                        for (b, gb) in p.bias.iter_mut().zip(&g.bias) {
                            *b -= config.learning_rate * gb;
                        }
                    }
                }
                Some(state) => {
                    state.t += 1;
                    let bc1 = 1.0 - ADAM_BETA1.powi(state.t as i32);
                    let bc2 = 1.0 - ADAM_BETA2.powi(state.t as i32);
                    for l in 0..params.layers.len() {
                        adam_update(
                            &mut params.layers[l].weights,
                            &grads.layers[l].weights,
                            &mut state.m[l].weights,
                            &mut state.v[l].weights,
                            config.learning_rate,
                            bc1,
                            bc2,
                        );
                        adam_update(
                            &mut params.layers[l].bias,
                            &grads.layers[l].bias,
                            &mut state.m[l].bias,
                            &mut state.v[l].bias,
                            config.learning_rate,
                            bc1,
                            bc2,
                        );
                    }
                }
            }
        }
    }
    Ok(params)
}

#[allow(clippy::too_many_arguments)]
fn adam_update(
    params: &mut [f64],
    grads: &[f64],
    m: &mut [f64],
    v: &mut [f64],
    lr: f64,
    bc1: f64,
    bc2: f64,
) {
    for i in 0..params.len() {
        m[i] = ADAM_BETA1 * m[i] + (1.0 - ADAM_BETA1) * grads[i];
        v[i] = ADAM_BETA2 * v[i] + (1.0 - ADAM_BETA2) * grads[i] * grads[i];
        let m_hat = m[i] / bc1;
        let v_hat = v[i] / bc2;
        params[i] -= lr * m_hat / (v_hat.sqrt() + ADAM_EPS);
    }
}

fn format_f64(v: f64) -> String {
    // 17 significant digits round-trips any f64 exactly
    format!("{:.16e}", v)
}

/// Serializes parameters as one line per tensor:
/// `layer_index kind rows cols v1 v2 …` with 17-significant-digit floats.
pub fn params_to_string(params: &NetworkParams) -> String {
    let mut out = String::new();
    for (i, layer) in params.layers.iter().enumerate() {
        let (rows, cols) = (layer.spec.output_dim, layer.spec.input_dim);
        write!(out, "{i} weight {rows} {cols}").unwrap();
        for &w in &layer.weights {
            write!(out, " {}", format_f64(w)).unwrap();
        }
        out.push('\n');
        write!(out, "{i} bias {rows} 1").unwrap();
        for &b in &layer.bias {
            write!(out, " {}", format_f64(b)).unwrap();
        }
        out.push('\n');
    }
    out
}

/// Parses the flat text format back, taking activations (and a shape check)
/// from `specs`.
pub fn params_from_string(text: &str, specs: &[LayerSpec]) -> Result<NetworkParams> {
    check_chain(specs)?;
    let mut params: Vec<Layer> = specs
        .iter()
        .map(|&spec| Layer { spec, weights: Vec::new(), bias: Vec::new() })
        .collect();
    for (lineno, line) in text.lines().enumerate() {
        let lineno = lineno + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let parse_usize = |s: Option<&str>, what: &str| -> Result<usize> {
            s.ok_or_else(|| LduError::Parse { line: lineno, detail: format!("missing {what}") })?
                .parse()
                .map_err(|_| LduError::Parse { line: lineno, detail: format!("bad {what}") })
        };
        let idx = parse_usize(fields.next(), "layer index")?;
        if idx >= specs.len() {
            return Err(LduError::Parse {
                line: lineno,
                detail: format!("layer index {idx} out of range"),
            });
        }
        let kind = fields
            .next()
            .ok_or_else(|| LduError::Parse { line: lineno, detail: "missing kind".into() })?;
        let rows = parse_usize(fields.next(), "rows")?;
        let cols = parse_usize(fields.next(), "cols")?;
        let values: Vec<f64> = fields
            .map(|s| {
                s.parse::<f64>().map_err(|_| LduError::Parse {
                    line: lineno,
                    detail: format!("non-numeric value `{s}`"),
                })
            })
            .collect::<Result<_>>()?;
        let spec = specs[idx];
        match kind {
            "weight" => {
                if rows != spec.output_dim || cols != spec.input_dim || values.len() != rows * cols {
                    return Err(LduError::Parse {
                        line: lineno,
                        detail: format!("weight shape {rows}x{cols} does not match spec"),
                    });
                }
                params[idx].weights = values;
            }
            "bias" => {
                if rows != spec.output_dim || cols != 1 || values.len() != rows {
                    return Err(LduError::Parse {
                        line: lineno,
                        detail: format!("bias shape {rows}x{cols} does not match spec"),
                    });
                }
                params[idx].bias = values;
            }
            other => {
                return Err(LduError::Parse {
                    line: lineno,
                    detail: format!("unknown tensor kind `{other}`"),
                })
            }
        }
    }
    for (i, layer) in params.iter().enumerate() {
        if layer.weights.is_empty() || layer.bias.is_empty() {
            return Err(LduError::Parse { line: 0, detail: format!("layer {i} missing tensors") });
        }
    }
    Ok(NetworkParams { layers: params })
}

pub fn save_params(params: &NetworkParams, path: &Path) -> Result<()> {
    crate::data_io::write_atomic(path, params_to_string(params).as_bytes())
}

pub fn load_params(path: &Path, specs: &[LayerSpec]) -> Result<NetworkParams> {
    let text = std::fs::read_to_string(path).map_err(|e| LduError::io(path.display().to_string(), e))?;
    params_from_string(&text, specs)
}
