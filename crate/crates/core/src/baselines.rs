//! Classical UQ baselines built from scratch: a dense tanh network trained by
//! backpropagation, MC Dropout inference and moment-matched Deep Ensembles.

use std::path::Path;

use rand::Rng;

use crate::error::{Error, Result};
use crate::kv;
use crate::rng;
use crate::vqc::{LabeledPoint, Optimizer, OptimizerConfig, OptimizerKind};

/// Output head of a [`DenseNet`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Head {
    /// One linear output, trained with MSE.
    Mean,
    /// Two outputs `(μ, s)` with `σ² = softplus(s) + MIN_VARIANCE`, trained
    /// with Gaussian negative log-likelihood.
    MeanVariance,
}

impl Head {
    fn outputs(self) -> usize {
        match self {
            Head::Mean => 1,
            Head::MeanVariance => 2,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Head::Mean => "mean",
            Head::MeanVariance => "mean_variance",
        }
    }
}

pub const MIN_VARIANCE: f64 = 1e-6;

fn softplus(s: f64) -> f64 {
    if s > 30.0 {
        s
    } else {
        s.exp().ln_1p()
    }
}

fn sigmoid(s: f64) -> f64 {
    1.0 / (1.0 + (-s).exp())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Layer {
    n_in: usize,
    n_out: usize,
    w: usize,
    b: usize,
}

/// Fully connected network, tanh hidden activations, linear output layer.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseNet {
    widths: Vec<usize>,
    head: Head,
    layers: Vec<Layer>,
    params: Vec<f64>,
}

impl DenseNet {
    /// Glorot-uniform weights, zero biases. `hidden` lists the hidden widths.
    pub fn new<R: Rng + ?Sized>(n_inputs: usize, hidden: &[usize], head: Head, rng: &mut R) -> Result<Self> {
        let mut widths = vec![n_inputs];
        widths.extend_from_slice(hidden);
        widths.push(head.outputs());
        let mut net = Self::zeros(widths, head)?;
        for layer in net.layers.clone() {
            let bound = (6.0 / (layer.n_in + layer.n_out) as f64).sqrt();
            for w in &mut net.params[layer.w..layer.w + layer.n_in * layer.n_out] {
                *w = rng.random_range(-bound..bound);
            }
        }
        Ok(net)
    }

    fn zeros(widths: Vec<usize>, head: Head) -> Result<Self> {
        if widths.len() < 2 || widths.contains(&0) {
            return Err(Error::structural(format!("invalid layer widths {widths:?}")));
        }
        if *widths.last().unwrap() != head.outputs() {
            return Err(Error::structural(format!(
                "output width {} does not match {} head",
                widths.last().unwrap(),
                head.name()
            )));
        }
        let mut layers = Vec::with_capacity(widths.len() - 1);
        let mut offset = 0;
        for pair in widths.windows(2) {
            let (n_in, n_out) = (pair[0], pair[1]);
            layers.push(Layer {
                n_in,
                n_out,
                w: offset,
                b: offset + n_in * n_out,
            });
            offset += n_in * n_out + n_out;
        }
        Ok(Self {
            widths,
            head,
            layers,
            params: vec![0.0; offset],
        })
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn head(&self) -> Head {
        self.head
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn n_inputs(&self) -> usize {
        self.widths[0]
    }

    fn n_hidden_layers(&self) -> usize {
        self.layers.len() - 1
    }

    /// Inverted-dropout masks for every hidden layer: 0 with probability
    /// `rate`, otherwise `1/(1 − rate)`.
    fn sample_masks<R: Rng + ?Sized>(&self, rate: f64, rng: &mut R) -> Vec<Vec<f64>> {
        let keep = 1.0 / (1.0 - rate);
        self.layers[..self.n_hidden_layers()]
            .iter()
            .map(|l| {
                (0..l.n_out)
                    .map(|_| if rng.random_bool(rate) { 0.0 } else { keep })
                    .collect()
            })
            .collect()
    }

    /// Activations of every layer (input first, raw outputs last).
    fn forward_trace(&self, x: &[f64], masks: Option<&[Vec<f64>]>) -> Vec<Vec<f64>> {
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(x.to_vec());
        let last = self.layers.len() - 1;
        for (li, layer) in self.layers.iter().enumerate() {
            let input = &acts[li];
            let mut out = self.params[layer.b..layer.b + layer.n_out].to_vec();
            for (o, z) in out.iter_mut().enumerate() {
                let row = &self.params[layer.w + o * layer.n_in..layer.w + (o + 1) * layer.n_in];
                *z += row.iter().zip(input).map(|(w, a)| w * a).sum::<f64>();
            }
            if li < last {
                for (o, z) in out.iter_mut().enumerate() {
                    *z = z.tanh();
                    if let Some(m) = masks {
                        *z *= m[li][o];
                    }
                }
            }
            acts.push(out);
        }
        acts
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n_inputs() {
            return Err(Error::structural(format!(
                "input has {} components, network expects {}",
                x.len(),
                self.n_inputs()
            )));
        }
        Ok(())
    }

    /// Deterministic forward pass: `(μ, σ²)`, with `σ² = 0` for a mean head.
    pub fn predict(&self, x: &[f64]) -> Result<(f64, f64)> {
        self.check_input(x)?;
        Ok(self.decode(&self.forward_trace(x, None)))
    }

    fn decode(&self, acts: &[Vec<f64>]) -> (f64, f64) {
        let out = acts.last().unwrap();
        match self.head {
            Head::Mean => (out[0], 0.0),
            Head::MeanVariance => (out[0], softplus(out[1]) + MIN_VARIANCE),
        }
    }

    /// Forward pass with freshly sampled dropout masks.
    pub fn predict_dropout<R: Rng + ?Sized>(&self, x: &[f64], rate: f64, rng: &mut R) -> Result<(f64, f64)> {
        self.check_input(x)?;
        check_rate(rate)?;
        let masks = self.sample_masks(rate, rng);
        Ok(self.decode(&self.forward_trace(x, Some(&masks))))
    }

    /// Mean training loss and its gradient over `data` with fixed masks
    /// (one mask set per sample, or none).
    /// Training loss (MSE or Gaussian NLL, by head) on `data` without
    /// dropout, and its gradient with respect to [`Self::params`].
    pub fn loss_gradient(&self, data: &[LabeledPoint]) -> Result<(f64, Vec<f64>)> {
        if data.is_empty() {
            return Err(Error::arg("training set is empty"));
        }
        for p in data {
            self.check_input(&p.input)?;
        }
        Ok(self.loss_and_grad(data, None))
    }

    fn loss_and_grad(&self, data: &[LabeledPoint], masks: Option<&[Vec<Vec<f64>>]>) -> (f64, Vec<f64>) {
        let mut grad = vec![0.0; self.params.len()];
        let mut loss = 0.0;
        let inv_n = 1.0 / data.len() as f64;
        let last = self.layers.len() - 1;
        for (i, p) in data.iter().enumerate() {
            let mask = masks.map(|m| m[i].as_slice());
            let acts = self.forward_trace(&p.input, mask);
            let out = acts.last().unwrap();
            let mut delta = match self.head {
                Head::Mean => {
                    let r = out[0] - p.target;
                    loss += inv_n * r * r;
                    vec![2.0 * inv_n * r]
                }
                Head::MeanVariance => {
                    let var = softplus(out[1]) + MIN_VARIANCE;
                    let r = out[0] - p.target;
                    loss += inv_n * 0.5 * (var.ln() + r * r / var);
                    let d_var = 0.5 * (1.0 / var - r * r / (var * var));
                    vec![inv_n * r / var, inv_n * d_var * sigmoid(out[1])]
                }
            };
            for li in (0..=last).rev() {
                let layer = self.layers[li];
                let input = &acts[li];
                for (o, d) in delta.iter().enumerate() {
                    grad[layer.b + o] += d;
                    let row = layer.w + o * layer.n_in;
                    for (k, a) in input.iter().enumerate() {
                        grad[row + k] += d * a;
                    }
                }
                if li == 0 {
                    break;
                }
                // back through the previous hidden activation (tanh, then mask)
                let mut prev = vec![0.0; layer.n_in];
                for (o, d) in delta.iter().enumerate() {
                    let row = &self.params[layer.w + o * layer.n_in..layer.w + (o + 1) * layer.n_in];
                    for (pk, w) in prev.iter_mut().zip(row) {
                        *pk += d * w;
                    }
                }
                let hidden = &acts[li];
                for (k, pk) in prev.iter_mut().enumerate() {
                    let m = mask.map_or(1.0, |m| m[li - 1][k]);
                    if m == 0.0 {
                        *pk = 0.0;
                    } else {
                        let t = hidden[k] / m;
                        *pk *= m * (1.0 - t * t);
                    }
                }
                delta = prev;
            }
        }
        (loss, grad)
    }

    pub fn to_text(&self) -> String {
        format!(
            "# qmuq dense net v1\nwidths = {}\nhead = {}\nparams = {}\n",
            join_usize(&self.widths),
            self.head.name(),
            kv::join_floats(&self.params)
        )
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let e = kv::parse(text)?;
        Self::from_entries(&e, "")
    }

    fn from_entries(e: &[kv::Entry], prefix: &str) -> Result<Self> {
        let widths: Vec<usize> = kv::require(e, &format!("{prefix}widths"))?.parse_list()?;
        let head = parse_head(&kv::require(e, &format!("{prefix}head"))?.value)?;
        let params: Vec<f64> = kv::require(e, &format!("{prefix}params"))?.parse_list()?;
        let mut net = Self::zeros(widths, head)?;
        if params.len() != net.params.len() {
            return Err(Error::structural(format!(
                "{} parameters for a network with {}",
                params.len(),
                net.params.len()
            )));
        }
        net.params = params;
        Ok(net)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }
}

fn join_usize(v: &[usize]) -> String {
    v.iter().map(usize::to_string).collect::<Vec<_>>().join(" ")
}

fn parse_head(s: &str) -> Result<Head> {
    match s {
        "mean" => Ok(Head::Mean),
        "mean_variance" => Ok(Head::MeanVariance),
        other => Err(Error::arg(format!("unknown head {other:?}"))),
    }
}

fn check_rate(rate: f64) -> Result<()> {
    if !(0.0..1.0).contains(&rate) {
        return Err(Error::arg(format!("dropout rate {rate} outside [0, 1)")));
    }
    Ok(())
}

/// Default optimiser for the baseline networks: Adam, step 0.003, 1000 epochs.
pub fn default_net_optimizer() -> OptimizerConfig {
    OptimizerConfig {
        kind: OptimizerKind::Adam {
            step: 0.003,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        },
        epochs: 1000,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NetTraining {
    pub net: DenseNet,
    pub loss_trace: Vec<f64>,
}

/// Full-batch backprop. MSE for a mean head, Gaussian NLL for a
/// mean-variance head; dropout masks are resampled every epoch when
/// `dropout_rate > 0`.
pub fn train_net<R: Rng + ?Sized>(
    net: &DenseNet,
    data: &[LabeledPoint],
    config: &OptimizerConfig,
    dropout_rate: f64,
    rng: &mut R,
) -> Result<NetTraining> {
    if data.is_empty() {
        return Err(Error::arg("training set is empty"));
    }
    check_rate(dropout_rate)?;
    for p in data {
        net.check_input(&p.input)?;
    }
    let mut net = net.clone();
    let mut opt = Optimizer::new(config.kind, net.params.len());
    let mut trace = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        let masks: Option<Vec<_>> = (dropout_rate > 0.0).then(|| {
            data.iter()
                .map(|_| net.sample_masks(dropout_rate, rng))
                .collect()
        });
        let (loss, grad) = net.loss_and_grad(data, masks.as_deref());
        if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::Training { epoch, loss });
        }
        trace.push(loss);
        opt.step(&mut net.params, &grad);
    }
    Ok(NetTraining {
        net,
        loss_trace: trace,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct DropoutPrediction {
    pub mean: f64,
    /// Unbiased (`1/(T−1)`) sample variance of the passes.
    pub variance: f64,
    pub samples: Vec<f64>,
}

/// `T` stochastic forward passes with dropout active.
pub fn mc_dropout_predict<R: Rng + ?Sized>(
    net: &DenseNet,
    x: &[f64],
    passes: usize,
    dropout_rate: f64,
    rng: &mut R,
) -> Result<DropoutPrediction> {
    if passes < 2 {
        return Err(Error::arg(format!("MC Dropout needs T >= 2 passes, got {passes}")));
    }
    let samples = (0..passes)
        .map(|_| net.predict_dropout(x, dropout_rate, rng).map(|(m, _)| m))
        .collect::<Result<Vec<_>>>()?;
    let mean = samples.iter().sum::<f64>() / passes as f64;
    let variance = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (passes - 1) as f64;
    Ok(DropoutPrediction {
        mean,
        variance,
        samples,
    })
}

/// Independently initialised mean-variance networks.
#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleModel {
    members: Vec<DenseNet>,
}

impl EnsembleModel {
    pub fn new(members: Vec<DenseNet>) -> Result<Self> {
        if members.len() < 2 {
            return Err(Error::structural("an ensemble needs at least two members"));
        }
        if members.iter().any(|m| m.head != Head::MeanVariance) {
            return Err(Error::structural("ensemble members need a mean-variance head"));
        }
        Ok(Self { members })
    }

    pub fn members(&self) -> &[DenseNet] {
        &self.members
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("# qmuq ensemble v1\nmembers = {}\n", self.members.len());
        for (i, m) in self.members.iter().enumerate() {
            s.push_str(&format!(
                "m{i}.widths = {}\nm{i}.head = {}\nm{i}.params = {}\n",
                join_usize(&m.widths),
                m.head.name(),
                kv::join_floats(&m.params)
            ));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let e = kv::parse(text)?;
        let count: usize = kv::require(&e, "members")?.parse_as()?;
        let members = (0..count)
            .map(|i| DenseNet::from_entries(&e, &format!("m{i}.")))
            .collect::<Result<Vec<_>>>()?;
        Self::new(members)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }
}

/// `M` members sharing the data, each with its own initialisation stream
/// derived from `seed`.
pub fn train_ensemble(
    members: usize,
    hidden: &[usize],
    data: &[LabeledPoint],
    config: &OptimizerConfig,
    seed: u64,
) -> Result<EnsembleModel> {
    if members < 2 {
        return Err(Error::arg("an ensemble needs at least two members"));
    }
    let n_inputs = data
        .first()
        .ok_or_else(|| Error::arg("training set is empty"))?
        .input
        .len();
    let trained = (0..members as u64)
        .map(|m| {
            let mut r = rng::stream(seed, &[m]);
            let net = DenseNet::new(n_inputs, hidden, Head::MeanVariance, &mut r)?;
            Ok(train_net(&net, data, config, 0.0, &mut r)?.net)
        })
        .collect::<Result<Vec<_>>>()?;
    EnsembleModel::new(trained)
}

/// Mixture moments `μ* = mean μ_m`, `σ*² = mean(σ_m² + μ_m²) − μ*²`.
pub fn moment_match(members: &[(f64, f64)]) -> (f64, f64) {
    let m = members.len() as f64;
    let mu = members.iter().map(|(mu, _)| mu).sum::<f64>() / m;
    let second = members.iter().map(|(mu, v)| v + mu * mu).sum::<f64>() / m;
    (mu, (second - mu * mu).max(0.0))
}

pub fn ensemble_predict(ensemble: &EnsembleModel, x: &[f64]) -> Result<(f64, f64)> {
    let outputs = ensemble
        .members
        .iter()
        .map(|m| m.predict(x))
        .collect::<Result<Vec<_>>>()?;
    Ok(moment_match(&outputs))
}
