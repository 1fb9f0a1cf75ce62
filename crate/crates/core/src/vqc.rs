//! Hardware-efficient variational circuits: angle encoding, RY-RZ layers with
//! a nearest-neighbour CNOT chain, exact and shot-based prediction,
//! parameter-shift gradients and full-batch training.

use std::f64::consts::{FRAC_PI_2, PI};
use std::path::Path;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::kv;
use crate::qsim::{self, Gate, StateVector, MAX_QUBITS};

/// Layered RY-RZ ansatz with a CNOT chain `0→1→…→n−1` after each layer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AnsatzSpec {
    n_qubits: usize,
    n_layers: usize,
}

impl AnsatzSpec {
    pub fn new(n_qubits: usize, n_layers: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::structural(format!(
                "ansatz qubit count {n_qubits} outside 1..={MAX_QUBITS}"
            )));
        }
        if n_layers == 0 {
            return Err(Error::structural("ansatz needs at least one layer"));
        }
        Ok(Self { n_qubits, n_layers })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_layers(&self) -> usize {
        self.n_layers
    }

    /// One RY and one RZ angle per qubit per layer.
    pub fn param_count(&self) -> usize {
        2 * self.n_qubits * self.n_layers
    }

    /// Gate sequence for `theta`, with the parameter index of each rotation.
    pub fn gates(&self, theta: &[f64]) -> Vec<(Gate, Option<usize>)> {
        let n = self.n_qubits;
        let mut out = Vec::with_capacity(self.n_layers * (3 * n));
        for layer in 0..self.n_layers {
            for q in 0..n {
                let k = layer * 2 * n + 2 * q;
                out.push((
                    Gate::Ry {
                        target: q,
                        angle: theta[k],
                    },
                    Some(k),
                ));
                out.push((
                    Gate::Rz {
                        target: q,
                        angle: theta[k + 1],
                    },
                    Some(k + 1),
                ));
            }
            for q in 0..n.saturating_sub(1) {
                out.push((
                    Gate::Cnot {
                        control: q,
                        target: q + 1,
                    },
                    None,
                ));
            }
        }
        out
    }
}

/// Affine map from the qubit-averaged `⟨Z⟩` to target units:
/// `prediction = offset + scale · mean_i ⟨Z_i⟩`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Readout {
    pub scale: f64,
    pub offset: f64,
}

impl Default for Readout {
    fn default() -> Self {
        Self {
            scale: 1.0,
            offset: 0.0,
        }
    }
}

impl Readout {
    pub fn apply(&self, z_mean: f64) -> f64 {
        self.offset + self.scale * z_mean
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VqcModel {
    spec: AnsatzSpec,
    theta: Vec<f64>,
    encoding_scale: f64,
    readout: Readout,
}

impl VqcModel {
    pub fn new(spec: AnsatzSpec, theta: Vec<f64>, encoding_scale: f64, readout: Readout) -> Result<Self> {
        if theta.len() != spec.param_count() {
            return Err(Error::structural(format!(
                "theta has {} entries, ansatz needs {}",
                theta.len(),
                spec.param_count()
            )));
        }
        if !encoding_scale.is_finite() || !readout.scale.is_finite() || !readout.offset.is_finite() {
            return Err(Error::arg("non-finite encoding or readout constant"));
        }
        Ok(Self {
            spec,
            theta,
            encoding_scale,
            readout,
        })
    }

    /// Angles drawn uniformly from `[−spread, spread]`; encoding scale π, identity readout.
    pub fn random<R: Rng + ?Sized>(spec: AnsatzSpec, spread: f64, rng: &mut R) -> Self {
        let theta = (0..spec.param_count())
            .map(|_| rng.random_range(-1.0..=1.0) * spread)
            .collect();
        Self {
            spec,
            theta,
            encoding_scale: PI,
            readout: Readout::default(),
        }
    }

    pub fn spec(&self) -> &AnsatzSpec {
        &self.spec
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn encoding_scale(&self) -> f64 {
        self.encoding_scale
    }

    pub fn readout(&self) -> Readout {
        self.readout
    }

    pub fn set_theta(&mut self, theta: Vec<f64>) -> Result<()> {
        if theta.len() != self.spec.param_count() {
            return Err(Error::structural(format!(
                "theta has {} entries, ansatz needs {}",
                theta.len(),
                self.spec.param_count()
            )));
        }
        self.theta = theta;
        Ok(())
    }

    /// Encoded input state followed by the ansatz.
    fn prepare(&self, x: &[f64], theta: &[f64]) -> Result<StateVector> {
        let mut state = self.encoded_state(x)?;
        for (gate, _) in self.spec.gates(theta) {
            state.apply(&gate)?;
        }
        Ok(state)
    }

    fn encoded_state(&self, x: &[f64]) -> Result<StateVector> {
        let mut state = StateVector::zero(self.spec.n_qubits)?;
        state.apply_all(&encode(x, self.spec.n_qubits, self.encoding_scale)?)?;
        Ok(state)
    }

    /// Per-qubit exact `⟨Z_i⟩` for input `x`.
    pub fn qubit_expectations(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.prepare(x, &self.theta)?.expectation_z_all())
    }

    /// Exact prediction in target units.
    pub fn predict_exact(&self, x: &[f64]) -> Result<f64> {
        let z = self.qubit_expectations(x)?;
        Ok(self.readout.apply(mean(&z)))
    }

    /// Exact prediction and its gradient with respect to `theta`
    /// by the two-term parameter-shift rule.
    pub fn prediction_gradient(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let gates = self.spec.gates(&self.theta);
        let mut prefix = self.encoded_state(x)?;
        let mut grad = vec![0.0; self.theta.len()];
        for (j, (gate, param)) in gates.iter().enumerate() {
            if let Some(k) = *param {
                let angle = self.theta[k];
                let shifted = |delta: f64| -> Result<f64> {
                    let mut s = prefix.clone();
                    s.apply(&gate.with_angle(angle + delta))?;
                    for (g, _) in &gates[j + 1..] {
                        s.apply(g)?;
                    }
                    Ok(mean(&s.expectation_z_all()))
                };
                let plus = shifted(FRAC_PI_2)?;
                let minus = shifted(-FRAC_PI_2)?;
                grad[k] = self.readout.scale * 0.5 * (plus - minus);
            }
            prefix.apply(gate)?;
        }
        let value = self.readout.apply(mean(&prefix.expectation_z_all()));
        Ok((value, grad))
    }

    /// Same value and gradient as [`Self::prediction_gradient`] from one
    /// forward and one backward sweep (adjoint differentiation). Training
    /// uses this; the cost no longer grows with the parameter count.
    pub fn adjoint_gradient(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let gates = self.spec.gates(&self.theta);
        let mut psi = self.prepare(x, &self.theta)?;
        let n = self.spec.n_qubits;
        let value = self.readout.apply(mean(&psi.expectation_z_all()));

        // lambda = O psi with O = scale * mean_i Z_i (diagonal)
        let mut lam = psi.clone();
        let weight = self.readout.scale / n as f64;
        for (i, a) in lam.amplitudes_mut().iter_mut().enumerate() {
            let ones = i.count_ones() as f64;
            *a *= weight * (n as f64 - 2.0 * ones);
        }

        let mut grad = vec![0.0; self.theta.len()];
        for (gate, param) in gates.iter().rev() {
            if let Some(k) = *param {
                // d<O>/dθ = Im <lambda| P |psi> for U = exp(-iθP/2)
                grad[k] = generator_overlap(lam.amplitudes(), psi.amplitudes(), gate).im;
            }
            let inv = gate.inverse();
            psi.apply(&inv)?;
            lam.apply(&inv)?;
        }
        Ok((value, grad))
    }

    pub fn to_text(&self) -> String {
        format!(
            "# qmuq vqc model v1\nn_qubits = {}\nn_layers = {}\nencoding_scale = {:?}\nreadout_scale = {:?}\nreadout_offset = {:?}\ntheta = {}\n",
            self.spec.n_qubits,
            self.spec.n_layers,
            self.encoding_scale,
            self.readout.scale,
            self.readout.offset,
            kv::join_floats(&self.theta)
        )
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let e = kv::parse(text)?;
        let spec = AnsatzSpec::new(
            kv::require(&e, "n_qubits")?.parse_as()?,
            kv::require(&e, "n_layers")?.parse_as()?,
        )?;
        let readout = Readout {
            scale: kv::require(&e, "readout_scale")?.parse_as()?,
            offset: kv::require(&e, "readout_offset")?.parse_as()?,
        };
        Self::new(
            spec,
            kv::require(&e, "theta")?.parse_list()?,
            kv::require(&e, "encoding_scale")?.parse_as()?,
            readout,
        )
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// `<a| P |b>` for the generator `P` (Y or Z) of a rotation gate.
fn generator_overlap(a: &[Complex64], b: &[Complex64], gate: &Gate) -> Complex64 {
    let mask = 1usize << gate.target();
    let mut acc = Complex64::new(0.0, 0.0);
    match gate {
        Gate::Ry { .. } => {
            // Y|0> = i|1>, Y|1> = -i|0>
            for i in 0..a.len() {
                let pb = if i & mask == 0 {
                    -Complex64::i() * b[i | mask]
                } else {
                    Complex64::i() * b[i & !mask]
                };
                acc += a[i].conj() * pb;
            }
        }
        Gate::Rz { .. } => {
            for i in 0..a.len() {
                let sign = if i & mask == 0 { 1.0 } else { -1.0 };
                acc += a[i].conj() * b[i] * sign;
            }
        }
        Gate::Cnot { .. } => {}
    }
    acc
}

/// Angle encoding: `RY(scale · x_i)` on qubit `i`, cycling through the
/// input components when there are fewer inputs than qubits.
pub fn encode(x: &[f64], n_qubits: usize, scale: f64) -> Result<Vec<Gate>> {
    if x.is_empty() {
        return Err(Error::arg("empty input vector"));
    }
    if let Some(bad) = x.iter().find(|v| !v.is_finite()) {
        return Err(Error::arg(format!("non-finite input component {bad}")));
    }
    Ok((0..n_qubits)
        .map(|q| Gate::Ry {
            target: q,
            angle: scale * x[q % x.len()],
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PredictMode {
    Exact,
    Shots(u64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Prediction {
    /// Prediction in target units.
    pub mean: f64,
    /// Zero in exact mode; Born-rule variance in target units in shot mode.
    pub variance: f64,
    pub n_shots: Option<u64>,
    /// Qubit-averaged `⟨Z⟩` estimate before the readout map.
    pub o_hat: f64,
}

/// Exact or `N`-shot prediction. In shot mode every qubit is sampled from
/// its own marginal with `N` shots and the shot means are averaged.
pub fn predict<R: Rng + ?Sized>(model: &VqcModel, x: &[f64], mode: PredictMode, rng: &mut R) -> Result<Prediction> {
    let z = model.qubit_expectations(x)?;
    match mode {
        PredictMode::Exact => {
            let o_hat = mean(&z);
            Ok(Prediction {
                mean: model.readout.apply(o_hat),
                variance: 0.0,
                n_shots: None,
                o_hat,
            })
        }
        PredictMode::Shots(n) => {
            if n == 0 {
                return Err(Error::arg("shot mode needs N >= 1"));
            }
            let mut total = 0.0;
            for (q, &e) in z.iter().enumerate() {
                total += qsim::sample_marginal(e, q, n, rng)?.mean();
            }
            let o_hat = total / z.len() as f64;
            let var = qsim::born_variance(o_hat.clamp(-1.0, 1.0), n)?;
            Ok(Prediction {
                mean: model.readout.apply(o_hat),
                variance: model.readout.scale * model.readout.scale * var,
                n_shots: Some(n),
                o_hat,
            })
        }
    }
}

/// `dL/dθ = L'(u) · ∂u/∂θ` with `∂u/∂θ` from the parameter-shift rule.
pub fn parameter_shift_grad(model: &VqcModel, x: &[f64], loss_derivative: impl Fn(f64) -> f64) -> Result<Vec<f64>> {
    let (u, mut grad) = model.prediction_gradient(x)?;
    let d = loss_derivative(u);
    for g in &mut grad {
        *g *= d;
    }
    Ok(grad)
}

/// A labelled training point; `input` is already normalised for the encoder.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledPoint {
    pub input: Vec<f64>,
    pub target: f64,
}

/// Differentiable training objective over the model parameters.
pub trait Objective {
    fn loss(&self, model: &VqcModel) -> Result<f64>;
    fn loss_and_grad(&self, model: &VqcModel) -> Result<(f64, Vec<f64>)>;
}

/// Plain mean-squared error on labelled points.
pub struct DataObjective<'a> {
    pub points: &'a [LabeledPoint],
    pub weight: f64,
}

impl Objective for DataObjective<'_> {
    fn loss(&self, model: &VqcModel) -> Result<f64> {
        let mut sum = 0.0;
        for p in self.points {
            sum += (model.predict_exact(&p.input)? - p.target).powi(2);
        }
        Ok(self.weight * sum / self.points.len() as f64)
    }

    fn loss_and_grad(&self, model: &VqcModel) -> Result<(f64, Vec<f64>)> {
        let mut loss = 0.0;
        let mut grad = vec![0.0; model.theta.len()];
        let w = self.weight / self.points.len() as f64;
        for p in self.points {
            let (u, g) = model.adjoint_gradient(&p.input)?;
            let r = u - p.target;
            loss += w * r * r;
            for (acc, gi) in grad.iter_mut().zip(&g) {
                *acc += w * 2.0 * r * gi;
            }
        }
        Ok((loss, grad))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OptimizerKind {
    /// Heavy-ball gradient descent.
    Momentum { step: f64, momentum: f64 },
    Adam {
        step: f64,
        beta1: f64,
        beta2: f64,
        eps: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OptimizerConfig {
    pub kind: OptimizerKind,
    pub epochs: usize,
}

impl Default for OptimizerConfig {
    /// step 0.05, momentum 0.9, 500 epochs.
    fn default() -> Self {
        Self {
            kind: OptimizerKind::Momentum {
                step: 0.05,
                momentum: 0.9,
            },
            epochs: 500,
        }
    }
}

/// Stateful first-order update rule shared by circuit and network training.
#[derive(Clone, Debug)]
pub struct Optimizer {
    kind: OptimizerKind,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Optimizer {
    pub fn new(kind: OptimizerKind, n_params: usize) -> Self {
        Self {
            kind,
            m: vec![0.0; n_params],
            v: vec![0.0; n_params],
            t: 0,
        }
    }

    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        self.t += 1;
        match self.kind {
            OptimizerKind::Momentum { step, momentum } => {
                for ((p, g), vel) in params.iter_mut().zip(grad).zip(&mut self.m) {
                    *vel = momentum * *vel - step * g;
                    *p += *vel;
                }
            }
            OptimizerKind::Adam {
                step,
                beta1,
                beta2,
                eps,
            } => {
                let c1 = 1.0 - beta1.powi(self.t);
                let c2 = 1.0 - beta2.powi(self.t);
                for (((p, g), m), v) in params.iter_mut().zip(grad).zip(&mut self.m).zip(&mut self.v) {
                    *m = beta1 * *m + (1.0 - beta1) * g;
                    *v = beta2 * *v + (1.0 - beta2) * g * g;
                    *p -= step * (*m / c1) / ((*v / c2).sqrt() + eps);
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainOutcome {
    pub model: VqcModel,
    /// Loss before each update, followed by the loss at the returned parameters.
    pub loss_trace: Vec<f64>,
}

/// Full-batch first-order training on exact predictions.
pub fn train(model: &VqcModel, objective: &dyn Objective, config: &OptimizerConfig) -> Result<TrainOutcome> {
    let mut model = model.clone();
    let mut opt = Optimizer::new(config.kind, model.theta.len());
    let mut trace = Vec::with_capacity(config.epochs + 1);
    for epoch in 0..config.epochs {
        let (loss, grad) = objective.loss_and_grad(&model)?;
        if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::Training { epoch, loss });
        }
        trace.push(loss);
        opt.step(&mut model.theta, &grad);
    }
    let last = objective.loss(&model)?;
    if !last.is_finite() {
        return Err(Error::Training {
            epoch: config.epochs,
            loss: last,
        });
    }
    trace.push(last);
    Ok(TrainOutcome {
        model,
        loss_trace: trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use approx::assert_abs_diff_eq;

    fn model(n: usize, layers: usize, seed: u64) -> VqcModel {
        VqcModel::random(AnsatzSpec::new(n, layers).unwrap(), PI, &mut rng_from_seed(seed))
    }

    /// Central finite differences of the exact prediction.
    fn fd_gradient(m: &VqcModel, x: &[f64], h: f64) -> Vec<f64> {
        (0..m.theta().len())
            .map(|k| {
                let mut plus = m.clone();
                let mut minus = m.clone();
                plus.theta[k] += h;
                minus.theta[k] -= h;
                (plus.predict_exact(x).unwrap() - minus.predict_exact(x).unwrap()) / (2.0 * h)
            })
            .collect()
    }

    #[test]
    fn param_count_and_layout() {
        let spec = AnsatzSpec::new(4, 3).unwrap();
        assert_eq!(spec.param_count(), 24);
        let gates = spec.gates(&[0.0; 24]);
        assert_eq!(gates.len(), 3 * (8 + 3));
        assert!(AnsatzSpec::new(0, 3).is_err());
        assert!(AnsatzSpec::new(4, 0).is_err());
        assert!(VqcModel::new(spec, vec![0.0; 5], PI, Readout::default()).is_err());
    }

    #[test]
    fn encoding_rules() {
        let g = encode(&[0.0, 0.0], 4, PI).unwrap();
        assert!(g.iter().all(|g| g.angle() == Some(0.0)));
        let g = encode(&[0.25], 4, PI).unwrap();
        assert_eq!(g.len(), 4);
        assert!(g.iter().all(|g| g.angle() == Some(0.25 * PI)));
        assert!(encode(&[f64::NAN], 2, PI).is_err());
        assert!(encode(&[], 2, PI).is_err());

        let mut s = StateVector::zero(1).unwrap();
        s.apply_all(&encode(&[1.0], 1, PI).unwrap()).unwrap();
        assert_abs_diff_eq!(s.amplitudes()[1].norm_sqr(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn identity_circuit_predicts_one() {
        let spec = AnsatzSpec::new(4, 3).unwrap();
        let m = VqcModel::new(spec, vec![0.0; 24], PI, Readout::default()).unwrap();
        let p = predict(&m, &[0.0, 0.0], PredictMode::Exact, &mut rng_from_seed(0)).unwrap();
        assert_abs_diff_eq!(p.mean, 1.0, epsilon = 1e-14);
        assert_eq!(p.variance, 0.0);
        assert_eq!(p.n_shots, None);
    }

    #[test]
    fn shot_prediction_variance() {
        let m = model(4, 3, 5);
        let mut rng = rng_from_seed(1);
        let p = predict(&m, &[0.3, -0.2], PredictMode::Shots(400), &mut rng).unwrap();
        assert_eq!(p.n_shots, Some(400));
        assert_abs_diff_eq!(p.variance, (1.0 - p.mean * p.mean) / 400.0, epsilon = 1e-15);
        assert!(predict(&m, &[0.3], PredictMode::Shots(0), &mut rng).is_err());
    }

    #[test]
    fn shot_mode_converges_to_exact() {
        let m = model(4, 3, 11);
        let x = [0.4, -0.7];
        let exact = m.predict_exact(&x).unwrap();
        let n = 1_000_000;
        let p = predict(&m, &x, PredictMode::Shots(n), &mut rng_from_seed(2)).unwrap();
        assert!((p.mean - exact).abs() <= 3.0 * (1.0 / n as f64).sqrt());
    }

    #[test]
    fn single_qubit_gradients() {
        // 1 qubit, 1 layer: ⟨Z⟩ = cos θ_RY at x = 0
        let spec = AnsatzSpec::new(1, 1).unwrap();
        let at = |theta: f64| VqcModel::new(spec, vec![theta, 0.3], PI, Readout::default()).unwrap();
        let g0 = parameter_shift_grad(&at(0.0), &[0.0], |_| 1.0).unwrap();
        assert_abs_diff_eq!(g0[0], 0.0, epsilon = 1e-15);
        let m = at(FRAC_PI_2);
        let g = parameter_shift_grad(&m, &[0.0], |_| 1.0).unwrap();
        assert_abs_diff_eq!(g[0], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(fd_gradient(&m, &[0.0], 1e-5)[0], -1.0, epsilon = 1e-9);
    }

    #[test]
    fn parameter_shift_matches_finite_differences() {
        for seed in 0..5 {
            let m = model(4, 3, 100 + seed);
            let x = [0.3 - 0.1 * seed as f64, 0.55];
            let ps = parameter_shift_grad(&m, &x, |_| 1.0).unwrap();
            let fd = fd_gradient(&m, &x, 1e-5);
            for (a, b) in ps.iter().zip(&fd) {
                assert!((a - b).abs() <= 1e-5 * b.abs().max(1e-2), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn adjoint_matches_parameter_shift() {
        for (n, layers, seed) in [(1, 1, 1), (2, 2, 2), (4, 3, 3), (5, 2, 4), (8, 3, 5)] {
            let spec = AnsatzSpec::new(n, layers).unwrap();
            let base = model(n, layers, seed);
            let m = VqcModel::new(spec, base.theta().to_vec(), PI, Readout { scale: 0.7, offset: -0.2 }).unwrap();
            let x = [0.37, -0.61];
            let (u_ps, g_ps) = m.prediction_gradient(&x).unwrap();
            let (u_adj, g_adj) = m.adjoint_gradient(&x).unwrap();
            assert_abs_diff_eq!(u_ps, u_adj, epsilon = 1e-14);
            for (a, b) in g_ps.iter().zip(&g_adj) {
                assert_abs_diff_eq!(*a, *b, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn loss_derivative_is_chained() {
        let m = model(3, 2, 8);
        let x = [0.1];
        let (u, g) = m.prediction_gradient(&x).unwrap();
        let chained = parameter_shift_grad(&m, &x, |v| 2.0 * (v - 0.5)).unwrap();
        for (a, b) in chained.iter().zip(&g) {
            assert_abs_diff_eq!(*a, 2.0 * (u - 0.5) * b, epsilon = 1e-14);
        }
    }

    #[test]
    fn fits_constant_zero_target() {
        let m = model(4, 3, 21);
        let points: Vec<_> = (0..8)
            .map(|i| LabeledPoint {
                input: vec![-1.0 + i as f64 / 4.0, 0.5],
                target: 0.0,
            })
            .collect();
        let obj = DataObjective {
            points: &points,
            weight: 1.0,
        };
        let out = train(&m, &obj, &OptimizerConfig::default()).unwrap();
        assert!(*out.loss_trace.last().unwrap() < 1e-2);
        assert_eq!(out.loss_trace.len(), 501);
        // determinism
        let again = train(&m, &obj, &OptimizerConfig::default()).unwrap();
        assert_eq!(out.model.theta(), again.model.theta());
    }

    #[test]
    fn divergence_is_reported() {
        let m = model(2, 1, 3);
        let points = vec![LabeledPoint {
            input: vec![0.2],
            target: f64::NAN,
        }];
        let obj = DataObjective {
            points: &points,
            weight: 1.0,
        };
        let err = train(&m, &obj, &OptimizerConfig::default()).unwrap_err();
        assert!(matches!(err, Error::Training { epoch: 0, .. }));
    }

    #[test]
    fn text_round_trip() {
        let m = model(5, 2, 77);
        let back = VqcModel::from_text(&m.to_text()).unwrap();
        assert_eq!(back, m);
        assert!(VqcModel::from_text("n_qubits = 4\n").is_err());
    }
}
