//! Python bindings: the statevector simulator, interval and calibration
//! helpers, the variational-circuit surrogate and the experiment runner.

use std::collections::BTreeMap;
use std::path::PathBuf;

use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use qmuq::harness::{self, Experiment, ExperimentConfig};
use qmuq::physics::{self, LossSpec, PdeKind, PdeTask};
use qmuq::qsim::{self, Gate};
use qmuq::rng::rng_from_seed;
use qmuq::uq::{self, InfoBudget, InfoMethod, PredictiveSource};
use qmuq::vqc::{self, AnsatzSpec, OptimizerConfig, OptimizerKind, PredictMode, Readout};

fn to_py(e: qmuq::Error) -> PyErr {
    match e {
        qmuq::Error::Training { .. } => PyRuntimeError::new_err(e.to_string()),
        qmuq::Error::Io { .. } => PyOSError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn pde_kind(name: &str) -> PyResult<PdeKind> {
    name.parse().map_err(to_py)
}

/// Dense `n`-qubit statevector, qubit 0 least significant.
#[pyclass(name = "StateVector", module = "qmuq", from_py_object)]
#[derive(Clone)]
pub struct PyStateVector {
    inner: qsim::StateVector,
}

#[pymethods]
impl PyStateVector {
    #[new]
    fn new(n_qubits: usize) -> PyResult<Self> {
        Ok(Self { inner: qsim::StateVector::zero(n_qubits).map_err(to_py)? })
    }

    #[getter]
    fn n_qubits(&self) -> usize {
        self.inner.n_qubits()
    }

    fn ry(&mut self, target: usize, angle: f64) -> PyResult<()> {
        self.inner.apply(&Gate::Ry { target, angle }).map_err(to_py)
    }

    fn rz(&mut self, target: usize, angle: f64) -> PyResult<()> {
        self.inner.apply(&Gate::Rz { target, angle }).map_err(to_py)
    }

    fn cnot(&mut self, control: usize, target: usize) -> PyResult<()> {
        self.inner.apply(&Gate::Cnot { control, target }).map_err(to_py)
    }

    fn expectation_z(&self, qubit: usize) -> PyResult<f64> {
        self.inner.expectation_z(qubit).map_err(to_py)
    }

    fn probabilities(&self) -> Vec<f64> {
        self.inner.probabilities()
    }

    /// Mean of `n_shots` ±1 outcomes on `qubit`.
    fn sample_mean(&self, qubit: usize, n_shots: u64, seed: u64) -> PyResult<f64> {
        let rec = qsim::sample_shots(&self.inner, qubit, n_shots, &mut rng_from_seed(seed)).map_err(to_py)?;
        Ok(rec.mean())
    }

    fn __repr__(&self) -> String {
        format!("StateVector(n_qubits={})", self.inner.n_qubits())
    }
}

/// Layered RY/RZ + CNOT-chain circuit with angle encoding and mean-Z readout.
#[pyclass(name = "VqcModel", module = "qmuq", from_py_object)]
#[derive(Clone)]
pub struct PyVqcModel {
    inner: vqc::VqcModel,
}

#[pymethods]
impl PyVqcModel {
    /// Random parameters uniform in `[-spread, spread]`.
    #[new]
    #[pyo3(signature = (n_qubits, n_layers, seed=0, spread=std::f64::consts::PI))]
    fn new(n_qubits: usize, n_layers: usize, seed: u64, spread: f64) -> PyResult<Self> {
        let spec = AnsatzSpec::new(n_qubits, n_layers).map_err(to_py)?;
        Ok(Self { inner: vqc::VqcModel::random(spec, spread, &mut rng_from_seed(seed)) })
    }

    #[staticmethod]
    #[pyo3(signature = (n_qubits, n_layers, theta, scale=1.0, offset=0.0))]
    fn from_params(n_qubits: usize, n_layers: usize, theta: Vec<f64>, scale: f64, offset: f64) -> PyResult<Self> {
        let spec = AnsatzSpec::new(n_qubits, n_layers).map_err(to_py)?;
        let inner = vqc::VqcModel::new(spec, theta, std::f64::consts::PI, Readout { scale, offset }).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn theta(&self) -> Vec<f64> {
        self.inner.theta().to_vec()
    }

    #[getter]
    fn n_params(&self) -> usize {
        self.inner.spec().param_count()
    }

    fn predict(&self, x: Vec<f64>) -> PyResult<f64> {
        self.inner.predict_exact(&x).map_err(to_py)
    }

    /// `(mean, variance)` from `n_shots` shots per qubit.
    fn predict_shots(&self, x: Vec<f64>, n_shots: u64, seed: u64) -> PyResult<(f64, f64)> {
        let p = vqc::predict(&self.inner, &x, PredictMode::Shots(n_shots), &mut rng_from_seed(seed)).map_err(to_py)?;
        Ok((p.mean, p.variance))
    }

    /// Parameter-shift gradient of the prediction.
    fn gradient(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        vqc::parameter_shift_grad(&self.inner, &x, |_| 1.0).map_err(to_py)
    }

    /// Train on the standard `task` ("heat" or "burgers") with Adam and
    /// return the loss trace. The model is updated in place.
    #[pyo3(signature = (task="heat", lambda_physics=1.0, epochs=200, step=0.05))]
    fn train(&mut self, task: &str, lambda_physics: f64, epochs: usize, step: f64) -> PyResult<Vec<f64>> {
        let task = PdeTask::standard(pde_kind(task)?);
        let spec = LossSpec::new(lambda_physics, 1.0).map_err(to_py)?;
        let config = OptimizerConfig {
            kind: OptimizerKind::Adam { step, beta1: 0.9, beta2: 0.999, eps: 1e-8 },
            epochs,
        };
        let out = physics::train_surrogate(&self.inner, &task, &spec, task.samples(), &config).map_err(to_py)?;
        self.inner = out.model;
        Ok(out.loss_trace)
    }

    fn pde_residual(&self, task: &str, x: f64, t: f64) -> PyResult<f64> {
        let task = PdeTask::standard(pde_kind(task)?);
        physics::pde_residual(&self.inner, &task, (x, t)).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        let s = self.inner.spec();
        format!("VqcModel(n_qubits={}, n_layers={})", s.n_qubits(), s.n_layers())
    }
}

/// `(1 - z^2) / N`.
#[pyfunction]
fn born_variance(expectation: f64, n_shots: u64) -> PyResult<f64> {
    qsim::born_variance(expectation, n_shots).map_err(to_py)
}

/// `(lower, upper)` of the shot-noise interval around `o_hat`.
#[pyfunction]
fn quantum_interval(o_hat: f64, n_shots: u64, level: f64) -> PyResult<(f64, f64)> {
    let iv = uq::quantum_interval(o_hat, n_shots, level).map_err(to_py)?;
    Ok((iv.lower(), iv.upper()))
}

#[pyfunction]
fn gaussian_interval(mean: f64, variance: f64, level: f64) -> PyResult<(f64, f64)> {
    let iv = uq::gaussian_interval(mean, variance, level).map_err(to_py)?;
    Ok((iv.lower(), iv.upper()))
}

#[pyfunction]
fn normal_quantile(p: f64) -> f64 {
    uq::normal_quantile(p)
}

/// Bits per evaluation. `method` is "quantum" (uses `n_qubits` and `count`
/// as shots), "mc_dropout" (`count` passes) or "ensemble" (`count` members).
#[pyfunction]
#[pyo3(signature = (method, count, n_qubits=1))]
fn info_bits(method: &str, count: u64, n_qubits: u64) -> PyResult<f64> {
    let m = match method {
        "quantum" => InfoMethod::Quantum { n_qubits, shots: count },
        "mc_dropout" | "dropout" => InfoMethod::McDropout { passes: count },
        "ensemble" => InfoMethod::Ensemble { members: count },
        other => return Err(PyValueError::new_err(format!("unknown method {other:?}"))),
    };
    Ok(uq::info_bits(&InfoBudget::new(m, 1).map_err(to_py)?))
}

/// Gaussian predictives against truths over levels 0.05..0.95.
/// Returns `(levels, empirical, ece)`.
#[pyfunction]
fn calibration(means: Vec<f64>, variances: Vec<f64>, truths: Vec<f64>) -> PyResult<(Vec<f64>, Vec<f64>, f64)> {
    if means.len() != variances.len() {
        return Err(PyValueError::new_err("means and variances differ in length"));
    }
    let preds: Vec<_> = means
        .iter()
        .zip(&variances)
        .map(|(&mean, &variance)| PredictiveSource::Gaussian { mean, variance })
        .collect();
    let r = uq::calibration_report(&preds, &truths, &uq::default_levels()).map_err(to_py)?;
    Ok((r.levels, r.empirical, r.ece))
}

#[pyfunction]
fn exact_solution(task: &str, x: f64, t: f64) -> PyResult<f64> {
    Ok(PdeTask::standard(pde_kind(task)?).exact_solution(x, t))
}

#[pyfunction]
fn list_experiments() -> Vec<(&'static str, &'static str)> {
    Experiment::ALL.iter().map(|e| (e.name(), e.description())).collect()
}

/// Run an experiment from config text. Returns `{table_name: csv_text}`;
/// with `out_dir` the tables, figures and manifest are also written there.
#[pyfunction]
#[pyo3(signature = (config, out_dir=None, jobs=1, seed=None))]
fn run_experiment(
    py: Python<'_>,
    config: &str,
    out_dir: Option<PathBuf>,
    jobs: usize,
    seed: Option<u64>,
) -> PyResult<BTreeMap<String, String>> {
    let mut cfg = ExperimentConfig::parse(config).map_err(to_py)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    py.detach(|| {
        let out = harness::run(&cfg, jobs)?;
        if let Some(dir) = &out_dir {
            harness::write_outputs(&out, dir)?;
        }
        out.tables
            .iter()
            .map(|t| Ok((t.name.clone(), t.to_csv()?)))
            .collect::<qmuq::Result<BTreeMap<_, _>>>()
    })
    .map_err(to_py)
}

#[pymodule]
pub fn _qmuq(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyStateVector>()?;
    m.add_class::<PyVqcModel>()?;
    m.add_function(wrap_pyfunction!(born_variance, m)?)?;
    m.add_function(wrap_pyfunction!(quantum_interval, m)?)?;
    m.add_function(wrap_pyfunction!(gaussian_interval, m)?)?;
    m.add_function(wrap_pyfunction!(normal_quantile, m)?)?;
    m.add_function(wrap_pyfunction!(info_bits, m)?)?;
    m.add_function(wrap_pyfunction!(calibration, m)?)?;
    m.add_function(wrap_pyfunction!(exact_solution, m)?)?;
    m.add_function(wrap_pyfunction!(list_experiments, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
