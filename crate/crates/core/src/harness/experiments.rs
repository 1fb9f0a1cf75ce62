use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::baselines::{self, DenseNet, Head};
use crate::error::{Error, Result};
use crate::harness::config::{Experiment, ExperimentConfig, Method, OptimizerName};
use crate::harness::svg::{Figure, Series};
use crate::harness::table::{emit_outputs, Cell, Format, ResultTable};
use crate::physics::{self, DataPoint, LossSpec, PdeTask};
use crate::qsim::{self, Gate, StateVector};
use crate::rng;
use crate::uq::{self, InfoBudget, InfoMethod, PredictiveSource};
use crate::vqc::{AnsatzSpec, LabeledPoint, OptimizerConfig, OptimizerKind, VqcModel};

// Stream tags: every random draw in a run comes from
// `rng::stream(seed, &[TAG, ...])` with one of these leading tags.
const INIT: u64 = 1;
const TRAIN_DATA: u64 = 2;
const TEST_DATA: u64 = 3;
const SHOTS: u64 = 4;
const TRUTH_NOISE: u64 = 5;
const DROPOUT_TRAIN: u64 = 6;
const DROPOUT_PASSES: u64 = 7;
const ENSEMBLE: u64 = 8;
const SEED_INDEX: u64 = 9;

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub config: ExperimentConfig,
    pub tables: Vec<ResultTable>,
}

/// Run `config` on a pool of `jobs` worker threads. Results do not depend
/// on `jobs`: work items are merged back in grid order.
pub fn run(config: &ExperimentConfig, jobs: usize) -> Result<RunOutput> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::arg(format!("cannot start worker pool: {e}")))?;
    let tables = pool.install(|| match config.experiment {
        Experiment::VarianceScaling => run_variance_scaling(config),
        Experiment::Coverage => run_comparison(config, "coverage"),
        Experiment::Intervals => run_comparison(config, "intervals"),
        Experiment::Calibration => run_calibration(config),
        Experiment::Constrained => run_constrained(config),
        Experiment::InfoEfficiency => run_info_efficiency(config),
    })?;
    Ok(RunOutput {
        config: config.clone(),
        tables,
    })
}

/// [`run`], then write every table (CSV + SVG) and `manifest.txt` into `dir`.
pub fn run_to_dir(config: &ExperimentConfig, jobs: usize, dir: &Path) -> Result<Vec<PathBuf>> {
    write_outputs(&run(config, jobs)?, dir)
}

/// Write a finished run's tables, figures and manifest into `dir`.
pub fn write_outputs(out: &RunOutput, dir: &Path) -> Result<Vec<PathBuf>> {
    let config = &out.config;
    let mut written = Vec::new();
    for t in &out.tables {
        written.extend(emit_outputs(t, &[Format::Csv, Format::Svg], dir)?);
    }
    let names: Vec<String> = written
        .iter()
        .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
        .collect();
    let manifest = format!(
        "# qmuq run manifest\nconfig_hash = {}\nfiles = {}\n\n{}",
        config.hash(),
        names.join(", "),
        config.canonical_text()
    );
    let path = dir.join("manifest.txt");
    std::fs::write(&path, manifest).map_err(|e| Error::io(&path, e))?;
    written.push(path);
    Ok(written)
}

/// Seed of the `index`-th independent training run.
pub fn seed_for(config: &ExperimentConfig, index: usize) -> u64 {
    rng::derive_seed(config.seed, &[SEED_INDEX, index as u64])
}

fn circuit_optimizer(config: &ExperimentConfig) -> OptimizerConfig {
    let kind = match config.optimizer {
        OptimizerName::Momentum => OptimizerKind::Momentum {
            step: config.step,
            momentum: config.momentum,
        },
        OptimizerName::Adam => OptimizerKind::Adam {
            step: config.step,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        },
    };
    OptimizerConfig {
        kind,
        epochs: config.epochs,
    }
}

fn net_optimizer(config: &ExperimentConfig) -> OptimizerConfig {
    let mut opt = baselines::default_net_optimizer();
    opt.epochs = config.net_epochs;
    if let OptimizerKind::Adam { step, .. } = &mut opt.kind {
        *step = config.net_step;
    }
    opt
}

fn initial_circuits(config: &ExperimentConfig, n_qubits: usize, seed: u64) -> Result<Vec<VqcModel>> {
    let spec = AnsatzSpec::new(n_qubits, config.n_layers)?;
    Ok((0..config.restarts as u64)
        .map(|r| VqcModel::random(spec, PI, &mut rng::stream(seed, &[INIT, n_qubits as u64, r])))
        .collect())
}

/// Train from every initialisation and keep the lowest final loss.
fn train_circuit(
    config: &ExperimentConfig,
    task: &PdeTask,
    inits: &[VqcModel],
    lambda: f64,
    data: &[DataPoint],
) -> Result<VqcModel> {
    let spec = LossSpec::new(lambda, config.data_weight)?;
    let mut best: Option<(f64, VqcModel)> = None;
    for init in inits {
        let out = physics::train_surrogate(init, task, &spec, data, &circuit_optimizer(config))?;
        let loss = *out.loss_trace.last().expect("trace has the initial loss");
        if best.as_ref().is_none_or(|(b, _)| loss < *b) {
            best = Some((loss, out.model));
        }
    }
    best.map(|(_, m)| m).ok_or_else(|| Error::arg("no initialisations"))
}

/// Uniform interior points with the exact solution as clean value.
fn interior_points<R: Rng + ?Sized>(task: &PdeTask, n: usize, rng: &mut R) -> Vec<DataPoint> {
    let d = *task.domain();
    (0..n)
        .map(|_| {
            let x = rng.random_range(d.x_min..d.x_max);
            let t = rng.random_range(d.t_min..d.t_max);
            DataPoint {
                x,
                t,
                u: task.exact_solution(x, t),
            }
        })
        .collect()
}

fn add_noise<R: Rng + ?Sized>(values: &[f64], std: f64, rng: &mut R) -> Vec<f64> {
    values
        .iter()
        .map(|v| {
            let e: f64 = StandardNormal.sample(rng);
            v + std * e
        })
        .collect()
}

/// One `N`-shot `Ô` per point from per-qubit exact expectations.
fn shot_estimates<R: Rng + ?Sized>(expectations: &[Vec<f64>], n_shots: u64, rng: &mut R) -> Result<Vec<f64>> {
    expectations
        .iter()
        .map(|z| {
            let mut total = 0.0;
            for (q, &e) in z.iter().enumerate() {
                total += qsim::sample_marginal(e.clamp(-1.0, 1.0), q, n_shots, rng)?.mean();
            }
            Ok(total / z.len() as f64)
        })
        .collect()
}

fn shot_sources(model: &VqcModel, o_hats: &[f64], n_shots: u64) -> Vec<PredictiveSource> {
    let r = model.readout();
    o_hats
        .iter()
        .map(|&o| PredictiveSource::Shots {
            o_hat: o.clamp(-1.0, 1.0),
            n_shots,
            scale: r.scale,
            offset: r.offset,
        })
        .collect()
}

fn coverage_and_width(sources: &[PredictiveSource], truths: &[f64], level: f64) -> Result<(f64, f64)> {
    let intervals = sources.iter().map(|s| s.interval(level)).collect::<Result<Vec<_>>>()?;
    Ok((uq::coverage(&intervals, truths)?, uq::mean_width(&intervals)?))
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.iter().sum::<f64>() / v.len() as f64
}

fn std_dev(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let m = mean(v);
    (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}

fn rmse(a: &[f64], b: &[f64]) -> f64 {
    (a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / a.len() as f64).sqrt()
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let logs: Vec<(f64, f64)> = points.iter().map(|(x, y)| (x.ln(), y.ln())).collect();
    let mx = mean(&logs.iter().map(|p| p.0).collect::<Vec<_>>());
    let my = mean(&logs.iter().map(|p| p.1).collect::<Vec<_>>());
    let sxy: f64 = logs.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = logs.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    sxy / sxx
}

// ---------------------------------------------------------------- variance

fn run_variance_scaling(config: &ExperimentConfig) -> Result<Vec<ResultTable>> {
    let cells: Vec<(usize, usize)> = (0..config.expectations.len())
        .flat_map(|zi| (0..config.shots.len()).map(move |ni| (zi, ni)))
        .collect();
    let results = cells
        .par_iter()
        .map(|&(zi, ni)| {
            let z = config.expectations[zi];
            let n = config.shots[ni];
            let seed = rng::derive_seed(config.seed, &[zi as u64, n]);
            let mut state = StateVector::zero(1)?;
            state.apply(&Gate::Ry {
                target: 0,
                angle: z.acos(),
            })?;
            let exact = state.expectation_z(0)?;
            let mut r = rng::stream(seed, &[SHOTS]);
            let means = (0..config.repetitions)
                .map(|_| qsim::sample_shots(&state, 0, n, &mut r).map(|rec| rec.mean()))
                .collect::<Result<Vec<_>>>()?;
            let empirical = std_dev(&means).powi(2);
            Ok((zi, n, seed, exact, mean(&means), empirical, qsim::born_variance(exact, n)?))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut table = ResultTable::new(
        "variance_scaling",
        &[
            "expectation",
            "shots",
            "repetitions",
            "mean_estimate",
            "empirical_variance",
            "born_variance",
            "ratio",
            "slope",
            "seed",
        ],
    );
    let mut fig = Figure::new("Shot-mean variance", "shots N", "variance").log_x().log_y();
    for (zi, &z) in config.expectations.iter().enumerate() {
        let rows: Vec<_> = results.iter().filter(|r| r.0 == zi).collect();
        let slope = if rows.len() >= 2 {
            log_log_slope(&rows.iter().map(|r| (r.1 as f64, r.5)).collect::<Vec<_>>())
        } else {
            f64::NAN
        };
        for &&(_, n, seed, _, m, emp, born) in &rows {
            table.push(vec![
                z.into(),
                n.into(),
                config.repetitions.into(),
                m.into(),
                emp.into(),
                born.into(),
                (emp / born).into(),
                slope.into(),
                seed.into(),
            ]);
        }
        fig.series.push(Series::scatter(
            &format!("<Z>={z} empirical"),
            rows.iter().map(|r| (r.1 as f64, r.5)).collect(),
        ));
        fig.series.push(Series::dashed(
            &format!("<Z>={z} (1-z^2)/N"),
            rows.iter().map(|r| (r.1 as f64, r.6)).collect(),
        ));
    }
    table.figure = Some(fig);
    Ok(vec![table])
}

// --------------------------------------------------------------- comparison

#[derive(Clone, Copy, Debug)]
enum Unit {
    Quantum(usize),
    Dropout,
    Ensemble(usize),
}

struct Dataset {
    train: Vec<DataPoint>,
    test: Vec<DataPoint>,
    /// Noisy held-out observations, one vector per repetition.
    truths: Vec<Vec<f64>>,
}

fn comparison_data(config: &ExperimentConfig, task: &PdeTask, seed: u64) -> Dataset {
    let mut r = rng::stream(seed, &[TRAIN_DATA]);
    let mut train: Vec<DataPoint> = task.samples().to_vec();
    let interior = interior_points(task, config.n_train, &mut r);
    let noisy = add_noise(&interior.iter().map(|p| p.u).collect::<Vec<_>>(), config.noise_std, &mut r);
    train.extend(interior.iter().zip(noisy).map(|(p, u)| DataPoint { u, ..*p }));
    let test = interior_points(task, config.n_test, &mut rng::stream(seed, &[TEST_DATA]));
    let clean: Vec<f64> = test.iter().map(|p| p.u).collect();
    let truths = (0..config.repetitions as u64)
        .map(|rep| add_noise(&clean, config.noise_std, &mut rng::stream(seed, &[TRUTH_NOISE, rep])))
        .collect();
    Dataset { train, test, truths }
}

fn labeled(task: &PdeTask, points: &[DataPoint]) -> Vec<LabeledPoint> {
    points
        .iter()
        .map(|p| LabeledPoint {
            input: task.domain().normalize(p.x, p.t).to_vec(),
            target: p.u,
        })
        .collect()
}

/// Per-unit result: `(shots, truth, level, coverage per repetition, width per repetition)`.
type Evaluation = Vec<(u64, &'static str, f64, Vec<f64>, Vec<f64>)>;

fn evaluate_unit(config: &ExperimentConfig, task: &PdeTask, unit: Unit, seed: u64) -> Result<Evaluation> {
    let data = comparison_data(config, task, seed);
    let mut out = Evaluation::new();
    match unit {
        Unit::Quantum(n) => {
            let inits = initial_circuits(config, n, seed)?;
            let model = train_circuit(config, task, &inits, config.lambda_physics, &data.train)?;
            let inputs: Vec<[f64; 2]> = data.test.iter().map(|p| task.domain().normalize(p.x, p.t)).collect();
            let z = inputs
                .iter()
                .map(|x| model.qubit_expectations(x))
                .collect::<Result<Vec<_>>>()?;
            let circuit_truth = inputs
                .iter()
                .map(|x| model.predict_exact(x))
                .collect::<Result<Vec<_>>>()?;
            for &shots in &config.shots {
                let mut per_rep = Vec::with_capacity(config.repetitions);
                for rep in 0..config.repetitions {
                    let mut r = rng::stream(seed, &[SHOTS, n as u64, shots, rep as u64]);
                    per_rep.push(shot_sources(&model, &shot_estimates(&z, shots, &mut r)?, shots));
                }
                for &level in &config.levels {
                    for truth in ["observed", "circuit"] {
                        let (mut cov, mut wid) = (Vec::new(), Vec::new());
                        for (rep, sources) in per_rep.iter().enumerate() {
                            let truths = if truth == "observed" { &data.truths[rep] } else { &circuit_truth };
                            let (c, w) = coverage_and_width(sources, truths, level)?;
                            cov.push(c);
                            wid.push(w);
                        }
                        out.push((shots, truth, level, cov, wid));
                    }
                }
            }
        }
        Unit::Dropout => {
            let train = labeled(task, &data.train);
            let test = labeled(task, &data.test);
            let mut r = rng::stream(seed, &[DROPOUT_TRAIN]);
            let init = DenseNet::new(2, &config.hidden, Head::Mean, &mut r)?;
            let net = baselines::train_net(&init, &train, &net_optimizer(config), config.dropout_rate, &mut r)?.net;
            let mut per_rep = Vec::with_capacity(config.repetitions);
            for rep in 0..config.repetitions {
                let mut r = rng::stream(seed, &[DROPOUT_PASSES, rep as u64]);
                let sources = test
                    .iter()
                    .map(|p| {
                        let d = baselines::mc_dropout_predict(&net, &p.input, config.passes, config.dropout_rate, &mut r)?;
                        Ok(PredictiveSource::Gaussian {
                            mean: d.mean,
                            variance: d.variance,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                per_rep.push(sources);
            }
            for &level in &config.levels {
                let (mut cov, mut wid) = (Vec::new(), Vec::new());
                for (rep, sources) in per_rep.iter().enumerate() {
                    let (c, w) = coverage_and_width(sources, &data.truths[rep], level)?;
                    cov.push(c);
                    wid.push(w);
                }
                out.push((0, "observed", level, cov, wid));
            }
        }
        Unit::Ensemble(m) => {
            let train = labeled(task, &data.train);
            let test = labeled(task, &data.test);
            let ens = baselines::train_ensemble(
                m,
                &config.hidden,
                &train,
                &net_optimizer(config),
                rng::derive_seed(seed, &[ENSEMBLE, m as u64]),
            )?;
            let sources = test
                .iter()
                .map(|p| {
                    let (mean, variance) = baselines::ensemble_predict(&ens, &p.input)?;
                    Ok(PredictiveSource::Gaussian { mean, variance })
                })
                .collect::<Result<Vec<_>>>()?;
            for &level in &config.levels {
                let (mut cov, mut wid) = (Vec::new(), Vec::new());
                for truths in &data.truths {
                    let (c, w) = coverage_and_width(&sources, truths, level)?;
                    cov.push(c);
                    wid.push(w);
                }
                out.push((0, "observed", level, cov, wid));
            }
        }
    }
    Ok(out)
}

fn run_comparison(config: &ExperimentConfig, name: &str) -> Result<Vec<ResultTable>> {
    let task = PdeTask::standard(config.task);
    let mut units = Vec::new();
    for method in &config.methods {
        match method {
            Method::Quantum => units.extend(config.n_qubits.iter().map(|&n| Unit::Quantum(n))),
            Method::McDropout => units.push(Unit::Dropout),
            Method::Ensemble => units.extend(config.ensemble_sizes.iter().map(|&m| Unit::Ensemble(m))),
        }
    }
    let cells: Vec<(usize, Unit)> = (0..config.seeds)
        .flat_map(|s| units.iter().map(move |&u| (s, u)))
        .collect();
    let results: Vec<Result<Evaluation>> = cells
        .par_iter()
        .map(|&(s, unit)| evaluate_unit(config, &task, unit, seed_for(config, s)))
        .collect();

    let columns = [
        "method",
        "n_qubits",
        "shots",
        "members",
        "passes",
        "truth",
        "level",
        "coverage",
        "coverage_std",
        "width",
        "seed_index",
        "seed",
        "error",
    ];
    let mut table = ResultTable::new(name, &columns);
    let describe = |unit: Unit| -> (&'static str, u64, u64, u64) {
        match unit {
            Unit::Quantum(n) => ("quantum", n as u64, 0, 0),
            Unit::Dropout => ("mc_dropout", 0, 0, config.passes as u64),
            Unit::Ensemble(m) => ("ensemble", 0, m as u64, 0),
        }
    };
    for (&(s, unit), res) in cells.iter().zip(&results) {
        let (method, n, m, t) = describe(unit);
        let seed = seed_for(config, s);
        match res {
            Ok(eval) => {
                for (shots, truth, level, cov, wid) in eval {
                    table.push(vec![
                        method.into(),
                        n.into(),
                        (*shots).into(),
                        m.into(),
                        t.into(),
                        (*truth).into(),
                        (*level).into(),
                        mean(cov).into(),
                        std_dev(cov).into(),
                        mean(wid).into(),
                        s.into(),
                        seed.into(),
                        "".into(),
                    ]);
                }
            }
            Err(e) => table.push(vec![
                method.into(),
                n.into(),
                0u64.into(),
                m.into(),
                t.into(),
                "".into(),
                f64::NAN.into(),
                f64::NAN.into(),
                f64::NAN.into(),
                f64::NAN.into(),
                s.into(),
                seed.into(),
                format!("{}: {e}", e.kind()).into(),
            ]),
        }
    }

    // Summary over seeds and circuit sizes.
    let mut summary = ResultTable::new(
        &format!("{name}_summary"),
        &[
            "method", "shots", "members", "truth", "level", "coverage", "coverage_std", "width", "cells", "seed",
        ],
    );
    let col = |n: &str| table.column(n).expect("known column");
    let (c_method, c_shots, c_members, c_truth, c_level, c_cov, c_width, c_err) = (
        col("method"),
        col("shots"),
        col("members"),
        col("truth"),
        col("level"),
        col("coverage"),
        col("width"),
        col("error"),
    );
    let mut keys: Vec<(String, u64, u64, String, f64)> = Vec::new();
    for row in &table.rows {
        if row[c_err].as_str() != Some("") {
            continue;
        }
        let key = (
            row[c_method].to_string(),
            row[c_shots].as_f64().unwrap_or(0.0) as u64,
            row[c_members].as_f64().unwrap_or(0.0) as u64,
            row[c_truth].to_string(),
            row[c_level].as_f64().unwrap_or(f64::NAN),
        );
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    let mut points: Vec<(String, f64, f64)> = Vec::new();
    for key in &keys {
        let matching: Vec<&Vec<Cell>> = table
            .rows
            .iter()
            .filter(|r| {
                r[c_err].as_str() == Some("")
                    && r[c_method].to_string() == key.0
                    && r[c_shots].as_f64() == Some(key.1 as f64)
                    && r[c_members].as_f64() == Some(key.2 as f64)
                    && r[c_truth].to_string() == key.3
                    && r[c_level].as_f64() == Some(key.4)
            })
            .collect();
        let covs: Vec<f64> = matching.iter().filter_map(|r| r[c_cov].as_f64()).collect();
        let widths: Vec<f64> = matching.iter().filter_map(|r| r[c_width].as_f64()).collect();
        summary.push(vec![
            key.0.as_str().into(),
            key.1.into(),
            key.2.into(),
            key.3.as_str().into(),
            key.4.into(),
            mean(&covs).into(),
            std_dev(&covs).into(),
            mean(&widths).into(),
            matching.len().into(),
            config.seed.into(),
        ]);
        if key.3 == "observed" {
            let label = match key.0.as_str() {
                "quantum" => format!("quantum N={}", key.1),
                "ensemble" => format!("ensemble M={}", key.2),
                other => other.to_string(),
            };
            points.push((format!("{label} @{}", key.4), mean(&widths), mean(&covs)));
        }
    }
    let mut fig = Figure::new(
        if name == "intervals" { "Coverage vs sharpness" } else { "Interval coverage" },
        "mean interval width",
        "empirical coverage",
    );
    for (label, w, c) in points {
        fig.series.push(Series::scatter(&label, vec![(w, c)]));
    }
    summary.figure = Some(fig);
    Ok(vec![table, summary])
}

// -------------------------------------------------------------- calibration

struct VariantEval {
    shots: u64,
    ece: Vec<f64>,
    /// Mean empirical coverage at each default level over repetitions.
    reliability: Vec<f64>,
    coverage_90: Vec<f64>,
    coverage_95: Vec<f64>,
    width_90: Vec<f64>,
    width_95: Vec<f64>,
}

struct PairEval {
    /// `(variant, λ, rmse, per-N evaluation)`
    variants: Vec<(&'static str, f64, f64, Vec<VariantEval>)>,
}

/// Train constrained and unconstrained circuits from shared
/// initialisations on the task's initial/boundary samples (plus `n_train`
/// noisy interior observations) and score their shot intervals against
/// held-out interior values of the solution.
fn evaluate_pair(config: &ExperimentConfig, task: &PdeTask, seed: u64) -> Result<PairEval> {
    let n = config.n_qubits[0];
    let data = comparison_data(config, task, seed);
    let inits = initial_circuits(config, n, seed)?;
    let levels = uq::default_levels();
    let mut variants = Vec::new();
    for (vi, (variant, lambda)) in [("constrained", config.lambda_physics), ("unconstrained", 0.0)]
        .into_iter()
        .enumerate()
    {
        let model = train_circuit(config, task, &inits, lambda, &data.train)?;
        let inputs: Vec<[f64; 2]> = data.test.iter().map(|p| task.domain().normalize(p.x, p.t)).collect();
        let z = inputs
            .iter()
            .map(|x| model.qubit_expectations(x))
            .collect::<Result<Vec<_>>>()?;
        let exact = inputs
            .iter()
            .map(|x| model.predict_exact(x))
            .collect::<Result<Vec<_>>>()?;
        let err = rmse(&exact, &data.test.iter().map(|p| p.u).collect::<Vec<_>>());
        let mut per_n = Vec::new();
        for &shots in &config.shots {
            let mut ev = VariantEval {
                shots,
                ece: Vec::new(),
                reliability: vec![0.0; levels.len()],
                coverage_90: Vec::new(),
                coverage_95: Vec::new(),
                width_90: Vec::new(),
                width_95: Vec::new(),
            };
            for rep in 0..config.repetitions {
                let mut r = rng::stream(seed, &[SHOTS, vi as u64, shots, rep as u64]);
                let sources = shot_sources(&model, &shot_estimates(&z, shots, &mut r)?, shots);
                let truths = &data.truths[rep];
                let report = uq::calibration_report(&sources, truths, &levels)?;
                ev.ece.push(report.ece);
                for (acc, e) in ev.reliability.iter_mut().zip(&report.empirical) {
                    *acc += e / config.repetitions as f64;
                }
                let (c, w) = coverage_and_width(&sources, truths, 0.90)?;
                ev.coverage_90.push(c);
                ev.width_90.push(w);
                let (c, w) = coverage_and_width(&sources, truths, 0.95)?;
                ev.coverage_95.push(c);
                ev.width_95.push(w);
            }
            per_n.push(ev);
        }
        variants.push((variant, lambda, err, per_n));
    }
    Ok(PairEval { variants })
}

fn evaluate_pairs(config: &ExperimentConfig) -> (PdeTask, Vec<Result<PairEval>>) {
    let task = PdeTask::standard(config.task);
    let results = (0..config.seeds)
        .into_par_iter()
        .map(|s| evaluate_pair(config, &task, seed_for(config, s)))
        .collect();
    (task, results)
}

fn run_calibration(config: &ExperimentConfig) -> Result<Vec<ResultTable>> {
    let (_, results) = evaluate_pairs(config);
    let mut table = ResultTable::new(
        "calibration",
        &["variant", "lambda", "shots", "ece", "ece_std", "rmse", "seed_index", "seed", "error"],
    );
    let levels = uq::default_levels();
    // (variant, shots) -> summed reliability and count
    let mut reliability: Vec<(&'static str, u64, Vec<f64>, usize)> = Vec::new();
    let mut ece_curve: Vec<(&'static str, u64, Vec<f64>)> = Vec::new();
    for (s, res) in results.iter().enumerate() {
        let seed = seed_for(config, s);
        match res {
            Ok(pair) => {
                for (variant, lambda, err, per_n) in &pair.variants {
                    for ev in per_n {
                        table.push(vec![
                            (*variant).into(),
                            (*lambda).into(),
                            ev.shots.into(),
                            mean(&ev.ece).into(),
                            std_dev(&ev.ece).into(),
                            (*err).into(),
                            s.into(),
                            seed.into(),
                            "".into(),
                        ]);
                        match reliability.iter_mut().find(|r| r.0 == *variant && r.1 == ev.shots) {
                            Some(r) => {
                                r.2.iter_mut().zip(&ev.reliability).for_each(|(a, b)| *a += b);
                                r.3 += 1;
                            }
                            None => reliability.push((variant, ev.shots, ev.reliability.clone(), 1)),
                        }
                        match ece_curve.iter_mut().find(|r| r.0 == *variant && r.1 == ev.shots) {
                            Some(r) => r.2.push(mean(&ev.ece)),
                            None => ece_curve.push((variant, ev.shots, vec![mean(&ev.ece)])),
                        }
                    }
                }
            }
            Err(e) => table.push(vec![
                "".into(),
                f64::NAN.into(),
                0u64.into(),
                f64::NAN.into(),
                f64::NAN.into(),
                f64::NAN.into(),
                s.into(),
                seed.into(),
                format!("{}: {e}", e.kind()).into(),
            ]),
        }
    }
    let mut fig = Figure::new("Calibration error vs shots", "shots N", "ECE").log_x();
    for variant in ["constrained", "unconstrained"] {
        fig.series.push(Series::line(
            variant,
            ece_curve
                .iter()
                .filter(|r| r.0 == variant)
                .map(|r| (r.1 as f64, mean(&r.2)))
                .collect(),
        ));
    }
    table.figure = Some(fig);

    let mut rel = ResultTable::new(
        "calibration_reliability",
        &["variant", "shots", "level", "empirical", "seeds", "seed"],
    );
    let mut rel_fig = Figure::new("Reliability", "nominal level", "empirical coverage");
    rel_fig
        .series
        .push(Series::dashed("ideal", vec![(0.0, 0.0), (1.0, 1.0)]));
    for (variant, shots, sums, count) in &reliability {
        let curve: Vec<(f64, f64)> = levels
            .iter()
            .zip(sums)
            .map(|(l, s)| (*l, s / *count as f64))
            .collect();
        for (l, e) in &curve {
            rel.push(vec![
                (*variant).into(),
                (*shots).into(),
                (*l).into(),
                (*e).into(),
                (*count).into(),
                config.seed.into(),
            ]);
        }
        rel_fig
            .series
            .push(Series::line(&format!("{variant} N={shots}"), curve));
    }
    rel.figure = Some(rel_fig);
    Ok(vec![table, rel])
}

fn run_constrained(config: &ExperimentConfig) -> Result<Vec<ResultTable>> {
    let (_, results) = evaluate_pairs(config);
    let mut table = ResultTable::new(
        "constrained",
        &[
            "variant",
            "lambda",
            "shots",
            "coverage_90",
            "coverage_95",
            "width_90",
            "width_95",
            "ece",
            "rmse",
            "seed_index",
            "seed",
            "error",
        ],
    );
    for (s, res) in results.iter().enumerate() {
        let seed = seed_for(config, s);
        match res {
            Ok(pair) => {
                for (variant, lambda, err, per_n) in &pair.variants {
                    for ev in per_n {
                        table.push(vec![
                            (*variant).into(),
                            (*lambda).into(),
                            ev.shots.into(),
                            mean(&ev.coverage_90).into(),
                            mean(&ev.coverage_95).into(),
                            mean(&ev.width_90).into(),
                            mean(&ev.width_95).into(),
                            mean(&ev.ece).into(),
                            (*err).into(),
                            s.into(),
                            seed.into(),
                            "".into(),
                        ]);
                    }
                }
            }
            Err(e) => {
                let mut row: Vec<Cell> = vec!["".into(), f64::NAN.into(), 0u64.into()];
                row.extend((0..6).map(|_| Cell::Num(f64::NAN)));
                row.extend([s.into(), seed.into(), format!("{}: {e}", e.kind()).into()]);
                table.push(row);
            }
        }
    }
    let mut fig = Figure::new("Constrained vs unconstrained", "mean width (90%)", "coverage (90%)");
    for variant in ["constrained", "unconstrained"] {
        let pts = table
            .filter("variant", variant)
            .filter_map(|r| Some((r[5].as_f64()?, r[3].as_f64()?)))
            .collect();
        fig.series.push(Series::scatter(variant, pts));
    }
    table.figure = Some(fig);
    Ok(vec![table])
}

// -------------------------------------------------------------- information

fn run_info_efficiency(config: &ExperimentConfig) -> Result<Vec<ResultTable>> {
    let mut table = ResultTable::new(
        "info_efficiency",
        &["budget", "method", "n_qubits", "shots", "passes", "members", "bits", "cumulative_bits", "seed"],
    );
    let mut fig = Figure::new("UQ information per evaluation", "evaluation budget", "bits per evaluation").log_x();
    let mut series: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    for &k in &config.budgets {
        let mut rows: Vec<(String, InfoMethod, [u64; 4])> = Vec::new();
        for method in &config.methods {
            match method {
                Method::Quantum => {
                    for &n in &config.n_qubits {
                        rows.push((
                            format!("quantum n={n}"),
                            InfoMethod::Quantum {
                                n_qubits: n as u64,
                                shots: k,
                            },
                            [n as u64, k, 0, 0],
                        ));
                    }
                }
                Method::McDropout => rows.push(("mc_dropout".into(), InfoMethod::McDropout { passes: k }, [0, 0, k, 0])),
                Method::Ensemble => {
                    for &m in &config.ensemble_sizes {
                        rows.push((
                            format!("ensemble M={m}"),
                            InfoMethod::Ensemble { members: m as u64 },
                            [0, 0, 0, m as u64],
                        ));
                    }
                }
            }
        }
        for (label, method, [n, shots, passes, members]) in rows {
            let budget = InfoBudget::new(method, k)?;
            let bits = uq::info_bits(&budget);
            let name = match method {
                InfoMethod::Quantum { .. } => "quantum",
                InfoMethod::McDropout { .. } => "mc_dropout",
                InfoMethod::Ensemble { .. } => "ensemble",
            };
            table.push(vec![
                k.into(),
                name.into(),
                n.into(),
                shots.into(),
                passes.into(),
                members.into(),
                bits.into(),
                budget.cumulative_bits().into(),
                config.seed.into(),
            ]);
            match series.iter_mut().find(|s| s.0 == label) {
                Some(s) => s.1.push((k as f64, bits)),
                None => series.push((label, vec![(k as f64, bits)])),
            }
        }
    }
    for (label, pts) in series {
        fig.series.push(Series::line(&label, pts));
    }
    table.figure = Some(fig);
    Ok(vec![table])
}
