//! Flat `key = value` experiment configuration.
//!
//! ```text
//! experiment = calibration
//! seed = 7
//! seeds = 20
//! shots = 100, 500, 1000
//! task = heat
//! ```
//!
//! Every key except `experiment` is optional; unset keys take the
//! per-experiment defaults listed in [`ExperimentConfig::defaults`].

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::kv;
use crate::physics::PdeKind;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Experiment {
    VarianceScaling,
    Coverage,
    Calibration,
    Intervals,
    Constrained,
    InfoEfficiency,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::VarianceScaling,
        Experiment::Coverage,
        Experiment::Calibration,
        Experiment::Intervals,
        Experiment::Constrained,
        Experiment::InfoEfficiency,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Experiment::VarianceScaling => "variance-scaling",
            Experiment::Coverage => "coverage",
            Experiment::Calibration => "calibration",
            Experiment::Intervals => "intervals",
            Experiment::Constrained => "constrained",
            Experiment::InfoEfficiency => "info-efficiency",
        }
    }

    pub fn description(&self) -> &'static str {
        match self {
            Experiment::VarianceScaling => "empirical shot-mean variance vs N against (1 - <Z>^2)/N",
            Experiment::Coverage => "interval coverage at 90/95% for shot, MC Dropout and ensemble UQ",
            Experiment::Calibration => "ECE vs shot count for physics-constrained and unconstrained circuits",
            Experiment::Intervals => "coverage and mean width at 90% per method (sharpness tradeoff)",
            Experiment::Constrained => "coverage, width and ECE with and without the PDE residual loss",
            Experiment::InfoEfficiency => "bits of UQ information per evaluation across budgets",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::arg(format!("unknown experiment {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    Quantum,
    McDropout,
    Ensemble,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Quantum => "quantum",
            Method::McDropout => "mc_dropout",
            Method::Ensemble => "ensemble",
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quantum" => Ok(Method::Quantum),
            "mc_dropout" | "dropout" => Ok(Method::McDropout),
            "ensemble" => Ok(Method::Ensemble),
            other => Err(Error::arg(format!("unknown method {other:?}"))),
        }
    }
}

/// Circuit optimiser. `step` is the learning rate of either; `momentum`
/// only applies to the first. Adam uses β₁ = 0.9, β₂ = 0.999, ε = 1e-8.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OptimizerName {
    Momentum,
    Adam,
}

impl OptimizerName {
    pub fn name(&self) -> &'static str {
        match self {
            OptimizerName::Momentum => "momentum",
            OptimizerName::Adam => "adam",
        }
    }
}

impl FromStr for OptimizerName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "momentum" => Ok(OptimizerName::Momentum),
            "adam" => Ok(OptimizerName::Adam),
            other => Err(Error::arg(format!("unknown optimizer {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    /// Base seed; every stream of the run is derived from it.
    pub seed: u64,
    /// Number of independent training seeds.
    pub seeds: usize,
    pub repetitions: usize,
    pub n_qubits: Vec<usize>,
    pub n_layers: usize,
    pub shots: Vec<u64>,
    pub levels: Vec<f64>,
    pub task: PdeKind,
    pub methods: Vec<Method>,
    pub out_dir: PathBuf,

    // circuit training
    pub optimizer: OptimizerName,
    /// Independent initialisations per circuit; the lowest final training
    /// loss wins.
    pub restarts: usize,
    pub epochs: usize,
    pub step: f64,
    pub momentum: f64,
    pub lambda_physics: f64,
    pub data_weight: f64,

    // data
    pub noise_std: f64,
    pub n_train: usize,
    pub n_test: usize,

    // classical baselines
    pub dropout_rate: f64,
    pub passes: usize,
    pub ensemble_sizes: Vec<usize>,
    pub hidden: Vec<usize>,
    pub net_epochs: usize,
    pub net_step: f64,

    // variance scaling
    pub expectations: Vec<f64>,

    // information efficiency
    pub budgets: Vec<u64>,
}

impl ExperimentConfig {
    /// Defaults for `experiment`.
    pub fn defaults(experiment: Experiment) -> Self {
        let mut c = Self {
            experiment,
            seed: 1,
            seeds: 3,
            repetitions: 100,
            n_qubits: vec![4],
            n_layers: 3,
            shots: vec![1000],
            levels: vec![0.90, 0.95],
            task: PdeKind::Heat,
            methods: vec![Method::Quantum, Method::McDropout, Method::Ensemble],
            out_dir: PathBuf::from("qmuq-out"),
            optimizer: OptimizerName::Adam,
            restarts: 1,
            epochs: 600,
            step: 0.05,
            momentum: 0.9,
            lambda_physics: 1.0,
            data_weight: 1.0,
            noise_std: 0.02,
            n_train: 64,
            n_test: 64,
            dropout_rate: 0.1,
            passes: 100,
            ensemble_sizes: vec![5, 10],
            hidden: vec![64, 64],
            net_epochs: 1000,
            net_step: 0.003,
            expectations: vec![0.3, 0.6, 0.9],
            budgets: vec![10, 100, 1000],
        };
        match experiment {
            Experiment::VarianceScaling => {
                c.shots = vec![10, 100, 1000, 10_000];
            }
            Experiment::Coverage => {
                c.n_qubits = (4..=8).collect();
                c.shots = vec![1000, 5000, 10_000];
            }
            Experiment::Intervals => {
                c.shots = vec![1000, 5000, 10_000];
                c.levels = vec![0.90];
            }
            Experiment::Calibration => {
                c.shots = vec![100, 500, 1000, 5000, 10_000];
                c.noise_std = 0.0;
                c.n_train = 0;
                c.repetitions = 20;
                c.seeds = 20;
                c.restarts = 4;
            }
            Experiment::Constrained => {
                c.shots = vec![1000];
                c.noise_std = 0.0;
                c.n_train = 0;
                c.repetitions = 20;
                c.seeds = 20;
                c.restarts = 4;
            }
            Experiment::InfoEfficiency => {
                c.n_qubits = vec![1];
                c.ensemble_sizes = vec![5, 10];
            }
        }
        c
    }

    pub fn parse(text: &str) -> Result<Self> {
        let entries = kv::parse(text)?;
        let experiment: Experiment = kv::require(&entries, "experiment")?.value.parse()?;
        let mut c = Self::defaults(experiment);
        for e in &entries {
            match e.key.as_str() {
                "experiment" => {}
                "seed" => c.seed = e.parse_as()?,
                "seeds" => c.seeds = e.parse_as()?,
                "repetitions" => c.repetitions = e.parse_as()?,
                "n_qubits" => c.n_qubits = parse_usize_range(e)?,
                "n_layers" => c.n_layers = e.parse_as()?,
                "shots" => c.shots = e.parse_list()?,
                "levels" => c.levels = e.parse_list()?,
                "task" => c.task = e.value.parse()?,
                "methods" => c.methods = e.parse_list()?,
                "out_dir" => c.out_dir = PathBuf::from(&e.value),
                "optimizer" => c.optimizer = e.value.parse()?,
                "restarts" => c.restarts = e.parse_as()?,
                "epochs" => c.epochs = e.parse_as()?,
                "step" => c.step = e.parse_as()?,
                "momentum" => c.momentum = e.parse_as()?,
                "lambda_physics" => c.lambda_physics = e.parse_as()?,
                "data_weight" => c.data_weight = e.parse_as()?,
                "noise_std" => c.noise_std = e.parse_as()?,
                "n_train" => c.n_train = e.parse_as()?,
                "n_test" => c.n_test = e.parse_as()?,
                "dropout_rate" => c.dropout_rate = e.parse_as()?,
                "passes" => c.passes = e.parse_as()?,
                "ensemble_sizes" => c.ensemble_sizes = e.parse_list()?,
                "hidden" => c.hidden = e.parse_list()?,
                "net_epochs" => c.net_epochs = e.parse_as()?,
                "net_step" => c.net_step = e.parse_as()?,
                "expectations" => c.expectations = e.parse_list()?,
                "budgets" => c.budgets = e.parse_list()?,
                other => {
                    return Err(Error::Parse {
                        line: e.line,
                        message: format!("unknown key {other:?}"),
                    })
                }
            }
        }
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::arg(m));
        if self.repetitions < 1 {
            return fail("repetitions must be >= 1".into());
        }
        if self.seeds < 1 {
            return fail("seeds must be >= 1".into());
        }
        if self.shots.is_empty() || self.shots.contains(&0) {
            return fail(format!("shot counts must be non-empty and >= 1: {:?}", self.shots));
        }
        if self.n_qubits.is_empty() || self.n_qubits.iter().any(|&n| n == 0 || n > crate::qsim::MAX_QUBITS) {
            return fail(format!("qubit counts out of range: {:?}", self.n_qubits));
        }
        if self.restarts == 0 {
            return fail("restarts must be >= 1".into());
        }
        if self.n_layers == 0 {
            return fail("n_layers must be >= 1".into());
        }
        if self.levels.is_empty() || self.levels.iter().any(|l| !(*l > 0.0 && *l < 1.0)) {
            return fail(format!("levels must lie in (0, 1): {:?}", self.levels));
        }
        if self.expectations.iter().any(|z| !(z.abs() <= 1.0)) {
            return fail(format!("expectations must lie in [-1, 1]: {:?}", self.expectations));
        }
        if !(self.lambda_physics >= 0.0) || !(self.data_weight > 0.0) {
            return fail("lambda_physics must be >= 0 and data_weight > 0".into());
        }
        if !(self.noise_std >= 0.0) {
            return fail("noise_std must be >= 0".into());
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return fail("dropout_rate must lie in [0, 1)".into());
        }
        if self.passes < 2 {
            return fail("passes must be >= 2".into());
        }
        if self.ensemble_sizes.iter().any(|&m| m < 2) {
            return fail("ensemble sizes must be >= 2".into());
        }
        if self.n_test == 0 {
            return fail("n_test must be >= 1".into());
        }
        if self.budgets.contains(&0) {
            return fail("budgets must be >= 1".into());
        }
        if self.methods.is_empty() {
            return fail("no methods selected".into());
        }
        Ok(())
    }

    /// Canonical text of every setting that influences results (the output
    /// directory is excluded).
    pub fn canonical_text(&self) -> String {
        let list = |v: &[String]| v.join(",");
        let f = |v: &[f64]| list(&v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>());
        let u = |v: &[usize]| list(&v.iter().map(usize::to_string).collect::<Vec<_>>());
        let w = |v: &[u64]| list(&v.iter().map(u64::to_string).collect::<Vec<_>>());
        let m = list(&self.methods.iter().map(|m| m.name().to_string()).collect::<Vec<_>>());
        format!(
            "experiment = {}\nseed = {}\nseeds = {}\nrepetitions = {}\nn_qubits = {}\nn_layers = {}\nshots = {}\nlevels = {}\ntask = {}\nmethods = {}\noptimizer = {}\nrestarts = {}\nepochs = {}\nstep = {:?}\nmomentum = {:?}\nlambda_physics = {:?}\ndata_weight = {:?}\nnoise_std = {:?}\nn_train = {}\nn_test = {}\ndropout_rate = {:?}\npasses = {}\nensemble_sizes = {}\nhidden = {}\nnet_epochs = {}\nnet_step = {:?}\nexpectations = {}\nbudgets = {}\n",
            self.experiment,
            self.seed,
            self.seeds,
            self.repetitions,
            u(&self.n_qubits),
            self.n_layers,
            w(&self.shots),
            f(&self.levels),
            self.task.name(),
            m,
            self.optimizer.name(),
            self.restarts,
            self.epochs,
            self.step,
            self.momentum,
            self.lambda_physics,
            self.data_weight,
            self.noise_std,
            self.n_train,
            self.n_test,
            self.dropout_rate,
            self.passes,
            u(&self.ensemble_sizes),
            u(&self.hidden),
            self.net_epochs,
            self.net_step,
            f(&self.expectations),
            w(&self.budgets),
        )
    }

    /// First 16 hex digits of the SHA-256 of [`Self::canonical_text`].
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical_text().as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// `4..8` (inclusive), `4..=8`, or a plain list.
fn parse_usize_range(e: &kv::Entry) -> Result<Vec<usize>> {
    let v = e.value.replace("..=", "..");
    if let Some((lo, hi)) = v.split_once("..") {
        let bad = || Error::Parse {
            line: e.line,
            message: format!("bad range {:?}", e.value),
        };
        let lo: usize = lo.trim().parse().map_err(|_| bad())?;
        let hi: usize = hi.trim().parse().map_err(|_| bad())?;
        if hi < lo {
            return Err(bad());
        }
        return Ok((lo..=hi).collect());
    }
    e.parse_list()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_applies_defaults() {
        let c = ExperimentConfig::parse("experiment = coverage\nn_qubits = 4..6\nshots = 100, 200\nmethods = quantum ensemble\n").unwrap();
        assert_eq!(c.experiment, Experiment::Coverage);
        assert_eq!(c.n_qubits, vec![4, 5, 6]);
        assert_eq!(c.shots, vec![100, 200]);
        assert_eq!(c.methods, vec![Method::Quantum, Method::Ensemble]);
        assert_eq!(c.repetitions, 100);
        assert_eq!(c.passes, 100);
        assert_eq!(c.dropout_rate, 0.1);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(ExperimentConfig::parse("seed = 1\n").is_err());
        assert!(ExperimentConfig::parse("experiment = nope\n").is_err());
        assert!(ExperimentConfig::parse("experiment = coverage\nbogus = 1\n").is_err());
        assert!(ExperimentConfig::parse("experiment = coverage\nrepetitions = 0\n").is_err());
        assert!(ExperimentConfig::parse("experiment = coverage\nshots = 0\n").is_err());
        assert!(ExperimentConfig::parse("experiment = coverage\nlevels = 1.0\n").is_err());
    }

    #[test]
    fn hash_ignores_out_dir_only() {
        let a = ExperimentConfig::parse("experiment = calibration\nout_dir = a\n").unwrap();
        let b = ExperimentConfig::parse("experiment = calibration\nout_dir = b\n").unwrap();
        let c = ExperimentConfig::parse("experiment = calibration\nseed = 2\n").unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
        assert_eq!(ExperimentConfig::parse(&a.canonical_text()).unwrap().hash(), a.hash());
    }
}
