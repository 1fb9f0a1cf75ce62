//! Prediction intervals, coverage and sharpness, regression calibration and
//! information accounting.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// Inverse of the standard normal CDF.
///
/// Acklam's rational approximation (relative error below 1.2e-9 over the
/// open unit interval). Returns ±∞ at 0 and 1 and NaN outside `[0, 1]`.
pub fn normal_quantile(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.024_25;

    if p.is_nan() || !(0.0..=1.0).contains(&p) {
        return f64::NAN;
    }
    if p == 0.0 {
        return f64::NEG_INFINITY;
    }
    if p == 1.0 {
        return f64::INFINITY;
    }
    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    }
}

/// Two-sided critical value `z_{α/2}` for a central interval at `level = 1 − α`.
pub fn critical_value(level: f64) -> Result<f64> {
    check_level(level)?;
    Ok(normal_quantile(0.5 * (1.0 + level)))
}

fn check_level(level: f64) -> Result<()> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::arg(format!("confidence level {level} outside (0, 1)")));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PredictionInterval {
    pub center: f64,
    pub half_width: f64,
    pub level: f64,
}

impl PredictionInterval {
    pub fn new(center: f64, half_width: f64, level: f64) -> Result<Self> {
        check_level(level)?;
        if !(half_width >= 0.0) {
            return Err(Error::arg(format!("negative half-width {half_width}")));
        }
        Ok(Self {
            center,
            half_width,
            level,
        })
    }

    pub fn contains(&self, y: f64) -> bool {
        (y - self.center).abs() <= self.half_width
    }

    pub fn width(&self) -> f64 {
        2.0 * self.half_width
    }

    pub fn lower(&self) -> f64 {
        self.center - self.half_width
    }

    pub fn upper(&self) -> f64 {
        self.center + self.half_width
    }
}

/// Shot-noise interval `Ô ± z_{α/2} √((1 − Ô²)/N)`.
pub fn quantum_interval(o_hat: f64, n_shots: u64, level: f64) -> Result<PredictionInterval> {
    let variance = crate::qsim::born_variance(o_hat, n_shots)?;
    let z = critical_value(level)?;
    PredictionInterval::new(o_hat, z * variance.sqrt(), level)
}

/// Gaussian interval `μ ± z_{α/2} σ`.
pub fn gaussian_interval(mean: f64, variance: f64, level: f64) -> Result<PredictionInterval> {
    if !(variance >= 0.0) {
        return Err(Error::arg(format!("variance {variance} must be non-negative")));
    }
    let z = critical_value(level)?;
    PredictionInterval::new(mean, z * variance.sqrt(), level)
}

/// Fraction of `truths` inside their interval.
pub fn coverage(intervals: &[PredictionInterval], truths: &[f64]) -> Result<f64> {
    if intervals.len() != truths.len() {
        return Err(Error::arg(format!(
            "{} intervals for {} truths",
            intervals.len(),
            truths.len()
        )));
    }
    if intervals.is_empty() {
        return Err(Error::arg("coverage of an empty set"));
    }
    let hits = intervals
        .iter()
        .zip(truths)
        .filter(|(iv, &y)| iv.contains(y))
        .count();
    Ok(hits as f64 / truths.len() as f64)
}

/// Mean full width `2·half_width`.
pub fn mean_width(intervals: &[PredictionInterval]) -> Result<f64> {
    if intervals.is_empty() {
        return Err(Error::arg("mean width of an empty set"));
    }
    Ok(intervals.iter().map(PredictionInterval::width).sum::<f64>() / intervals.len() as f64)
}

/// Where a predictive interval comes from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PredictiveSource {
    /// Gaussian predictive with the given mean and variance.
    Gaussian { mean: f64, variance: f64 },
    /// `N`-shot Pauli estimate `o_hat`, reported in target units as
    /// `offset + scale · o_hat`.
    Shots {
        o_hat: f64,
        n_shots: u64,
        scale: f64,
        offset: f64,
    },
}

impl PredictiveSource {
    pub fn shots(o_hat: f64, n_shots: u64) -> Self {
        PredictiveSource::Shots {
            o_hat,
            n_shots,
            scale: 1.0,
            offset: 0.0,
        }
    }

    pub fn interval(&self, level: f64) -> Result<PredictionInterval> {
        match *self {
            PredictiveSource::Gaussian { mean, variance } => gaussian_interval(mean, variance, level),
            PredictiveSource::Shots {
                o_hat,
                n_shots,
                scale,
                offset,
            } => {
                let iv = quantum_interval(o_hat, n_shots, level)?;
                PredictionInterval::new(offset + scale * iv.center, scale.abs() * iv.half_width, level)
            }
        }
    }
}

/// Symmetric central levels `0.05, 0.10, …, 0.95`.
pub fn default_levels() -> Vec<f64> {
    (1..=19).map(|k| k as f64 * 0.05).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct CalibrationReport {
    pub levels: Vec<f64>,
    pub empirical: Vec<f64>,
    pub counts: Vec<usize>,
    pub ece: f64,
}

impl CalibrationReport {
    /// `Σ_b (n_b / Σn) · |empirical_b − level_b|` over the report's own fields.
    pub fn recompute_ece(&self) -> f64 {
        weighted_gap(&self.levels, &self.empirical, &self.counts)
    }

    /// CSV with header `level,empirical,count,ece`, one row per level.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["level", "empirical", "count", "ece"])?;
        for ((level, emp), count) in self.levels.iter().zip(&self.empirical).zip(&self.counts) {
            w.write_record([
                format!("{level:?}"),
                format!("{emp:?}"),
                count.to_string(),
                format!("{:?}", self.ece),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<csv writer>", e))?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(file)
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        let (mut levels, mut empirical, mut counts) = (Vec::new(), Vec::new(), Vec::new());
        let mut ece = 0.0;
        for (i, row) in reader.records().enumerate() {
            let row = row?;
            let field = |k: usize| -> Result<&str> {
                row.get(k).ok_or_else(|| Error::Parse {
                    line: i + 2,
                    message: format!("missing column {k}"),
                })
            };
            let num = |s: &str| -> Result<f64> {
                s.parse().map_err(|_| Error::Parse {
                    line: i + 2,
                    message: format!("bad number {s:?}"),
                })
            };
            levels.push(num(field(0)?)?);
            empirical.push(num(field(1)?)?);
            counts.push(field(2)?.parse().map_err(|_| Error::Parse {
                line: i + 2,
                message: "bad count".into(),
            })?);
            ece = num(field(3)?)?;
        }
        Ok(Self {
            levels,
            empirical,
            counts,
            ece,
        })
    }
}

fn weighted_gap(levels: &[f64], empirical: &[f64], counts: &[usize]) -> f64 {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    levels
        .iter()
        .zip(empirical)
        .zip(counts)
        .map(|((q, e), &n)| n as f64 / total as f64 * (e - q).abs())
        .sum()
}

/// Coverage at each nominal level and the resulting ECE.
///
/// Every level is evaluated on all points, so the bins carry equal weight.
pub fn calibration_report(
    predictive: &[PredictiveSource],
    truths: &[f64],
    levels: &[f64],
) -> Result<CalibrationReport> {
    if predictive.is_empty() {
        return Err(Error::arg("calibration needs at least one prediction"));
    }
    if predictive.len() != truths.len() {
        return Err(Error::arg(format!(
            "{} predictions for {} truths",
            predictive.len(),
            truths.len()
        )));
    }
    if levels.is_empty() {
        return Err(Error::arg("no calibration levels"));
    }
    for level in levels {
        check_level(*level)?;
    }
    if levels.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::arg("calibration levels must be strictly increasing"));
    }
    let mut empirical = Vec::with_capacity(levels.len());
    for &level in levels {
        let intervals = predictive
            .iter()
            .map(|p| p.interval(level))
            .collect::<Result<Vec<_>>>()?;
        empirical.push(coverage(&intervals, truths)?);
    }
    let counts = vec![truths.len(); levels.len()];
    let ece = weighted_gap(levels, &empirical, &counts);
    Ok(CalibrationReport {
        levels: levels.to_vec(),
        empirical,
        counts,
        ece,
    })
}

/// `(nominal, empirical)` pairs for a reliability diagram.
pub fn reliability_curve(report: &CalibrationReport) -> Vec<(f64, f64)> {
    report
        .levels
        .iter()
        .copied()
        .zip(report.empirical.iter().copied())
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InfoMethod {
    Quantum { n_qubits: u64, shots: u64 },
    McDropout { passes: u64 },
    Ensemble { members: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InfoBudget {
    pub method: InfoMethod,
    pub evaluations: u64,
}

impl InfoBudget {
    pub fn new(method: InfoMethod, evaluations: u64) -> Result<Self> {
        let counts_positive = match method {
            InfoMethod::Quantum { n_qubits, shots } => n_qubits > 0 && shots > 0,
            InfoMethod::McDropout { passes } => passes > 0,
            InfoMethod::Ensemble { members } => members > 0,
        };
        if !counts_positive || evaluations == 0 {
            return Err(Error::arg(format!("non-positive count in {method:?} x {evaluations}")));
        }
        Ok(Self {
            method,
            evaluations,
        })
    }

    /// Bits per evaluation times the number of evaluations.
    pub fn cumulative_bits(&self) -> f64 {
        info_bits(self) * self.evaluations as f64
    }
}

/// Bits of UQ information per evaluation: `n·log₂(N+1)` for shots,
/// `log₂ T` for MC Dropout, `log₂ M` for an ensemble.
pub fn info_bits(budget: &InfoBudget) -> f64 {
    match budget.method {
        InfoMethod::Quantum { n_qubits, shots } => n_qubits as f64 * (shots as f64 + 1.0).log2(),
        InfoMethod::McDropout { passes } => (passes as f64).log2(),
        InfoMethod::Ensemble { members } => (members as f64).log2(),
    }
}
