//! Dense statevector simulation with exact Pauli-Z expectations and
//! finite-shot Born-rule sampling.
//!
//! Conventions: `RY(θ) = exp(−iθY/2)`, `RZ(θ) = exp(−iθZ/2)`, and qubit 0 is
//! the least-significant bit of the basis index.

use std::fmt;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};

pub const MAX_QUBITS: usize = 12;
const NORM_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// `|0…0⟩` on `n_qubits` qubits.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        check_qubit_count(n_qubits)?;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    /// Build from explicit amplitudes; the vector must have length `2^n` and unit norm.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::structural(format!(
                "amplitude count {len} is not 2^n for n >= 1"
            )));
        }
        let n_qubits = len.trailing_zeros() as usize;
        check_qubit_count(n_qubits)?;
        let state = Self {
            n_qubits,
            amplitudes,
        };
        let norm = state.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::structural(format!("state norm² is {norm}, expected 1")));
        }
        Ok(state)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// Raw amplitude access for linear-algebra kernels; callers are
    /// responsible for any normalisation they rely on.
    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Probability of each computational basis state.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    fn check_index(&self, qubit: usize) -> Result<()> {
        if qubit >= self.n_qubits {
            return Err(Error::structural(format!(
                "qubit {qubit} out of range for {}-qubit state",
                self.n_qubits
            )));
        }
        Ok(())
    }

    /// Apply `gate` in place.
    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        match *gate {
            Gate::Ry { target, angle } => {
                self.check_index(target)?;
                let (s, c) = (0.5 * angle).sin_cos();
                self.for_each_pair(target, |a0, a1| {
                    let (x0, x1) = (*a0, *a1);
                    *a0 = x0 * c - x1 * s;
                    *a1 = x0 * s + x1 * c;
                });
            }
            Gate::Rz { target, angle } => {
                self.check_index(target)?;
                let (s, c) = (0.5 * angle).sin_cos();
                let lower = Complex64::new(c, -s);
                let upper = Complex64::new(c, s);
                self.for_each_pair(target, |a0, a1| {
                    *a0 *= lower;
                    *a1 *= upper;
                });
            }
            Gate::Cnot { control, target } => {
                self.check_index(control)?;
                self.check_index(target)?;
                if control == target {
                    return Err(Error::structural(format!(
                        "CNOT control and target are both qubit {target}"
                    )));
                }
                let cmask = 1usize << control;
                let tmask = 1usize << target;
                for i in 0..self.amplitudes.len() {
                    if i & cmask != 0 && i & tmask == 0 {
                        self.amplitudes.swap(i, i | tmask);
                    }
                }
            }
        }
        Ok(())
    }

    /// Apply every gate in order.
    pub fn apply_all<'a>(&mut self, gates: impl IntoIterator<Item = &'a Gate>) -> Result<()> {
        for gate in gates {
            self.apply(gate)?;
        }
        Ok(())
    }

    /// Visit every amplitude pair `(b, b | 1<<target)` with bit `target` of `b` clear.
    fn for_each_pair(&mut self, target: usize, mut f: impl FnMut(&mut Complex64, &mut Complex64)) {
        let stride = 1usize << target;
        for block in self.amplitudes.chunks_exact_mut(stride << 1) {
            let (lo, hi) = block.split_at_mut(stride);
            for (a0, a1) in lo.iter_mut().zip(hi.iter_mut()) {
                f(a0, a1);
            }
        }
    }

    /// `⟨Z_qubit⟩`.
    pub fn expectation_z(&self, qubit: usize) -> Result<f64> {
        self.check_index(qubit)?;
        let mask = 1usize << qubit;
        let value = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(b, a)| {
                let p = a.norm_sqr();
                if b & mask == 0 {
                    p
                } else {
                    -p
                }
            })
            .sum::<f64>();
        Ok(value.clamp(-1.0, 1.0))
    }

    /// `⟨Z_i⟩` for every qubit in a single sweep.
    pub fn expectation_z_all(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n_qubits];
        for (b, a) in self.amplitudes.iter().enumerate() {
            let p = a.norm_sqr();
            for (q, e) in out.iter_mut().enumerate() {
                if b >> q & 1 == 0 {
                    *e += p;
                } else {
                    *e -= p;
                }
            }
        }
        for e in &mut out {
            *e = e.clamp(-1.0, 1.0);
        }
        out
    }
}

fn check_qubit_count(n: usize) -> Result<()> {
    if n == 0 || n > MAX_QUBITS {
        return Err(Error::structural(format!(
            "qubit count {n} outside 1..={MAX_QUBITS}"
        )));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GateKind {
    Ry,
    Rz,
    Cnot,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Gate {
    Ry { target: usize, angle: f64 },
    Rz { target: usize, angle: f64 },
    Cnot { control: usize, target: usize },
}

impl Gate {
    pub fn kind(&self) -> GateKind {
        match self {
            Gate::Ry { .. } => GateKind::Ry,
            Gate::Rz { .. } => GateKind::Rz,
            Gate::Cnot { .. } => GateKind::Cnot,
        }
    }

    pub fn target(&self) -> usize {
        match *self {
            Gate::Ry { target, .. } | Gate::Rz { target, .. } | Gate::Cnot { target, .. } => target,
        }
    }

    pub fn control(&self) -> Option<usize> {
        match *self {
            Gate::Cnot { control, .. } => Some(control),
            _ => None,
        }
    }

    pub fn angle(&self) -> Option<f64> {
        match *self {
            Gate::Ry { angle, .. } | Gate::Rz { angle, .. } => Some(angle),
            Gate::Cnot { .. } => None,
        }
    }

    /// Same gate with the rotation angle replaced. No-op for CNOT.
    pub fn with_angle(self, angle: f64) -> Gate {
        match self {
            Gate::Ry { target, .. } => Gate::Ry { target, angle },
            Gate::Rz { target, .. } => Gate::Rz { target, angle },
            g @ Gate::Cnot { .. } => g,
        }
    }

    /// `U†`: rotations by the negated angle; CNOT is self-inverse.
    pub fn inverse(self) -> Gate {
        match self {
            Gate::Ry { target, angle } => Gate::Ry { target, angle: -angle },
            Gate::Rz { target, angle } => Gate::Rz { target, angle: -angle },
            g @ Gate::Cnot { .. } => g,
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Gate::Ry { target, angle } => write!(f, "RY({angle}) q{target}"),
            Gate::Rz { target, angle } => write!(f, "RZ({angle}) q{target}"),
            Gate::Cnot { control, target } => write!(f, "CNOT q{control}->q{target}"),
        }
    }
}

/// Tally of ±1 outcomes from `n_shots` Pauli-Z measurements of one qubit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ShotRecord {
    n_shots: u64,
    count_plus: u64,
    count_minus: u64,
    qubit: usize,
}

impl ShotRecord {
    pub fn new(count_plus: u64, count_minus: u64, qubit: usize) -> Result<Self> {
        let n_shots = count_plus
            .checked_add(count_minus)
            .ok_or_else(|| Error::arg("shot count overflow"))?;
        if n_shots == 0 {
            return Err(Error::arg("a shot record needs at least one shot"));
        }
        Ok(Self {
            n_shots,
            count_plus,
            count_minus,
            qubit,
        })
    }

    pub fn n_shots(&self) -> u64 {
        self.n_shots
    }

    pub fn count_plus(&self) -> u64 {
        self.count_plus
    }

    pub fn count_minus(&self) -> u64 {
        self.count_minus
    }

    pub fn qubit(&self) -> usize {
        self.qubit
    }

    /// Empirical mean `(n₊ − n₋)/N`.
    pub fn mean(&self) -> f64 {
        shot_mean(self)
    }
}

/// Consuming form of [`StateVector::apply`].
pub fn apply_gate(mut state: StateVector, gate: &Gate) -> Result<StateVector> {
    state.apply(gate)?;
    Ok(state)
}

pub fn expectation_z(state: &StateVector, qubit: usize) -> Result<f64> {
    state.expectation_z(qubit)
}

/// Draw `n_shots` independent ±1 outcomes from the marginal of `qubit`,
/// with `P(+1) = (1 + ⟨Z⟩)/2`.
pub fn sample_shots<R: Rng + ?Sized>(
    state: &StateVector,
    qubit: usize,
    n_shots: u64,
    rng: &mut R,
) -> Result<ShotRecord> {
    let z = state.expectation_z(qubit)?;
    sample_marginal(z, qubit, n_shots, rng)
}

/// Bernoulli shot sampling given the exact expectation of one qubit.
pub fn sample_marginal<R: Rng + ?Sized>(
    expectation: f64,
    qubit: usize,
    n_shots: u64,
    rng: &mut R,
) -> Result<ShotRecord> {
    if n_shots == 0 {
        return Err(Error::arg("n_shots must be at least 1"));
    }
    if !expectation.is_finite() || expectation.abs() > 1.0 {
        return Err(Error::arg(format!("expectation {expectation} outside [-1, 1]")));
    }
    let p_plus = (0.5 * (1.0 + expectation)).clamp(0.0, 1.0);
    let count_plus = (0..n_shots).filter(|_| rng.random_bool(p_plus)).count() as u64;
    ShotRecord::new(count_plus, n_shots - count_plus, qubit)
}

/// Born-rule variance of an `N`-shot Pauli mean: `(1 − ⟨O⟩²)/N`.
pub fn born_variance(expectation: f64, n_shots: u64) -> Result<f64> {
    if !expectation.is_finite() || expectation.abs() > 1.0 {
        return Err(Error::arg(format!("expectation {expectation} outside [-1, 1]")));
    }
    if n_shots == 0 {
        return Err(Error::arg("n_shots must be at least 1"));
    }
    Ok((1.0 - expectation * expectation) / n_shots as f64)
}

pub fn shot_mean(record: &ShotRecord) -> f64 {
    (record.count_plus as f64 - record.count_minus as f64) / record.n_shots as f64
}
