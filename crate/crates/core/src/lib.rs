//! Shot-noise uncertainty for variational-circuit PDE surrogates: a dense
//! statevector simulator, interval and calibration metrics, classical
//! baselines and a reproducible experiment harness.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod error;
pub mod harness;
pub mod kv;
pub mod physics;
pub mod qsim;
pub mod rng;
pub mod uq;
pub mod vqc;

pub use error::{Error, Result};
