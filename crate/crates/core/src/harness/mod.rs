//! Config-driven experiments that emit CSV tables and SVG figures.

pub mod config;
pub mod experiments;
pub mod svg;
pub mod table;

pub use config::{Experiment, ExperimentConfig, Method};
pub use experiments::{run, run_to_dir, write_outputs, RunOutput};
pub use table::{emit_outputs, Cell, Format, ResultTable};
