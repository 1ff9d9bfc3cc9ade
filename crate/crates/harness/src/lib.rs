//! Experiment drivers, presets and CSV output for the `lbm4` schemes.

// `!(x > 0.0)` style guards are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod datum;
pub mod entropy_demo;
pub mod error;
pub mod euler;
pub mod exact;
pub mod experiment;
pub mod output;

pub use config::{load_preset, Preset, PRESETS};
pub use entropy_demo::{run_entropy_demo, Branches, EntropyDemoReport};
pub use error::{HarnessError, Result};
pub use euler::{run_euler_riemann, EulerScheme, RiemannConfig};
pub use exact::exact_burgers;
pub use experiment::{compute_order_table, run_experiment, ConvergenceReport, ExperimentSpec};
