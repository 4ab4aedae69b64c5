//! Experiment harness for exact dyadic maximal transforms: seeded ensembles, verification
//! suites with replayable witnesses, small-case calibration, ratio and gap searches, a
//! floating-point fast path, and the `dyvar` command line.

pub mod calibrate;
pub mod cli;
pub mod digest;
pub mod ensemble;
pub mod error;
pub mod experiments;
pub mod fastpath;
pub mod report;
pub mod suites;

pub use error::{Error, Result};
pub use cli::run_cli;
