//! Sweeps, fits, plots and validation runs on top of `gqd-core`.

pub mod cache;
pub mod config;
pub mod fit;
pub mod plot;
pub mod sweep;
pub mod validate;

pub use config::{Model, SweepConfig};
pub use fit::{fit_linear_growth, LinearFit};
pub use sweep::{run_sweep, Row, RunManifest, SweepOutput};
