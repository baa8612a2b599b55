//! Experiment harness: noise sweeps, the E⁰ experiment, heatmaps and the CLI.

pub mod cli;
pub mod config;
pub mod heatmap;
pub mod sweep;

pub use cli::cli;
pub use config::{SweepConfig, FULL_EPS, FULL_T_MS};
pub use heatmap::{emit_heatmap, from_csv, to_csv, to_svg, CSV_HEADER};
pub use sweep::{
    cached_reference, discrepancy_pct, e0_experiment, estimator_options, mean_std, select_closest,
    statevector_reference, sweep, CellRun, E0Result, HeatmapCell, SweepResult,
};
