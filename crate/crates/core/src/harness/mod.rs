//! Experiment orchestration: width sweeps, the shatter probe, and the
//! tables and plots they produce.

pub mod config;
pub mod emit;
pub mod shatter;
pub mod sweep;

pub use config::{DatasetConfig, SweepConfig, SweepSettings, Widths};
pub use emit::{emit_bounds_table, emit_sweep_plot, TableFormat};
pub use shatter::{run_shatter, ShatterReport};
pub use sweep::{run_sweep, select_best_width, sweep_dataset, SweepReport, SweepRow};
