//! Configuration, sweeps, scaling studies, optimization and reporting for
//! the command-line front end.

pub mod config;
pub mod optimize;
pub mod report;
pub mod scaling;
pub mod sweep;

pub use config::{parse_config, ModeSelection, SweepConfig};
pub use optimize::{optimize, request_from_config, OptimizeOutcome, OptimizeRequest};
pub use report::{render_csv, render_summary, write_report};
pub use scaling::{render_scaling_csv, scaling_study, ScalingRow};
pub use sweep::{run_sweep, sweep_points, ReportRow, RowMetrics, SweepPoint};
