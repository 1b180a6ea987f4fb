//! Reproduction harness: test phase, non-stationary schedules, noise and
//! figure data.

pub mod figures;
pub mod noise;
pub mod output;
pub mod schedule;
pub mod stats;
pub mod test_phase;

pub use figures::{moving_average, reproduce_figure, FigureId, ReproduceOptions};
pub use noise::{inject_noise, NoiseSpec};
pub use schedule::{schedule_params, Breakpoint, Overrides, Schedule};
pub use stats::{summarize, PolicySummary, SummaryStats};
pub use test_phase::{evaluate_runs, run_test_phase, PolicySpec};
