//! Scenario runner: loads a scenario, dispatches, prices, settles and
//! writes a text report plus CSV series.

pub mod io;
pub mod pipeline;
pub mod report;
pub mod series;

pub use io::{load_scenario, parse_scenario};
pub use pipeline::{run, Notice, RunError, RunOutput, RunRequest};
pub use report::render_report;
pub use series::{emit_series, DurationRow, Series, TimeRow};
