//! Experiment orchestration: evaluation, metrics, event logs, configuration
//! and seed fan-out.

pub mod config;
pub mod eval;
pub mod events;
pub mod metrics;
pub mod run;

pub use config::{Algorithm, ExperimentConfig};
pub use eval::{evaluate, evaluate_indexed, evaluate_with};
pub use events::{read_events, EventSink, JsonlSink, LogEvent, NullSink, Phase};
pub use metrics::{aggregate, rolling_average, standard_error, AggregateRow, MetricsRow};
pub use run::{grid_search, run, GridEntry, Manifest, RunOutput};
