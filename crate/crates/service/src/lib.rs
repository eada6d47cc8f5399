//! Task assignment, log ingestion and results for the four collection
//! interfaces, served over HTTP and driven by the `attnlab` CLI.

pub mod assignment;
pub mod config;
pub mod error;
pub mod http;
pub mod results;
pub mod scenario;
pub mod store;
pub mod wire;

pub use assignment::{build_assignment, TaskAssignment, Trial, TrialParams};
pub use config::{AssignmentConfig, HeatmapConfig, ServiceConfig};
pub use error::ServiceError;
pub use results::{compute_results, compute_verdicts, Cohort, ResultsReport, ResultsSummary};
pub use scenario::{Scenario, ScenarioOutcome};
pub use store::{IngestOutcome, LogEnvelope, Store};
pub use wire::{parse_payload, validate_payload, Payload};
