//! The Santa Claus coordination scenario behind one behavioral contract,
//! driven by four interchangeable synchronization backends: guarded objects
//! on the in-crate runtime, counting semaphores, rendezvous channels, and a
//! single monitor.
//!
//! Configure with [`ScenarioConfig`], pick a [`BackendId`], and call
//! [`run_backend`] or one of the per-backend wrappers. Every run yields
//! [`RunStats`]; runs with recording enabled also yield the totally ordered
//! [`TraceEvent`] log that the validation tooling consumes.

mod backends;
mod config;
pub mod model;
mod stats;
mod trace;

pub use backends::{run_backend, run_channels, run_guards, run_monitor, run_semaphores, ScenarioRun};
pub use config::{BackendId, ConfigError, ScenarioConfig};
pub use stats::RunStats;
pub use trace::{Actor, EventHub, EventKind, SessionKind, Snapshot, TraceEvent};
