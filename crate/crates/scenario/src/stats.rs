use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::config::BackendId;
use crate::trace::EventHub;

/// Counts and flags reported by every backend for one run.
///
/// `deliveries + help_sessions = santa_rounds_completed` holds by
/// construction: a round is counted exactly when its session-end event is
/// recorded. Timings are the only field allowed to differ between backends
/// on the same configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub backend: BackendId,
    pub deliveries: u64,
    pub help_sessions: u64,
    pub santa_rounds_completed: u64,
    pub wall_s: f64,
    /// The run ended without reaching its round target.
    pub stalled: bool,
    /// The run ended with suspended work that could never resume.
    pub deadlocked: bool,
    /// Completed full cycles per reindeer, by id.
    pub reindeer_pulls: Vec<u64>,
    /// Completed consultations per elf, by id.
    pub elf_consults: Vec<u64>,
    /// Wake-everyone signals issued; zero for every backend that wakes
    /// waiters individually.
    pub broadcasts: u64,
}

impl RunStats {
    pub(crate) fn collect(
        backend: BackendId,
        hub: &EventHub,
        wall: Duration,
        stalled: bool,
        deadlocked: bool,
        broadcasts: u64,
    ) -> Self {
        RunStats {
            backend,
            deliveries: hub.deliveries(),
            help_sessions: hub.help_sessions(),
            santa_rounds_completed: hub.rounds_completed(),
            wall_s: wall.as_secs_f64(),
            stalled,
            deadlocked,
            reindeer_pulls: hub.reindeer_pulls(),
            elf_consults: hub.elf_consults(),
            broadcasts,
        }
    }
}
