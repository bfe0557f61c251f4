//! The four drivers behind one contract: same configuration in, same session
//! counts out, each built on a different synchronization family.

pub(crate) mod channels;
pub(crate) mod guards;
pub(crate) mod monitor;
pub(crate) mod semaphores;

use std::time::Duration;

use santa_runtime::InstrumentSnapshot;

use crate::config::{BackendId, ConfigError, ScenarioConfig};
use crate::stats::RunStats;
use crate::trace::TraceEvent;

/// Everything one run produced. `events` is empty unless recording was
/// requested; `instrument` carries the runtime's counters and exists only
/// for the guards backend.
#[derive(Debug)]
pub struct ScenarioRun {
    pub stats: RunStats,
    pub events: Vec<TraceEvent>,
    pub instrument: Option<InstrumentSnapshot>,
}

pub fn run_backend(
    backend: BackendId,
    cfg: &ScenarioConfig,
    record: bool,
) -> Result<ScenarioRun, ConfigError> {
    cfg.validate()?;
    Ok(match backend {
        BackendId::Guards => guards::run(cfg, record),
        BackendId::Semaphores => semaphores::run(cfg, record),
        BackendId::Channels => channels::run(cfg, record),
        BackendId::Monitor => monitor::run(cfg, record),
    })
}

pub fn run_guards(cfg: &ScenarioConfig, record: bool) -> Result<ScenarioRun, ConfigError> {
    run_backend(BackendId::Guards, cfg, record)
}

pub fn run_semaphores(cfg: &ScenarioConfig, record: bool) -> Result<ScenarioRun, ConfigError> {
    run_backend(BackendId::Semaphores, cfg, record)
}

pub fn run_channels(cfg: &ScenarioConfig, record: bool) -> Result<ScenarioRun, ConfigError> {
    run_backend(BackendId::Channels, cfg, record)
}

pub fn run_monitor(cfg: &ScenarioConfig, record: bool) -> Result<ScenarioRun, ConfigError> {
    run_backend(BackendId::Monitor, cfg, record)
}

/// Per-actor cycle allowance; `None` never runs out.
pub(crate) struct Budget(Option<u64>);

impl Budget {
    pub(crate) fn new(cycles: Option<u64>) -> Self {
        Budget(cycles)
    }

    /// Claims one more cycle, returning false once exhausted.
    pub(crate) fn next(&mut self) -> bool {
        match &mut self.0 {
            None => true,
            Some(0) => false,
            Some(n) => {
                *n -= 1;
                true
            }
        }
    }
}

/// How often stall watchdogs sample the hub's progress stamp.
pub(crate) const WATCHDOG_POLL: Duration = Duration::from_millis(50);
/// Consecutive unchanged samples before a run is declared wedged. The hand
/// backends move the hub every few microseconds when healthy, so a second
/// and a half of silence means nobody can advance.
pub(crate) const WATCHDOG_STILL_LIMIT: u32 = 30;
