//! Scenario driver over the guarded-object runtime.
//!
//! One worker keeps dispatch deterministic enough for exact-count runs: the
//! stop edge is evaluated at Santa's segment commit, and the halt it raises
//! prevents any further segment from starting, so the session counters are
//! frozen at the precise round target.

use std::sync::Arc;
use std::time::Duration;

use santa_runtime::{
    FieldPred, Fields, RunOutcome, SchedulerConfig, StopCondition, System, WakeupPolicy,
};

use crate::backends::ScenarioRun;
use crate::config::{BackendId, ScenarioConfig};
use crate::model::{build_scenario, SANTA_S, SLEEPING};
use crate::stats::RunStats;
use crate::trace::EventHub;

pub(crate) fn run(cfg: &ScenarioConfig, record: bool) -> ScenarioRun {
    let hub = Arc::new(EventHub::new(cfg, record));
    let sys = System::new();
    let objects = build_scenario(&sys, cfg, &hub).expect("scenario construction");

    let asleep: FieldPred = Arc::new(|f: &Fields| f.sym(SANTA_S) == SLEEPING);
    let report = sys
        .run(
            SchedulerConfig {
                worker_count: 1,
                wakeup_policy: WakeupPolicy::Fifo,
                deadlock_poll_interval: Duration::from_millis(25),
                sink: None,
            },
            StopCondition::FieldEdge { object: objects.santa, pred: asleep, rises: cfg.santa_rounds },
        )
        .expect("scenario run");

    let stalled = report.outcome != RunOutcome::Stopped;
    let deadlocked = report.outcome == RunOutcome::Deadlocked;
    let stats = RunStats::collect(BackendId::Guards, &hub, report.wall, stalled, deadlocked, 0);
    ScenarioRun { stats, events: hub.take_events(), instrument: Some(report.instrument) }
}
