use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::config::ScenarioConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Actor {
    Santa,
    Sleigh,
    Shop,
    Reindeer(u32),
    Elf(u32),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SessionKind {
    Delivery,
    Help,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EventKind {
    Back,
    Harness,
    Pull,
    Puzzled,
    Enter,
    Consult,
    WakeupDecision,
    SessionStart,
    SessionEnd,
}

/// What Santa saw at the instant he chose what to do next.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Snapshot {
    /// Reindeer-back flag.
    pub b: bool,
    pub elves_ready: bool,
}

/// One totally ordered trace record. `snapshot` accompanies every
/// `WakeupDecision`; `session` accompanies `SessionStart` and `SessionEnd`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub seq: u64,
    pub actor: Actor,
    pub kind: EventKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot: Option<Snapshot>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub session: Option<SessionKind>,
}

/// Shared collection point for everything a run produces.
///
/// Counters are always live so statistics cost nothing when tracing is off;
/// the event log exists only when recording was requested. Sequence numbers
/// are assigned under the log's lock, so they are strictly increasing in the
/// order appends won that lock.
pub struct EventHub {
    deliveries: AtomicU64,
    help_sessions: AtomicU64,
    reindeer_pulls: Vec<AtomicU64>,
    elf_consults: Vec<AtomicU64>,
    /// Bumped on every emission, recorded or not. Stagnation watchdogs poll it.
    progress: AtomicU64,
    log: Option<Mutex<Vec<TraceEvent>>>,
}

impl EventHub {
    pub fn new(cfg: &ScenarioConfig, record: bool) -> Self {
        EventHub {
            deliveries: AtomicU64::new(0),
            help_sessions: AtomicU64::new(0),
            reindeer_pulls: (0..cfg.reindeer_count).map(|_| AtomicU64::new(0)).collect(),
            elf_consults: (0..cfg.elf_count).map(|_| AtomicU64::new(0)).collect(),
            progress: AtomicU64::new(0),
            log: record.then(|| Mutex::new(Vec::new())),
        }
    }

    fn push(&self, actor: Actor, kind: EventKind, snapshot: Option<Snapshot>, session: Option<SessionKind>) {
        self.progress.fetch_add(1, Ordering::Relaxed);
        if let Some(log) = &self.log {
            let mut log = log.lock().unwrap();
            let seq = log.len() as u64;
            log.push(TraceEvent { seq, actor, kind, snapshot, session });
        }
    }

    /// A completed phase step: Back/Harness/Pull from a reindeer,
    /// Puzzled/Enter/Consult from an elf.
    pub fn phase(&self, actor: Actor, kind: EventKind) {
        match (actor, kind) {
            (Actor::Reindeer(i), EventKind::Pull) => {
                self.reindeer_pulls[i as usize].fetch_add(1, Ordering::Relaxed);
            }
            (Actor::Elf(j), EventKind::Consult) => {
                self.elf_consults[j as usize].fetch_add(1, Ordering::Relaxed);
            }
            _ => {}
        }
        self.push(actor, kind, None, None);
    }

    pub fn decision(&self, b: bool, elves_ready: bool) {
        self.push(Actor::Santa, EventKind::WakeupDecision, Some(Snapshot { b, elves_ready }), None);
    }

    pub fn session_start(&self, kind: SessionKind) {
        self.push(Actor::Santa, EventKind::SessionStart, None, Some(kind));
    }

    pub fn session_end(&self, kind: SessionKind) {
        match kind {
            SessionKind::Delivery => self.deliveries.fetch_add(1, Ordering::Relaxed),
            SessionKind::Help => self.help_sessions.fetch_add(1, Ordering::Relaxed),
        };
        self.push(Actor::Santa, EventKind::SessionEnd, None, Some(kind));
    }

    pub fn deliveries(&self) -> u64 {
        self.deliveries.load(Ordering::Relaxed)
    }

    pub fn help_sessions(&self) -> u64 {
        self.help_sessions.load(Ordering::Relaxed)
    }

    pub fn rounds_completed(&self) -> u64 {
        self.deliveries() + self.help_sessions()
    }

    pub fn reindeer_pulls(&self) -> Vec<u64> {
        self.reindeer_pulls.iter().map(|c| c.load(Ordering::Relaxed)).collect()
    }

    pub fn elf_consults(&self) -> Vec<u64> {
        self.elf_consults.iter().map(|c| c.load(Ordering::Relaxed)).collect()
    }

    pub fn progress_stamp(&self) -> u64 {
        self.progress.load(Ordering::Relaxed)
    }

    /// Drains the recorded log; empty when recording was off.
    pub fn take_events(&self) -> Vec<TraceEvent> {
        match &self.log {
            Some(log) => std::mem::take(&mut *log.lock().unwrap()),
            None => Vec::new(),
        }
    }
}
