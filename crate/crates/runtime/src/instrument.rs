use std::sync::atomic::{AtomicI64, AtomicU64, Ordering};

/// Global execution counters. Everything is monotone except the exclusion
/// gauge, which must never observe a second concurrent entrant.
#[derive(Default)]
pub struct Instrument {
    pub(crate) method_calls: AtomicU64,
    pub(crate) segments: AtomicU64,
    pub(crate) guard_entry_evals: AtomicU64,
    pub(crate) guard_wake_evals: AtomicU64,
    pub(crate) guard_action_evals: AtomicU64,
    pub(crate) parks: AtomicU64,
    pub(crate) wakes: AtomicU64,
    pub(crate) action_dispatches: AtomicU64,
    pub(crate) action_drops: AtomicU64,
    pub(crate) action_completions: AtomicU64,
    pub(crate) exclusion_violations: AtomicU64,
    pub(crate) action_overlap_attempts: AtomicU64,
}

impl Instrument {
    pub(crate) fn bump(counter: &AtomicU64) {
        counter.fetch_add(1, Ordering::Relaxed);
    }

    pub fn snapshot(&self) -> InstrumentSnapshot {
        InstrumentSnapshot {
            method_calls: self.method_calls.load(Ordering::Relaxed),
            segments: self.segments.load(Ordering::Relaxed),
            guard_entry_evals: self.guard_entry_evals.load(Ordering::Relaxed),
            guard_wake_evals: self.guard_wake_evals.load(Ordering::Relaxed),
            guard_action_evals: self.guard_action_evals.load(Ordering::Relaxed),
            parks: self.parks.load(Ordering::Relaxed),
            wakes: self.wakes.load(Ordering::Relaxed),
            action_dispatches: self.action_dispatches.load(Ordering::Relaxed),
            action_drops: self.action_drops.load(Ordering::Relaxed),
            action_completions: self.action_completions.load(Ordering::Relaxed),
            exclusion_violations: self.exclusion_violations.load(Ordering::Relaxed),
            action_overlap_attempts: self.action_overlap_attempts.load(Ordering::Relaxed),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct InstrumentSnapshot {
    pub method_calls: u64,
    /// Completed atomic segments (the unit of per-object exclusion).
    pub segments: u64,
    /// Guard evaluations at body entry (first attempt and post-wake rechecks).
    pub guard_entry_evals: u64,
    /// Guard evaluations performed while scanning a waiter queue after a
    /// segment completed on the same object.
    pub guard_wake_evals: u64,
    /// Action guard evaluations during dispatch attempts.
    pub guard_action_evals: u64,
    pub parks: u64,
    pub wakes: u64,
    pub action_dispatches: u64,
    /// Dispatched actions whose guard no longer held when they started.
    pub action_drops: u64,
    pub action_completions: u64,
    /// Times a segment began while another was already inside the same
    /// object. Must stay zero.
    pub exclusion_violations: u64,
    /// Times an action dispatch was attempted while one was in flight for
    /// the same object. Must stay zero (the in-flight flag gates dispatch).
    pub action_overlap_attempts: u64,
}

/// Per-object entry gauge backing the exclusion counter check.
#[derive(Default)]
pub struct EntryGauge {
    inside: AtomicI64,
}

impl EntryGauge {
    /// Returns false if someone else was already inside.
    pub(crate) fn enter(&self) -> bool {
        self.inside.fetch_add(1, Ordering::SeqCst) == 0
    }

    pub(crate) fn exit(&self) {
        self.inside.fetch_sub(1, Ordering::SeqCst);
    }

    pub fn current(&self) -> i64 {
        self.inside.load(Ordering::SeqCst)
    }
}
