//! Trace validation for the four behavioral properties.
//!
//! The reindeer phase stream and the elf phase stream are each decomposed
//! positionally: reindeer traces must read as repeated
//! `Back^barrier Harness^barrier Pull^barrier` with distinct ids inside
//! every phase, elf traces as `Puzzled^group` followed by `group`
//! alternating same-elf enter/consult pairs drawn from exactly the puzzled
//! set. Positional decomposition is sound because every driver serializes
//! group progress through its coordinator, even though phase events may
//! interleave freely with Santa's own decision and session records. A
//! truncated tail (an unfinished cycle, batch, or session) is not a defect.
//!
//! Structural problems with the trace itself, wrong payload shapes or a
//! non-increasing sequence, are reported as [`TraceError`], never as
//! property violations. The phase-stream checks stop at the first break in
//! their stream so one malformed event does not avalanche; independent
//! properties still report on the same pass.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use santa_scenario::{Actor, EventKind, SessionKind, TraceEvent};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PropertyId {
    /// A wakeup that saw the reindeer flag must resolve to a delivery.
    #[serde(rename = "P1_priority")]
    P1Priority,
    /// Reindeer move as one full barrier per phase, in phase order.
    #[serde(rename = "P2_barrier")]
    P2Barrier,
    /// Elves are served as one batch of distinct elves, enter before
    /// consult, nobody from outside the batch.
    #[serde(rename = "P3_batch")]
    P3Batch,
    /// Session counts agree with the completed cycles, the completed
    /// batches, and the reported statistics.
    #[serde(rename = "P4_counts")]
    P4Counts,
}

impl fmt::Display for PropertyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PropertyId::P1Priority => "P1_priority",
            PropertyId::P2Barrier => "P2_barrier",
            PropertyId::P3Batch => "P3_batch",
            PropertyId::P4Counts => "P4_counts",
        })
    }
}

/// One property violation, anchored to the sequence range it was observed
/// over and citing the specific events that witness it.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Violation {
    pub property: PropertyId,
    pub first_seq: u64,
    pub last_seq: u64,
    pub description: String,
    pub witnesses: Vec<u64>,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} [seq {}..{}]: {}",
            self.property, self.first_seq, self.last_seq, self.description
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum TraceError {
    #[error("event {index}: seq {seq} does not increase over {prev}")]
    NonMonotoneSeq { index: usize, seq: u64, prev: u64 },
    #[error("seq {seq}: wakeup decision lacks its snapshot")]
    MissingSnapshot { seq: u64 },
    #[error("seq {seq}: session event lacks its kind")]
    MissingSession { seq: u64 },
    #[error("seq {seq}: {what} does not belong on this event")]
    StrayPayload { seq: u64, what: &'static str },
}

/// Session totals claimed by the producer of a trace, checked under P4.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SessionTotals {
    pub deliveries: u64,
    pub help_sessions: u64,
}

/// What the validator needs to know about the run behind a trace.
#[derive(Clone, Debug)]
pub struct TraceShape {
    pub barrier_size: usize,
    pub group_size: usize,
    /// Totals to reconcile against, when the caller has them.
    pub expected: Option<SessionTotals>,
}

impl TraceShape {
    pub fn new(barrier_size: usize, group_size: usize) -> Self {
        TraceShape { barrier_size, group_size, expected: None }
    }

    pub fn expecting(mut self, totals: SessionTotals) -> Self {
        self.expected = Some(totals);
        self
    }
}

const REINDEER_PHASES: [EventKind; 3] = [EventKind::Back, EventKind::Harness, EventKind::Pull];

struct CycleChecker {
    barrier: usize,
    phase: usize,
    seen: HashSet<u32>,
    cycle_first_seq: u64,
    complete: u64,
    broken: bool,
}

impl CycleChecker {
    fn new(barrier: usize) -> Self {
        CycleChecker { barrier, phase: 0, seen: HashSet::new(), cycle_first_seq: 0, complete: 0, broken: false }
    }

    fn feed(&mut self, seq: u64, id: u32, kind: EventKind, out: &mut Vec<Violation>) {
        if self.broken {
            return;
        }
        if self.phase == 0 && self.seen.is_empty() {
            self.cycle_first_seq = seq;
        }
        let expected = REINDEER_PHASES[self.phase];
        if kind != expected {
            self.broken = true;
            out.push(Violation {
                property: PropertyId::P2Barrier,
                first_seq: self.cycle_first_seq,
                last_seq: seq,
                description: format!(
                    "expected {expected:?} {} of {} in this cycle, found {kind:?} from reindeer {id}",
                    self.seen.len() + 1,
                    self.barrier
                ),
                witnesses: vec![seq],
            });
            return;
        }
        if !self.seen.insert(id) {
            self.broken = true;
            out.push(Violation {
                property: PropertyId::P2Barrier,
                first_seq: self.cycle_first_seq,
                last_seq: seq,
                description: format!("reindeer {id} appears twice in one {kind:?} phase"),
                witnesses: vec![seq],
            });
            return;
        }
        if self.seen.len() == self.barrier {
            self.seen.clear();
            self.phase += 1;
            if self.phase == REINDEER_PHASES.len() {
                self.phase = 0;
                self.complete += 1;
            }
        }
    }
}

enum BatchState {
    Puzzling { seen: HashSet<u32> },
    Serving { batch: HashSet<u32>, served: HashSet<u32>, entered: Option<u32> },
}

struct BatchChecker {
    group: usize,
    state: BatchState,
    batch_first_seq: u64,
    complete: u64,
    broken: bool,
}

impl BatchChecker {
    fn new(group: usize) -> Self {
        BatchChecker {
            group,
            state: BatchState::Puzzling { seen: HashSet::new() },
            batch_first_seq: 0,
            complete: 0,
            broken: false,
        }
    }

    fn violation(&mut self, seq: u64, description: String, out: &mut Vec<Violation>) {
        self.broken = true;
        out.push(Violation {
            property: PropertyId::P3Batch,
            first_seq: self.batch_first_seq,
            last_seq: seq,
            description,
            witnesses: vec![seq],
        });
    }

    fn feed(&mut self, seq: u64, id: u32, kind: EventKind, out: &mut Vec<Violation>) {
        if self.broken {
            return;
        }
        match &mut self.state {
            BatchState::Puzzling { seen } => {
                if seen.is_empty() {
                    self.batch_first_seq = seq;
                }
                if kind != EventKind::Puzzled {
                    let n = seen.len();
                    return self.violation(
                        seq,
                        format!("{kind:?} from elf {id} before a batch of {} assembled ({n} puzzled so far)", self.group),
                        out,
                    );
                }
                if !seen.insert(id) {
                    return self.violation(seq, format!("elf {id} puzzled twice in one batch"), out);
                }
                if seen.len() == self.group {
                    let batch = std::mem::take(seen);
                    self.state = BatchState::Serving { batch, served: HashSet::new(), entered: None };
                }
            }
            BatchState::Serving { batch, served, entered } => match (kind, *entered) {
                (EventKind::Enter, None) => {
                    if !batch.contains(&id) {
                        return self.violation(seq, format!("elf {id} entered without being in the batch"), out);
                    }
                    if served.contains(&id) {
                        return self.violation(seq, format!("elf {id} entered twice in one batch"), out);
                    }
                    *entered = Some(id);
                }
                (EventKind::Consult, Some(e)) => {
                    if id != e {
                        return self.violation(
                            seq,
                            format!("elf {id} consulted while elf {e} was the one inside"),
                            out,
                        );
                    }
                    served.insert(id);
                    *entered = None;
                    if served.len() == self.group {
                        self.complete += 1;
                        self.state = BatchState::Puzzling { seen: HashSet::new() };
                    }
                }
                (EventKind::Consult, None) => {
                    self.violation(seq, format!("elf {id} consulted with nobody inside"), out)
                }
                (EventKind::Enter, Some(e)) => self.violation(
                    seq,
                    format!("elf {id} entered while elf {e} was still being served"),
                    out,
                ),
                (other, _) => self.violation(
                    seq,
                    format!("{other:?} from elf {id} in the middle of a service batch"),
                    out,
                ),
            },
        }
    }
}

/// Checks a trace against the four properties. Structural defects abort
/// with an error; an empty trace is trivially clean.
pub fn validate_trace(events: &[TraceEvent], shape: &TraceShape) -> Result<Vec<Violation>, TraceError> {
    check_structure(events)?;

    let mut violations = Vec::new();
    let mut cycles = CycleChecker::new(shape.barrier_size);
    let mut batches = BatchChecker::new(shape.group_size);

    let mut pending_decision: Option<(u64, bool)> = None;
    let mut open_session: Option<(u64, SessionKind)> = None;
    let mut session_scan_broken = false;
    let mut ends = [0u64; 2];
    let ix = |k: SessionKind| match k {
        SessionKind::Delivery => 0,
        SessionKind::Help => 1,
    };

    for ev in events {
        match (ev.actor, ev.kind) {
            (Actor::Reindeer(id), EventKind::Back | EventKind::Harness | EventKind::Pull) => {
                cycles.feed(ev.seq, id, ev.kind, &mut violations);
            }
            (Actor::Elf(id), EventKind::Puzzled | EventKind::Enter | EventKind::Consult) => {
                batches.feed(ev.seq, id, ev.kind, &mut violations);
            }
            (actor, EventKind::Back | EventKind::Harness | EventKind::Pull) => {
                if !cycles.broken {
                    cycles.broken = true;
                    violations.push(Violation {
                        property: PropertyId::P2Barrier,
                        first_seq: ev.seq,
                        last_seq: ev.seq,
                        description: format!("{:?} issued by {actor:?}, not a reindeer", ev.kind),
                        witnesses: vec![ev.seq],
                    });
                }
            }
            (actor, EventKind::Puzzled | EventKind::Enter | EventKind::Consult) => {
                if !batches.broken {
                    batches.broken = true;
                    violations.push(Violation {
                        property: PropertyId::P3Batch,
                        first_seq: ev.seq,
                        last_seq: ev.seq,
                        description: format!("{:?} issued by {actor:?}, not an elf", ev.kind),
                        witnesses: vec![ev.seq],
                    });
                }
            }
            (_, EventKind::WakeupDecision) => {
                let snap = ev.snapshot.expect("checked structurally");
                if let Some((dseq, true)) = pending_decision {
                    violations.push(Violation {
                        property: PropertyId::P1Priority,
                        first_seq: dseq,
                        last_seq: ev.seq,
                        description: "a wakeup that saw the reindeer back never started a delivery".into(),
                        witnesses: vec![dseq, ev.seq],
                    });
                }
                pending_decision = Some((ev.seq, snap.b));
            }
            (_, EventKind::SessionStart) => {
                let kind = ev.session.expect("checked structurally");
                if let Some((dseq, true)) = pending_decision {
                    if kind != SessionKind::Delivery {
                        violations.push(Violation {
                            property: PropertyId::P1Priority,
                            first_seq: dseq,
                            last_seq: ev.seq,
                            description: "a wakeup that saw the reindeer back resolved to a help session".into(),
                            witnesses: vec![dseq, ev.seq],
                        });
                    }
                }
                pending_decision = None;
                if let Some((oseq, okind)) = open_session {
                    if !session_scan_broken {
                        session_scan_broken = true;
                        violations.push(Violation {
                            property: PropertyId::P4Counts,
                            first_seq: oseq,
                            last_seq: ev.seq,
                            description: format!("{kind:?} session started while a {okind:?} session was still open"),
                            witnesses: vec![oseq, ev.seq],
                        });
                    }
                }
                open_session = Some((ev.seq, kind));
            }
            (_, EventKind::SessionEnd) => {
                let kind = ev.session.expect("checked structurally");
                ends[ix(kind)] += 1;
                match open_session.take() {
                    Some((_, okind)) if okind == kind => {}
                    other => {
                        if !session_scan_broken {
                            session_scan_broken = true;
                            let (desc, witnesses) = match other {
                                Some((oseq, okind)) => (
                                    format!("{kind:?} session ended but the open session was {okind:?}"),
                                    vec![oseq, ev.seq],
                                ),
                                None => (format!("{kind:?} session ended without a start"), vec![ev.seq]),
                            };
                            violations.push(Violation {
                                property: PropertyId::P4Counts,
                                first_seq: witnesses[0],
                                last_seq: ev.seq,
                                description: desc,
                                witnesses,
                            });
                        }
                    }
                }
            }
        }
    }

    let first_seq = events.first().map_or(0, |e| e.seq);
    let last_seq = events.last().map_or(0, |e| e.seq);
    let whole = |property, description| Violation {
        property,
        first_seq,
        last_seq,
        description,
        witnesses: Vec::new(),
    };

    if !cycles.broken && cycles.complete != ends[0] {
        violations.push(whole(
            PropertyId::P4Counts,
            format!(
                "{} complete reindeer cycles but {} delivery sessions ended",
                cycles.complete, ends[0]
            ),
        ));
    }
    if !batches.broken && batches.complete != ends[1] {
        violations.push(whole(
            PropertyId::P4Counts,
            format!(
                "{} complete elf batches but {} help sessions ended",
                batches.complete, ends[1]
            ),
        ));
    }
    if let Some(expected) = shape.expected {
        if ends[0] != expected.deliveries {
            violations.push(whole(
                PropertyId::P4Counts,
                format!(
                    "trace ends {} deliveries but the run reported {}",
                    ends[0], expected.deliveries
                ),
            ));
        }
        if ends[1] != expected.help_sessions {
            violations.push(whole(
                PropertyId::P4Counts,
                format!(
                    "trace ends {} help sessions but the run reported {}",
                    ends[1], expected.help_sessions
                ),
            ));
        }
    }
    Ok(violations)
}

fn check_structure(events: &[TraceEvent]) -> Result<(), TraceError> {
    let mut prev: Option<u64> = None;
    for (index, ev) in events.iter().enumerate() {
        if let Some(p) = prev {
            if ev.seq <= p {
                return Err(TraceError::NonMonotoneSeq { index, seq: ev.seq, prev: p });
            }
        }
        prev = Some(ev.seq);
        match ev.kind {
            EventKind::WakeupDecision => {
                if ev.snapshot.is_none() {
                    return Err(TraceError::MissingSnapshot { seq: ev.seq });
                }
                if ev.session.is_some() {
                    return Err(TraceError::StrayPayload { seq: ev.seq, what: "session kind" });
                }
            }
            EventKind::SessionStart | EventKind::SessionEnd => {
                if ev.session.is_none() {
                    return Err(TraceError::MissingSession { seq: ev.seq });
                }
                if ev.snapshot.is_some() {
                    return Err(TraceError::StrayPayload { seq: ev.seq, what: "snapshot" });
                }
            }
            _ => {
                if ev.snapshot.is_some() {
                    return Err(TraceError::StrayPayload { seq: ev.seq, what: "snapshot" });
                }
                if ev.session.is_some() {
                    return Err(TraceError::StrayPayload { seq: ev.seq, what: "session kind" });
                }
            }
        }
    }
    Ok(())
}
