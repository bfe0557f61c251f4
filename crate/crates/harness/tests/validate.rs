use santa_harness::validate::{validate_trace, PropertyId, SessionTotals, TraceError, TraceShape};
use santa_scenario::{
    run_backend, Actor, BackendId, EventKind, ScenarioConfig, SessionKind, Snapshot, TraceEvent,
};

struct T {
    events: Vec<TraceEvent>,
    seq: u64,
}

impl T {
    fn new() -> Self {
        T { events: Vec::new(), seq: 0 }
    }

    fn push(&mut self, actor: Actor, kind: EventKind, snapshot: Option<Snapshot>, session: Option<SessionKind>) -> &mut Self {
        self.events.push(TraceEvent { seq: self.seq, actor, kind, snapshot, session });
        self.seq += 1;
        self
    }

    fn phase(&mut self, actor: Actor, kind: EventKind) -> &mut Self {
        self.push(actor, kind, None, None)
    }

    fn decision(&mut self, b: bool, elves_ready: bool) -> &mut Self {
        self.push(Actor::Santa, EventKind::WakeupDecision, Some(Snapshot { b, elves_ready }), None)
    }

    fn start(&mut self, kind: SessionKind) -> &mut Self {
        self.push(Actor::Santa, EventKind::SessionStart, None, Some(kind))
    }

    fn end(&mut self, kind: SessionKind) -> &mut Self {
        self.push(Actor::Santa, EventKind::SessionEnd, None, Some(kind))
    }

    fn reindeer_phase(&mut self, kind: EventKind, ids: impl IntoIterator<Item = u32>) -> &mut Self {
        for id in ids {
            self.phase(Actor::Reindeer(id), kind);
        }
        self
    }

    fn delivery(&mut self) -> &mut Self {
        self.reindeer_phase(EventKind::Back, 0..9)
            .decision(true, false)
            .start(SessionKind::Delivery)
            .reindeer_phase(EventKind::Harness, 0..9)
            .reindeer_phase(EventKind::Pull, 0..9)
            .end(SessionKind::Delivery)
    }

    fn help(&mut self, ids: [u32; 3]) -> &mut Self {
        for id in ids {
            self.phase(Actor::Elf(id), EventKind::Puzzled);
        }
        self.decision(false, true).start(SessionKind::Help);
        for id in ids {
            self.phase(Actor::Elf(id), EventKind::Enter);
            self.phase(Actor::Elf(id), EventKind::Consult);
        }
        self.end(SessionKind::Help)
    }
}

fn shape() -> TraceShape {
    TraceShape::new(9, 3)
}

fn check(t: &T) -> Vec<santa_harness::validate::Violation> {
    validate_trace(&t.events, &shape()).expect("structurally sound")
}

#[test]
fn an_empty_trace_is_clean() {
    assert!(validate_trace(&[], &shape()).unwrap().is_empty());
}

#[test]
fn a_well_formed_trace_is_clean() {
    let mut t = T::new();
    t.delivery().help([0, 1, 2]).delivery().help([4, 2, 7]);
    assert!(check(&t).is_empty());
}

#[test]
fn trailing_partial_work_is_not_a_defect() {
    let mut t = T::new();
    t.delivery()
        .help([0, 1, 2])
        // an unfinished cycle, an unfinished batch, an unresolved wakeup
        .reindeer_phase(EventKind::Back, 0..9)
        .reindeer_phase(EventKind::Harness, 0..4)
        .phase(Actor::Elf(5), EventKind::Puzzled)
        .decision(true, false);
    assert!(check(&t).is_empty());
}

#[test]
fn a_dangling_session_start_is_tolerated() {
    let mut t = T::new();
    t.delivery().reindeer_phase(EventKind::Back, 0..9).decision(true, false).start(SessionKind::Delivery);
    assert!(check(&t).is_empty());
}

#[test]
fn short_harness_phase_breaks_the_barrier() {
    let mut t = T::new();
    t.reindeer_phase(EventKind::Back, 0..9)
        .decision(true, false)
        .start(SessionKind::Delivery)
        .reindeer_phase(EventKind::Harness, 0..8)
        .reindeer_phase(EventKind::Pull, 0..9)
        .end(SessionKind::Delivery);
    let v = check(&t);
    assert!(v.iter().any(|v| v.property == PropertyId::P2Barrier), "{v:?}");
    let p2 = v.iter().find(|v| v.property == PropertyId::P2Barrier).unwrap();
    assert!(p2.description.contains("Harness"), "{p2}");
    assert!(!p2.witnesses.is_empty());
}

#[test]
fn a_reindeer_cannot_back_twice_in_one_phase() {
    let mut t = T::new();
    t.reindeer_phase(EventKind::Back, [0, 1, 2, 3, 3]);
    let v = check(&t);
    assert_eq!(v.len(), 1);
    assert_eq!(v[0].property, PropertyId::P2Barrier);
    assert!(v[0].description.contains("twice"), "{}", v[0]);
}

#[test]
fn reindeer_phases_from_other_actors_are_flagged() {
    let mut t = T::new();
    t.phase(Actor::Elf(1), EventKind::Pull);
    let v = check(&t);
    assert_eq!(v[0].property, PropertyId::P2Barrier);
    assert!(v[0].description.contains("not a reindeer"), "{}", v[0]);
}

#[test]
fn a_foreign_elf_cannot_enter_a_batch() {
    let mut t = T::new();
    for id in [0, 1, 2] {
        t.phase(Actor::Elf(id), EventKind::Puzzled);
    }
    t.decision(false, true).start(SessionKind::Help).phase(Actor::Elf(5), EventKind::Enter);
    let v = check(&t);
    assert!(v.iter().any(|v| v.property == PropertyId::P3Batch && v.description.contains("without being in the batch")), "{v:?}");
}

#[test]
fn only_the_elf_inside_may_consult() {
    let mut t = T::new();
    for id in [0, 1, 2] {
        t.phase(Actor::Elf(id), EventKind::Puzzled);
    }
    t.phase(Actor::Elf(0), EventKind::Enter).phase(Actor::Elf(1), EventKind::Consult);
    let v = check(&t);
    assert!(v.iter().any(|v| v.property == PropertyId::P3Batch && v.description.contains("elf 0")), "{v:?}");
}

#[test]
fn consulting_an_empty_room_is_flagged() {
    let mut t = T::new();
    for id in [0, 1, 2] {
        t.phase(Actor::Elf(id), EventKind::Puzzled);
    }
    t.phase(Actor::Elf(0), EventKind::Consult);
    let v = check(&t);
    assert!(v.iter().any(|v| v.property == PropertyId::P3Batch && v.description.contains("nobody inside")), "{v:?}");
}

#[test]
fn two_elves_cannot_be_inside_at_once() {
    let mut t = T::new();
    for id in [0, 1, 2] {
        t.phase(Actor::Elf(id), EventKind::Puzzled);
    }
    t.phase(Actor::Elf(0), EventKind::Enter).phase(Actor::Elf(1), EventKind::Enter);
    let v = check(&t);
    assert!(v.iter().any(|v| v.property == PropertyId::P3Batch && v.description.contains("still being served")), "{v:?}");
}

#[test]
fn the_next_batch_cannot_assemble_mid_service() {
    let mut t = T::new();
    for id in [0, 1, 2] {
        t.phase(Actor::Elf(id), EventKind::Puzzled);
    }
    t.phase(Actor::Elf(0), EventKind::Enter)
        .phase(Actor::Elf(0), EventKind::Consult)
        .phase(Actor::Elf(7), EventKind::Puzzled);
    let v = check(&t);
    assert!(v.iter().any(|v| v.property == PropertyId::P3Batch && v.description.contains("middle of a service batch")), "{v:?}");
}

#[test]
fn a_wakeup_seeing_reindeer_must_deliver() {
    let mut t = T::new();
    t.decision(true, true).start(SessionKind::Help);
    let v = check(&t);
    assert!(v.iter().any(|v| v.property == PropertyId::P1Priority && v.witnesses.len() == 2), "{v:?}");
}

#[test]
fn a_wakeup_seeing_reindeer_cannot_be_dropped() {
    let mut t = T::new();
    t.decision(true, false).decision(false, true).start(SessionKind::Help);
    let v = check(&t);
    assert!(v.iter().any(|v| v.property == PropertyId::P1Priority && v.description.contains("never started")), "{v:?}");
}

#[test]
fn a_complete_cycle_needs_its_delivery_session() {
    let mut t = T::new();
    t.reindeer_phase(EventKind::Back, 0..9)
        .reindeer_phase(EventKind::Harness, 0..9)
        .reindeer_phase(EventKind::Pull, 0..9);
    let v = check(&t);
    assert!(
        v.iter().any(|v| v.property == PropertyId::P4Counts && v.description.contains("complete reindeer cycles")),
        "{v:?}"
    );
}

#[test]
fn sessions_cannot_overlap_or_end_unopened() {
    let mut t = T::new();
    t.decision(true, false).start(SessionKind::Delivery).start(SessionKind::Help);
    let v = check(&t);
    assert!(v.iter().any(|v| v.property == PropertyId::P4Counts && v.description.contains("still open")), "{v:?}");

    let mut t = T::new();
    t.end(SessionKind::Help);
    let v = check(&t);
    assert!(v.iter().any(|v| v.property == PropertyId::P4Counts && v.description.contains("without a start")), "{v:?}");
}

#[test]
fn reported_totals_must_match_the_trace() {
    let mut t = T::new();
    t.delivery().help([0, 1, 2]);
    let shape = TraceShape::new(9, 3).expecting(SessionTotals { deliveries: 2, help_sessions: 1 });
    let v = validate_trace(&t.events, &shape).unwrap();
    assert_eq!(v.len(), 1, "{v:?}");
    assert_eq!(v[0].property, PropertyId::P4Counts);
    assert!(v[0].description.contains("reported 2"), "{}", v[0]);
}

#[test]
fn sequence_numbers_must_increase() {
    let mut t = T::new();
    t.delivery();
    t.events[5].seq = t.events[4].seq;
    let err = validate_trace(&t.events, &shape()).unwrap_err();
    assert!(matches!(err, TraceError::NonMonotoneSeq { index: 5, .. }), "{err}");
}

#[test]
fn payload_shapes_are_enforced() {
    let mut t = T::new();
    t.push(Actor::Santa, EventKind::WakeupDecision, None, None);
    assert!(matches!(validate_trace(&t.events, &shape()).unwrap_err(), TraceError::MissingSnapshot { .. }));

    let mut t = T::new();
    t.push(Actor::Santa, EventKind::SessionStart, None, None);
    assert!(matches!(validate_trace(&t.events, &shape()).unwrap_err(), TraceError::MissingSession { .. }));

    let mut t = T::new();
    t.push(Actor::Reindeer(0), EventKind::Back, Some(Snapshot { b: true, elves_ready: false }), None);
    assert!(matches!(validate_trace(&t.events, &shape()).unwrap_err(), TraceError::StrayPayload { .. }));
}

#[test]
fn violations_and_reports_survive_json() {
    let mut t = T::new();
    t.decision(true, true).start(SessionKind::Help);
    let v = check(&t);
    let json = serde_json::to_string(&v).unwrap();
    assert!(json.contains("\"P1_priority\""), "{json}");
    let back: Vec<santa_harness::validate::Violation> = serde_json::from_str(&json).unwrap();
    assert_eq!(back.len(), v.len());
}

#[test]
fn live_traces_from_every_backend_validate_clean() {
    let cfg = ScenarioConfig {
        santa_rounds: 150,
        reindeer_cycles: Some(30),
        ..ScenarioConfig::default()
    };
    for backend in BackendId::ALL {
        let run = run_backend(backend, &cfg, true).unwrap();
        let shape = TraceShape::new(cfg.barrier_size, cfg.group_size).expecting(SessionTotals {
            deliveries: run.stats.deliveries,
            help_sessions: run.stats.help_sessions,
        });
        let first = validate_trace(&run.events, &shape).unwrap();
        assert!(first.is_empty(), "{backend}: {first:?}");
        let second = validate_trace(&run.events, &shape).unwrap();
        assert!(second.is_empty(), "validation must be deterministic");
    }
}
