//! Rendezvous-channel driver. All channels are zero-capacity, so every send
//! is a handoff and Santa's blocking select doubles as his sleep.
//!
//! Group coordinators aggregate the individual actors: the sleigh turns
//! `barrier` reindeer returns into one `back` message, the shop turns
//! `group` puzzled elves into one `puzzled` message. Coordinators emit the
//! phase events as they collect each id, which keeps per-actor counters in
//! step with the session that consumed them.
//!
//! Delivery priority works the way the select discipline dictates: once a
//! help round is pending, Santa polls `back` nonblockingly and a ready
//! sleigh wins the round; the pending help survives to a later round.
//!
//! Every blocking operation in every helper thread carries a `quit` arm.
//! Dropping the quit sender aborts the whole cast, which is how a wedged
//! configuration gets dismantled without leaking threads. Clean retirement
//! (all actors out of cycles) is instead observed as channel disconnection
//! and reported as a stall, not a deadlock.

use std::sync::Arc;
use std::thread;
use std::time::Instant;

use crossbeam_channel::{bounded, never, select, Receiver, RecvTimeoutError, TryRecvError};

use crate::backends::{Budget, ScenarioRun, WATCHDOG_POLL, WATCHDOG_STILL_LIMIT};
use crate::config::{BackendId, ScenarioConfig};
use crate::stats::RunStats;
use crate::trace::{Actor, EventHub, EventKind, SessionKind};

enum Step {
    Got,
    Closed,
    Quit,
}

fn recv_unit(rx: &Receiver<()>, quit: &Receiver<()>) -> Step {
    select! {
        recv(rx) -> m => if m.is_ok() { Step::Got } else { Step::Closed },
        recv(quit) -> _ => Step::Quit,
    }
}

pub(crate) fn run(cfg: &ScenarioConfig, record: bool) -> ScenarioRun {
    let hub = Arc::new(EventHub::new(cfg, record));
    let start = Instant::now();

    let (rb_tx, rb_rx) = bounded::<u32>(0);
    let (rh_tx, rh_rx) = bounded::<u32>(0);
    let (rp_tx, rp_rx) = bounded::<u32>(0);
    let (back_tx, back_rx) = bounded::<()>(0);
    let (harness_tx, harness_rx) = bounded::<()>(0);
    let (pull_tx, pull_rx) = bounded::<()>(0);

    let (ep_tx, ep_rx) = bounded::<u32>(0);
    let (ee_tx, ee_rx) = bounded::<u32>(0);
    let (ec_tx, ec_rx) = bounded::<u32>(0);
    let (puzzled_tx, puzzled_rx) = bounded::<()>(0);
    let (enter_tx, enter_rx) = bounded::<()>(0);
    let (consult_tx, consult_rx) = bounded::<()>(0);

    let (quit_tx, quit_rx) = bounded::<()>(0);
    let (done_tx, done_rx) = bounded::<(u64, f64, bool)>(1);

    let mut handles = Vec::new();

    let santa = {
        let hub = hub.clone();
        let quit = quit_rx.clone();
        let rounds = cfg.santa_rounds;
        let group = cfg.group_size;
        let mut back_rx = back_rx;
        let mut puzzled_rx = puzzled_rx;
        thread::spawn(move || {
            let mut b = false;
            let mut p = false;
            let mut back_open = true;
            let mut puzzled_open = true;
            let mut rounds_done = 0u64;
            let mut wedged = false;
            'rounds: for _ in 0..rounds {
                while !b && !p {
                    if !back_open && !puzzled_open {
                        break 'rounds;
                    }
                    select! {
                        recv(back_rx) -> m => match m {
                            Ok(()) => b = true,
                            Err(_) => {
                                back_rx = never();
                                back_open = false;
                            }
                        },
                        recv(puzzled_rx) -> m => match m {
                            Ok(()) => p = true,
                            Err(_) => {
                                puzzled_rx = never();
                                puzzled_open = false;
                            }
                        },
                        recv(quit) -> _ => {
                            wedged = true;
                            break 'rounds;
                        }
                    }
                }
                if p && !b {
                    match back_rx.try_recv() {
                        Ok(()) => b = true,
                        Err(TryRecvError::Empty) => {}
                        Err(TryRecvError::Disconnected) => {
                            back_rx = never();
                            back_open = false;
                        }
                    }
                }
                hub.decision(b, p);
                if b {
                    hub.session_start(SessionKind::Delivery);
                    for rx in [&harness_rx, &pull_rx] {
                        match recv_unit(rx, &quit) {
                            Step::Got => {}
                            Step::Closed | Step::Quit => {
                                wedged = true;
                                break 'rounds;
                            }
                        }
                    }
                    b = false;
                    hub.session_end(SessionKind::Delivery);
                } else {
                    hub.session_start(SessionKind::Help);
                    for _ in 0..group {
                        for rx in [&enter_rx, &consult_rx] {
                            match recv_unit(rx, &quit) {
                                Step::Got => {}
                                Step::Closed | Step::Quit => {
                                    wedged = true;
                                    break 'rounds;
                                }
                            }
                        }
                    }
                    p = false;
                    hub.session_end(SessionKind::Help);
                }
                rounds_done += 1;
            }
            let _ = done_tx.send((rounds_done, start.elapsed().as_secs_f64(), wedged));
        })
    };

    {
        let hub = hub.clone();
        let quit = quit_rx.clone();
        let barrier = cfg.barrier_size;
        handles.push(thread::spawn(move || loop {
            let legs = [
                (&rb_rx, EventKind::Back, &back_tx),
                (&rh_rx, EventKind::Harness, &harness_tx),
                (&rp_rx, EventKind::Pull, &pull_tx),
            ];
            for (rx, kind, tx) in legs {
                for _ in 0..barrier {
                    select! {
                        recv(rx) -> m => match m {
                            Ok(id) => hub.phase(Actor::Reindeer(id), kind),
                            Err(_) => return,
                        },
                        recv(quit) -> _ => return,
                    }
                }
                select! {
                    send(tx, ()) -> r => if r.is_err() { return },
                    recv(quit) -> _ => return,
                }
            }
        }));
    }

    {
        let hub = hub.clone();
        let quit = quit_rx.clone();
        let group = cfg.group_size;
        handles.push(thread::spawn(move || loop {
            for _ in 0..group {
                select! {
                    recv(ep_rx) -> m => match m {
                        Ok(id) => hub.phase(Actor::Elf(id), EventKind::Puzzled),
                        Err(_) => return,
                    },
                    recv(quit) -> _ => return,
                }
            }
            select! {
                send(puzzled_tx, ()) -> r => if r.is_err() { return },
                recv(quit) -> _ => return,
            }
            for _ in 0..group {
                let legs = [
                    (&ee_rx, EventKind::Enter, &enter_tx),
                    (&ec_rx, EventKind::Consult, &consult_tx),
                ];
                for (rx, kind, tx) in legs {
                    select! {
                        recv(rx) -> m => match m {
                            Ok(id) => hub.phase(Actor::Elf(id), kind),
                            Err(_) => return,
                        },
                        recv(quit) -> _ => return,
                    }
                    select! {
                        send(tx, ()) -> r => if r.is_err() { return },
                        recv(quit) -> _ => return,
                    }
                }
            }
        }));
    }

    for i in 0..cfg.reindeer_count {
        let quit = quit_rx.clone();
        let (rb, rh, rp) = (rb_tx.clone(), rh_tx.clone(), rp_tx.clone());
        let mut budget = Budget::new(cfg.reindeer_cycles);
        handles.push(thread::spawn(move || {
            let id = i as u32;
            while budget.next() {
                for tx in [&rb, &rh, &rp] {
                    select! {
                        send(tx, id) -> r => if r.is_err() { return },
                        recv(quit) -> _ => return,
                    }
                }
            }
        }));
    }

    for j in 0..cfg.elf_count {
        let quit = quit_rx.clone();
        let (ep, ee, ec) = (ep_tx.clone(), ee_tx.clone(), ec_tx.clone());
        let mut budget = Budget::new(cfg.elf_cycles);
        handles.push(thread::spawn(move || {
            let id = j as u32;
            while budget.next() {
                for tx in [&ep, &ee, &ec] {
                    select! {
                        send(tx, id) -> r => if r.is_err() { return },
                        recv(quit) -> _ => return,
                    }
                }
            }
        }));
    }

    drop((rb_tx, rh_tx, rp_tx, ep_tx, ee_tx, ec_tx, quit_rx));

    let mut quit_tx = Some(quit_tx);
    let mut last = hub.progress_stamp();
    let mut still = 0;
    let (rounds_done, wall_s, wedged) = loop {
        match done_rx.recv_timeout(WATCHDOG_POLL) {
            Ok(msg) => break msg,
            Err(RecvTimeoutError::Timeout) => {
                let now = hub.progress_stamp();
                if now == last {
                    still += 1;
                    if still >= WATCHDOG_STILL_LIMIT {
                        quit_tx = None;
                    }
                } else {
                    last = now;
                    still = 0;
                }
            }
            Err(RecvTimeoutError::Disconnected) => {
                break (hub.rounds_completed(), start.elapsed().as_secs_f64(), true)
            }
        }
    };
    drop(quit_tx);
    santa.join().expect("santa thread");
    for h in handles {
        h.join().expect("scenario thread");
    }

    let stalled = rounds_done < cfg.santa_rounds;
    let stats = RunStats::collect(
        BackendId::Channels,
        &hub,
        std::time::Duration::from_secs_f64(wall_s),
        stalled,
        wedged,
        0,
    );
    ScenarioRun { stats, events: hub.take_events(), instrument: None }
}
