//! Counting-semaphore driver: one OS thread per actor plus dedicated sleigh
//! and shop coordinator threads. Every synchronization point is a paired
//! acquire/release, with a Done counterpart confirming each phase step.
//!
//! Shutdown closes every semaphore; a blocked acquire then returns false and
//! its thread unwinds. A watchdog closes the set early if the hub stops
//! moving, which is how configurations with no way forward get reported as
//! deadlocked instead of hanging.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Condvar, Mutex};
use std::thread;
use std::time::Instant;

use crate::backends::{Budget, ScenarioRun, WATCHDOG_POLL, WATCHDOG_STILL_LIMIT};
use crate::config::{BackendId, ScenarioConfig};
use crate::stats::RunStats;
use crate::trace::{Actor, EventHub, EventKind, SessionKind};

struct Semaphore {
    state: Mutex<(u64, bool)>,
    cv: Condvar,
}

impl Semaphore {
    fn new() -> Self {
        Semaphore { state: Mutex::new((0, false)), cv: Condvar::new() }
    }

    /// Takes one permit, blocking while none are available. Returns false
    /// once the semaphore is closed, permits notwithstanding.
    fn acquire(&self) -> bool {
        let mut st = self.state.lock().unwrap();
        loop {
            if st.1 {
                return false;
            }
            if st.0 > 0 {
                st.0 -= 1;
                return true;
            }
            st = self.cv.wait(st).unwrap();
        }
    }

    fn release(&self) {
        let mut st = self.state.lock().unwrap();
        st.0 += 1;
        drop(st);
        self.cv.notify_one();
    }

    fn close(&self) {
        let mut st = self.state.lock().unwrap();
        st.1 = true;
        drop(st);
        self.cv.notify_all();
    }
}

struct Sems {
    wakeup: Semaphore,
    wakeup_reindeer: Semaphore,
    wakeup_elves: Semaphore,
    harness: Semaphore,
    harness_done: Semaphore,
    pull: Semaphore,
    pull_done: Semaphore,
    enter: Semaphore,
    enter_done: Semaphore,
    consult: Semaphore,
    consult_done: Semaphore,
    r_back: Semaphore,
    r_back_done: Semaphore,
    r_harness: Semaphore,
    r_harness_done: Semaphore,
    r_pull: Semaphore,
    r_pull_done: Semaphore,
    e_puzzled: Semaphore,
    e_puzzled_done: Semaphore,
    e_enter: Semaphore,
    e_enter_done: Semaphore,
    e_consult: Semaphore,
    e_consult_done: Semaphore,
}

impl Sems {
    fn new() -> Self {
        Sems {
            wakeup: Semaphore::new(),
            wakeup_reindeer: Semaphore::new(),
            wakeup_elves: Semaphore::new(),
            harness: Semaphore::new(),
            harness_done: Semaphore::new(),
            pull: Semaphore::new(),
            pull_done: Semaphore::new(),
            enter: Semaphore::new(),
            enter_done: Semaphore::new(),
            consult: Semaphore::new(),
            consult_done: Semaphore::new(),
            r_back: Semaphore::new(),
            r_back_done: Semaphore::new(),
            r_harness: Semaphore::new(),
            r_harness_done: Semaphore::new(),
            r_pull: Semaphore::new(),
            r_pull_done: Semaphore::new(),
            e_puzzled: Semaphore::new(),
            e_puzzled_done: Semaphore::new(),
            e_enter: Semaphore::new(),
            e_enter_done: Semaphore::new(),
            e_consult: Semaphore::new(),
            e_consult_done: Semaphore::new(),
        }
    }

    fn close_all(&self) {
        let all = [
            &self.wakeup,
            &self.wakeup_reindeer,
            &self.wakeup_elves,
            &self.harness,
            &self.harness_done,
            &self.pull,
            &self.pull_done,
            &self.enter,
            &self.enter_done,
            &self.consult,
            &self.consult_done,
            &self.r_back,
            &self.r_back_done,
            &self.r_harness,
            &self.r_harness_done,
            &self.r_pull,
            &self.r_pull_done,
            &self.e_puzzled,
            &self.e_puzzled_done,
            &self.e_enter,
            &self.e_enter_done,
            &self.e_consult,
            &self.e_consult_done,
        ];
        for sem in all {
            sem.close();
        }
    }
}

struct SantaOutcome {
    rounds_done: u64,
    wall_s: f64,
}

pub(crate) fn run(cfg: &ScenarioConfig, record: bool) -> ScenarioRun {
    let hub = Arc::new(EventHub::new(cfg, record));
    let sems = Arc::new(Sems::new());
    let back_flag = Arc::new(AtomicBool::new(false));
    let done = Arc::new(AtomicBool::new(false));
    let start = Instant::now();

    let mut handles = Vec::new();

    let santa = {
        let hub = hub.clone();
        let sems = sems.clone();
        let back_flag = back_flag.clone();
        let rounds = cfg.santa_rounds;
        let group = cfg.group_size;
        thread::spawn(move || {
            let mut rounds_done = 0;
            'rounds: for _ in 0..rounds {
                if !sems.wakeup.acquire() {
                    break;
                }
                let b = back_flag.load(Ordering::SeqCst);
                hub.decision(b, !b);
                if b {
                    hub.session_start(SessionKind::Delivery);
                    back_flag.store(false, Ordering::SeqCst);
                    sems.wakeup_reindeer.release();
                    if !sems.harness.acquire() {
                        break;
                    }
                    sems.harness_done.release();
                    if !sems.pull.acquire() {
                        break;
                    }
                    sems.pull_done.release();
                    hub.session_end(SessionKind::Delivery);
                } else {
                    hub.session_start(SessionKind::Help);
                    sems.wakeup_elves.release();
                    for _ in 0..group {
                        if !sems.enter.acquire() {
                            break 'rounds;
                        }
                        sems.enter_done.release();
                        if !sems.consult.acquire() {
                            break 'rounds;
                        }
                        sems.consult_done.release();
                    }
                    hub.session_end(SessionKind::Help);
                }
                rounds_done += 1;
            }
            SantaOutcome { rounds_done, wall_s: start.elapsed().as_secs_f64() }
        })
    };

    {
        let sems = sems.clone();
        let back_flag = back_flag.clone();
        let barrier = cfg.barrier_size;
        handles.push(thread::spawn(move || loop {
            for _ in 0..barrier {
                sems.r_back.release();
            }
            for _ in 0..barrier {
                if !sems.r_back_done.acquire() {
                    return;
                }
            }
            back_flag.store(true, Ordering::SeqCst);
            sems.wakeup.release();
            if !sems.wakeup_reindeer.acquire() {
                return;
            }
            for _ in 0..barrier {
                sems.r_harness.release();
            }
            for _ in 0..barrier {
                if !sems.r_harness_done.acquire() {
                    return;
                }
            }
            sems.harness.release();
            if !sems.harness_done.acquire() {
                return;
            }
            for _ in 0..barrier {
                sems.r_pull.release();
            }
            for _ in 0..barrier {
                if !sems.r_pull_done.acquire() {
                    return;
                }
            }
            sems.pull.release();
            if !sems.pull_done.acquire() {
                return;
            }
        }));
    }

    {
        let sems = sems.clone();
        let group = cfg.group_size;
        handles.push(thread::spawn(move || loop {
            for _ in 0..group {
                sems.e_puzzled.release();
            }
            for _ in 0..group {
                if !sems.e_puzzled_done.acquire() {
                    return;
                }
            }
            sems.wakeup.release();
            if !sems.wakeup_elves.acquire() {
                return;
            }
            for _ in 0..group {
                sems.e_enter.release();
                if !sems.e_enter_done.acquire() {
                    return;
                }
                sems.enter.release();
                if !sems.enter_done.acquire() {
                    return;
                }
                sems.e_consult.release();
                if !sems.e_consult_done.acquire() {
                    return;
                }
                sems.consult.release();
                if !sems.consult_done.acquire() {
                    return;
                }
            }
        }));
    }

    for i in 0..cfg.reindeer_count {
        let hub = hub.clone();
        let sems = sems.clone();
        let mut budget = Budget::new(cfg.reindeer_cycles);
        handles.push(thread::spawn(move || {
            let me = Actor::Reindeer(i as u32);
            while budget.next() {
                if !sems.r_back.acquire() {
                    return;
                }
                hub.phase(me, EventKind::Back);
                sems.r_back_done.release();
                if !sems.r_harness.acquire() {
                    return;
                }
                hub.phase(me, EventKind::Harness);
                sems.r_harness_done.release();
                if !sems.r_pull.acquire() {
                    return;
                }
                hub.phase(me, EventKind::Pull);
                sems.r_pull_done.release();
            }
        }));
    }

    for j in 0..cfg.elf_count {
        let hub = hub.clone();
        let sems = sems.clone();
        let mut budget = Budget::new(cfg.elf_cycles);
        handles.push(thread::spawn(move || {
            let me = Actor::Elf(j as u32);
            while budget.next() {
                if !sems.e_puzzled.acquire() {
                    return;
                }
                hub.phase(me, EventKind::Puzzled);
                sems.e_puzzled_done.release();
                if !sems.e_enter.acquire() {
                    return;
                }
                hub.phase(me, EventKind::Enter);
                sems.e_enter_done.release();
                if !sems.e_consult.acquire() {
                    return;
                }
                hub.phase(me, EventKind::Consult);
                sems.e_consult_done.release();
            }
        }));
    }

    {
        let hub = hub.clone();
        let sems = sems.clone();
        let done = done.clone();
        handles.push(thread::spawn(move || {
            let mut last = hub.progress_stamp();
            let mut still = 0;
            loop {
                thread::sleep(WATCHDOG_POLL);
                if done.load(Ordering::Acquire) {
                    return;
                }
                let now = hub.progress_stamp();
                if now == last {
                    still += 1;
                    if still >= WATCHDOG_STILL_LIMIT {
                        sems.close_all();
                        return;
                    }
                } else {
                    last = now;
                    still = 0;
                }
            }
        }));
    }

    let outcome = santa.join().expect("santa thread");
    done.store(true, Ordering::Release);
    sems.close_all();
    for h in handles {
        h.join().expect("scenario thread");
    }

    let stalled = outcome.rounds_done < cfg.santa_rounds;
    let stats = RunStats::collect(
        BackendId::Semaphores,
        &hub,
        std::time::Duration::from_secs_f64(outcome.wall_s),
        stalled,
        stalled,
        0,
    );
    ScenarioRun { stats, events: hub.take_events(), instrument: None }
}
