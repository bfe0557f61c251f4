//! Single-monitor driver: one mutex, one condvar, and a notify-everyone
//! discipline after every state change. The wasteful wakeups are the point;
//! the run reports how many broadcasts it issued so the cost is observable
//! next to the targeted-wakeup backends.
//!
//! Reindeer progress is a six-phase cycle (Relaxing, Back, Harnessing,
//! Harnessed, Pulling, Done) with a shared countdown gating each collective
//! step; elves run the analogous six-phase cycle with a countdown only on
//! assembly, since entering and consulting are one elf at a time.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::{Arc, Condvar, Mutex};
use std::thread;
use std::time::Instant;

use crate::backends::{Budget, ScenarioRun, WATCHDOG_POLL, WATCHDOG_STILL_LIMIT};
use crate::config::{BackendId, ScenarioConfig};
use crate::stats::RunStats;
use crate::trace::{Actor, EventHub, EventKind, SessionKind};

#[derive(Clone, Copy, PartialEq, Eq)]
enum RPhase {
    Relaxing,
    Back,
    Harnessing,
    Harnessed,
    Pulling,
    Done,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum EPhase {
    Working,
    Puzzled,
    Entering,
    Entered,
    Consulting,
    Enlightened,
}

struct MState {
    r: RPhase,
    e: EPhase,
    rc: u64,
    ec: u64,
    stop: bool,
}

struct Shared {
    st: Mutex<MState>,
    cv: Condvar,
    /// Notify-all calls issued by monitor bodies.
    broadcasts: AtomicU64,
}

impl Shared {
    fn new(barrier: u64, group: u64) -> Self {
        Shared {
            st: Mutex::new(MState {
                r: RPhase::Relaxing,
                e: EPhase::Working,
                rc: barrier,
                ec: group,
                stop: false,
            }),
            cv: Condvar::new(),
            broadcasts: AtomicU64::new(0),
        }
    }

    /// Waits for `pred`, runs `act` under the lock, then wakes everyone.
    /// Returns None once the shop has been halted.
    fn guarded<T>(&self, pred: impl Fn(&MState) -> bool, act: impl FnOnce(&mut MState) -> T) -> Option<T> {
        let mut st = self.st.lock().unwrap();
        loop {
            if st.stop {
                return None;
            }
            if pred(&st) {
                break;
            }
            st = self.cv.wait(st).unwrap();
        }
        let out = act(&mut st);
        drop(st);
        self.broadcasts.fetch_add(1, Ordering::Relaxed);
        self.cv.notify_all();
        Some(out)
    }

    fn halt(&self) {
        let mut st = self.st.lock().unwrap();
        st.stop = true;
        drop(st);
        self.cv.notify_all();
    }
}

pub(crate) fn run(cfg: &ScenarioConfig, record: bool) -> ScenarioRun {
    let hub = Arc::new(EventHub::new(cfg, record));
    let shared = Arc::new(Shared::new(cfg.barrier_size as u64, cfg.group_size as u64));
    let done = Arc::new(AtomicBool::new(false));
    let start = Instant::now();

    let mut handles = Vec::new();

    let santa = {
        let hub = hub.clone();
        let shared = shared.clone();
        let rounds = cfg.santa_rounds;
        let group = cfg.group_size as u64;
        thread::spawn(move || {
            let mut rounds_done = 0u64;
            let mut wedged = false;
            'rounds: for _ in 0..rounds {
                let deliver = match shared.guarded(
                    |st| st.r == RPhase::Back || st.e == EPhase::Puzzled,
                    |st| {
                        let deliver = st.r == RPhase::Back;
                        hub.decision(deliver, st.e == EPhase::Puzzled);
                        if deliver {
                            hub.session_start(SessionKind::Delivery);
                            st.r = RPhase::Harnessing;
                        } else {
                            hub.session_start(SessionKind::Help);
                            st.e = EPhase::Entering;
                        }
                        deliver
                    },
                ) {
                    Some(d) => d,
                    None => {
                        wedged = true;
                        break 'rounds;
                    }
                };
                if deliver {
                    let hitched = shared
                        .guarded(|st| st.r == RPhase::Harnessed, |st| st.r = RPhase::Pulling)
                        .is_some()
                        && shared
                            .guarded(|st| st.r == RPhase::Done, |st| {
                                st.r = RPhase::Relaxing;
                                hub.session_end(SessionKind::Delivery);
                            })
                            .is_some();
                    if !hitched {
                        wedged = true;
                        break 'rounds;
                    }
                } else {
                    for _ in 0..group {
                        let served = shared
                            .guarded(|st| st.e == EPhase::Entered, |st| st.e = EPhase::Consulting)
                            .is_some()
                            && shared
                                .guarded(|st| st.e == EPhase::Enlightened, |st| {
                                    st.ec -= 1;
                                    if st.ec == 0 {
                                        st.e = EPhase::Working;
                                        st.ec = group;
                                        hub.session_end(SessionKind::Help);
                                    } else {
                                        st.e = EPhase::Entering;
                                    }
                                })
                                .is_some();
                        if !served {
                            wedged = true;
                            break 'rounds;
                        }
                    }
                }
                rounds_done += 1;
            }
            (rounds_done, start.elapsed().as_secs_f64(), wedged)
        })
    };

    for i in 0..cfg.reindeer_count {
        let hub = hub.clone();
        let shared = shared.clone();
        let barrier = cfg.barrier_size as u64;
        let mut budget = Budget::new(cfg.reindeer_cycles);
        handles.push(thread::spawn(move || {
            let me = Actor::Reindeer(i as u32);
            while budget.next() {
                let ok = shared
                    .guarded(|st| st.r == RPhase::Relaxing, |st| {
                        hub.phase(me, EventKind::Back);
                        st.rc -= 1;
                        if st.rc == 0 {
                            st.r = RPhase::Back;
                            st.rc = barrier;
                        }
                    })
                    .is_some()
                    && shared
                        .guarded(|st| st.r == RPhase::Harnessing, |st| {
                            hub.phase(me, EventKind::Harness);
                            st.rc -= 1;
                            if st.rc == 0 {
                                st.r = RPhase::Harnessed;
                                st.rc = barrier;
                            }
                        })
                        .is_some()
                    && shared
                        .guarded(|st| st.r == RPhase::Pulling, |st| {
                            hub.phase(me, EventKind::Pull);
                            st.rc -= 1;
                            if st.rc == 0 {
                                st.r = RPhase::Done;
                                st.rc = barrier;
                            }
                        })
                        .is_some();
                if !ok {
                    return;
                }
            }
        }));
    }

    for j in 0..cfg.elf_count {
        let hub = hub.clone();
        let shared = shared.clone();
        let group = cfg.group_size as u64;
        let mut budget = Budget::new(cfg.elf_cycles);
        handles.push(thread::spawn(move || {
            let me = Actor::Elf(j as u32);
            while budget.next() {
                let ok = shared
                    .guarded(|st| st.e == EPhase::Working, |st| {
                        hub.phase(me, EventKind::Puzzled);
                        st.ec -= 1;
                        if st.ec == 0 {
                            st.e = EPhase::Puzzled;
                            st.ec = group;
                        }
                    })
                    .is_some()
                    && shared
                        .guarded(|st| st.e == EPhase::Entering, |st| {
                            hub.phase(me, EventKind::Enter);
                            st.e = EPhase::Entered;
                        })
                        .is_some()
                    && shared
                        .guarded(|st| st.e == EPhase::Consulting, |st| {
                            hub.phase(me, EventKind::Consult);
                            st.e = EPhase::Enlightened;
                        })
                        .is_some();
                if !ok {
                    return;
                }
            }
        }));
    }

    {
        let hub = hub.clone();
        let shared = shared.clone();
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
                        shared.halt();
                        return;
                    }
                } else {
                    last = now;
                    still = 0;
                }
            }
        }));
    }

    let (rounds_done, wall_s, wedged) = santa.join().expect("santa thread");
    done.store(true, Ordering::Release);
    shared.halt();
    for h in handles {
        h.join().expect("scenario thread");
    }

    let stalled = rounds_done < cfg.santa_rounds;
    let stats = RunStats::collect(
        BackendId::Monitor,
        &hub,
        std::time::Duration::from_secs_f64(wall_s),
        stalled,
        wedged,
        shared.broadcasts.load(Ordering::Relaxed),
    );
    ScenarioRun { stats, events: hub.take_events(), instrument: None }
}
