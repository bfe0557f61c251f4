use std::collections::VecDeque;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::{Arc, Condvar, Mutex, RwLock};
use std::thread;
use std::time::{Duration, Instant};

use crate::descriptor::{Body, ClassDescriptor, SegmentCtx};
use crate::error::RuntimeError;
use crate::instrument::{EntryGauge, Instrument, InstrumentSnapshot};
use crate::value::{Fields, Value};

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct ObjectId(pub u32);

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct ClassId(pub u32);

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum BodyId {
    Method(usize),
    Action(usize),
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum WakeupPolicy {
    Fifo,
    Lifo,
}

#[derive(Clone)]
pub struct SchedulerConfig {
    pub worker_count: usize,
    pub wakeup_policy: WakeupPolicy,
    pub deadlock_poll_interval: Duration,
    pub sink: Option<Arc<dyn EventSink>>,
}

impl Default for SchedulerConfig {
    fn default() -> Self {
        SchedulerConfig {
            worker_count: 1,
            wakeup_policy: WakeupPolicy::Fifo,
            deadlock_poll_interval: Duration::from_millis(50),
            sink: None,
        }
    }
}

pub type FieldPred = Arc<dyn Fn(&Fields) -> bool + Send + Sync>;

#[derive(Clone)]
pub enum StopCondition {
    /// Run until `request_stop`; quiescence and deadlock do not end the run.
    Never,
    /// End the run when nothing is running, queued, or suspended.
    Quiescence,
    /// End after this many completed action executions across the system.
    ActionCount(u64),
    /// End after the predicate over the object's fields has risen from false
    /// to true this many times, evaluated at the object's segment boundaries.
    FieldEdge { object: ObjectId, pred: FieldPred, rises: u64 },
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum RunOutcome {
    /// The stop condition (or an explicit stop request) was met.
    Stopped,
    /// Nothing left to run and nothing suspended.
    Quiescent,
    /// Nothing can run but suspended callers or a suspended action remain.
    Deadlocked,
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub outcome: RunOutcome,
    pub wall: Duration,
    pub action_completions: u64,
    pub instrument: InstrumentSnapshot,
}

/// Lifecycle events for debugging and property checks, stamped with a global
/// sequence number. Appends may come from any worker context.
pub trait EventSink: Send + Sync {
    fn append(&self, event: SinkEvent);
}

#[derive(Clone, Copy, Debug)]
pub struct SinkEvent {
    pub seq: u64,
    pub object: ObjectId,
    pub kind: SinkKind,
}

#[derive(Clone, Copy, Debug)]
pub enum SinkKind {
    SegmentDone { body: BodyId, seg: usize },
    Parked { body: BodyId },
    Woken { body: BodyId },
    ActionDispatched { action: usize },
    ActionDropped { action: usize },
}

#[derive(Clone, Copy, Debug)]
struct ResolvedCall {
    param: usize,
    method: usize,
}

struct RuntimeClass {
    desc: Arc<ClassDescriptor>,
    param_classes: Vec<ClassId>,
    method_calls: Vec<Vec<Option<ResolvedCall>>>,
    action_calls: Vec<Vec<Option<ResolvedCall>>>,
}

impl RuntimeClass {
    fn body(&self, id: BodyId) -> &Body {
        match id {
            BodyId::Method(m) => &self.desc.methods[m].body,
            BodyId::Action(a) => &self.desc.actions[a].body,
        }
    }

    fn call_at(&self, id: BodyId, seg: usize) -> Option<ResolvedCall> {
        match id {
            BodyId::Method(m) => self.method_calls[m][seg],
            BodyId::Action(a) => self.action_calls[a][seg],
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Frame {
    obj: ObjectId,
    body: BodyId,
    seg: usize,
    entered: bool,
}

#[derive(Clone, Copy, Debug)]
enum Root {
    Action { obj: ObjectId },
    External,
}

struct Activation {
    tag: u64,
    root: Root,
    frames: Vec<Frame>,
}

enum SlotPhase {
    Armed,
    Woken,
    Aborted,
}

/// Handshake for suspended external callers: the caller's own thread sleeps
/// here and resumes executing its activation when a completing segment finds
/// its guard true.
struct InlineSlot {
    phase: Mutex<SlotPhase>,
    cv: Condvar,
}

impl InlineSlot {
    fn new() -> Self {
        InlineSlot { phase: Mutex::new(SlotPhase::Armed), cv: Condvar::new() }
    }

    /// Blocks until woken or aborted; auto-rearms on wake.
    fn wait(&self) -> Result<(), RuntimeError> {
        let mut ph = self.phase.lock().unwrap();
        loop {
            match *ph {
                SlotPhase::Armed => ph = self.cv.wait(ph).unwrap(),
                SlotPhase::Woken => {
                    *ph = SlotPhase::Armed;
                    return Ok(());
                }
                SlotPhase::Aborted => return Err(RuntimeError::Interrupted),
            }
        }
    }

    fn wake(&self) {
        *self.phase.lock().unwrap() = SlotPhase::Woken;
        self.cv.notify_one();
    }

    fn abort(&self) {
        *self.phase.lock().unwrap() = SlotPhase::Aborted;
        self.cv.notify_one();
    }
}

enum WaiterKind {
    Task(Box<Activation>),
    External(Arc<InlineSlot>),
}

struct Waiter {
    class: ClassId,
    body: BodyId,
    kind: WaiterKind,
}

struct Watch {
    pred: FieldPred,
    prev: bool,
    remaining: u64,
}

struct ObjState {
    alive: bool,
    fields: Vec<Value>,
    params: Vec<ObjectId>,
    waiters: VecDeque<Waiter>,
    inflight: bool,
    action_live: u32,
    next_action: usize,
    watch: Option<Watch>,
}

struct Object {
    id: ObjectId,
    class: ClassId,
    tag: u64,
    state: Mutex<ObjState>,
    gauge: EntryGauge,
}

struct RunParams {
    policy: WakeupPolicy,
    sink: Option<Arc<dyn EventSink>>,
}

struct Queue {
    ready: VecDeque<Box<Activation>>,
    live: i64,
    gen: u64,
    running: bool,
    stopping: bool,
    stop_reason: Option<RunOutcome>,
    fail: Option<RuntimeError>,
    action_completions: u64,
    action_target: Option<u64>,
}

struct Sched {
    q: Mutex<Queue>,
    worker_cv: Condvar,
    coord_cv: Condvar,
}

struct Inner {
    classes: RwLock<Vec<Arc<RuntimeClass>>>,
    objects: RwLock<Vec<Arc<Object>>>,
    instrument: Instrument,
    sched: Sched,
    run_params: RwLock<RunParams>,
    halt: AtomicBool,
    seq: AtomicU64,
}

enum Exec {
    Done,
    ParkedTask,
    ParkedExternal(Box<Activation>),
    Halted,
    Failed(RuntimeError),
}

pub struct System {
    inner: Arc<Inner>,
}

impl Default for System {
    fn default() -> Self {
        Self::new()
    }
}

impl System {
    pub fn new() -> Self {
        System {
            inner: Arc::new(Inner {
                classes: RwLock::new(Vec::new()),
                objects: RwLock::new(Vec::new()),
                instrument: Instrument::default(),
                sched: Sched {
                    q: Mutex::new(Queue {
                        ready: VecDeque::new(),
                        live: 0,
                        gen: 0,
                        running: false,
                        stopping: false,
                        stop_reason: None,
                        fail: None,
                        action_completions: 0,
                        action_target: None,
                    }),
                    worker_cv: Condvar::new(),
                    coord_cv: Condvar::new(),
                },
                run_params: RwLock::new(RunParams { policy: WakeupPolicy::Fifo, sink: None }),
                halt: AtomicBool::new(false),
                seq: AtomicU64::new(0),
            }),
        }
    }

    pub fn register(&self, desc: ClassDescriptor) -> Result<ClassId, RuntimeError> {
        let mut classes = self.inner.classes.write().unwrap();
        if classes.iter().any(|c| c.desc.name == desc.name) {
            return Err(RuntimeError::DuplicateClass(desc.name));
        }
        let mut param_classes = Vec::with_capacity(desc.params.len());
        for p in &desc.params {
            if p.class == desc.name {
                return Err(RuntimeError::SelfCall {
                    class: desc.name.clone(),
                    param: p.name.clone(),
                });
            }
            let id = classes
                .iter()
                .position(|c| c.desc.name == p.class)
                .ok_or_else(|| RuntimeError::UnknownClass(p.class.clone()))?;
            param_classes.push(ClassId(id as u32));
        }
        let resolve = |body: &Body| -> Result<Vec<Option<ResolvedCall>>, RuntimeError> {
            body.segments
                .iter()
                .map(|seg| {
                    seg.call
                        .as_ref()
                        .map(|call| {
                            let param = desc
                                .param_id(&call.param)
                                .expect("validated by ClassDescriptor::check")
                                .0;
                            let callee = &classes[param_classes[param].0 as usize];
                            let method = callee.desc.method_id(&call.method).ok_or_else(|| {
                                RuntimeError::UnknownMethod {
                                    class: callee.desc.name.clone(),
                                    method: call.method.clone(),
                                }
                            })?;
                            Ok(ResolvedCall { param, method })
                        })
                        .transpose()
                })
                .collect()
        };
        let method_calls =
            desc.methods.iter().map(|m| resolve(&m.body)).collect::<Result<Vec<_>, _>>()?;
        let action_calls =
            desc.actions.iter().map(|a| resolve(&a.body)).collect::<Result<Vec<_>, _>>()?;
        let id = ClassId(classes.len() as u32);
        classes.push(Arc::new(RuntimeClass {
            desc: Arc::new(desc),
            param_classes,
            method_calls,
            action_calls,
        }));
        Ok(id)
    }

    pub fn class_id(&self, name: &str) -> Option<ClassId> {
        let classes = self.inner.classes.read().unwrap();
        classes.iter().position(|c| c.desc.name == name).map(|i| ClassId(i as u32))
    }

    pub fn descriptor(&self, class: ClassId) -> Arc<ClassDescriptor> {
        self.inner.classes.read().unwrap()[class.0 as usize].desc.clone()
    }

    pub fn create(&self, class: ClassId, args: &[ObjectId]) -> Result<ObjectId, RuntimeError> {
        self.create_tagged(class, args, 0)
    }

    /// Create an object carrying an actor tag; segments executed on behalf of
    /// this object's actions see the tag via `SegmentCtx::tag`.
    pub fn create_tagged(
        &self,
        class: ClassId,
        args: &[ObjectId],
        tag: u64,
    ) -> Result<ObjectId, RuntimeError> {
        let rc = self.inner.class(class);
        if args.len() != rc.desc.params.len() {
            return Err(RuntimeError::CtorArity {
                class: rc.desc.name.clone(),
                expected: rc.desc.params.len(),
                got: args.len(),
            });
        }
        for (i, arg) in args.iter().enumerate() {
            let arg_obj = self.inner.object(*arg)?;
            if !arg_obj.state.lock().unwrap().alive {
                return Err(RuntimeError::Destroyed(*arg));
            }
            if arg_obj.class != rc.param_classes[i] {
                return Err(RuntimeError::CtorClassMismatch {
                    class: rc.desc.name.clone(),
                    param: rc.desc.params[i].name.clone(),
                    expected: self.inner.class(rc.param_classes[i]).desc.name.clone(),
                });
            }
        }
        let fields: Vec<Value> = rc.desc.fields.iter().map(|f| f.init).collect();
        let mut objects = self.inner.objects.write().unwrap();
        let id = ObjectId(objects.len() as u32);
        let obj = Arc::new(Object {
            id,
            class,
            tag,
            state: Mutex::new(ObjState {
                alive: true,
                fields,
                params: args.to_vec(),
                waiters: VecDeque::new(),
                inflight: false,
                action_live: 0,
                next_action: 0,
                watch: None,
            }),
            gauge: EntryGauge::default(),
        });
        objects.push(obj.clone());
        drop(objects);
        // Actions are eligible from the moment of creation.
        let mut st = obj.state.lock().unwrap();
        self.inner.try_dispatch(&obj, &mut st);
        Ok(id)
    }

    /// Invoke a method and block the calling context until the guard held and
    /// the body ran to completion.
    pub fn call(&self, target: ObjectId, method: &str) -> Result<(), RuntimeError> {
        let obj = self.inner.object(target)?;
        let rc = self.inner.class(obj.class);
        let m = rc.desc.method_id(method).ok_or_else(|| RuntimeError::UnknownMethod {
            class: rc.desc.name.clone(),
            method: method.into(),
        })?;
        Instrument::bump(&self.inner.instrument.method_calls);
        let slot = Arc::new(InlineSlot::new());
        let mut act = Box::new(Activation {
            tag: obj.tag,
            root: Root::External,
            frames: vec![Frame { obj: target, body: BodyId::Method(m), seg: 0, entered: false }],
        });
        self.inner.live_inc();
        loop {
            match self.inner.exec(act, Some(&slot)) {
                Exec::Done => return Ok(()),
                Exec::ParkedExternal(a) => {
                    slot.wait()?;
                    act = a;
                }
                Exec::Halted => return Err(RuntimeError::Interrupted),
                Exec::Failed(e) => return Err(e),
                Exec::ParkedTask => unreachable!("external activations park via their slot"),
            }
        }
    }

    /// Drive the system until the stop condition (or quiescence/deadlock for
    /// stop conditions other than `Never`) is reached.
    pub fn run(
        &self,
        config: SchedulerConfig,
        stop: StopCondition,
    ) -> Result<RunReport, RuntimeError> {
        if config.worker_count == 0 {
            return Err(RuntimeError::BadConfig("worker_count must be at least 1".into()));
        }
        let started = Instant::now();
        {
            let mut q = self.inner.sched.q.lock().unwrap();
            if q.running {
                return Err(RuntimeError::AlreadyRunning);
            }
            q.running = true;
            q.stopping = false;
            q.stop_reason = None;
            q.fail = None;
            q.action_completions = 0;
            q.action_target = match stop {
                StopCondition::ActionCount(n) => Some(n),
                _ => None,
            };
        }
        self.inner.halt.store(false, Ordering::SeqCst);
        {
            let mut params = self.inner.run_params.write().unwrap();
            params.policy = config.wakeup_policy;
            params.sink = config.sink.clone();
        }
        if let StopCondition::FieldEdge { object, pred, rises } = &stop {
            let obj = self.inner.object(*object)?;
            let mut st = obj.state.lock().unwrap();
            let prev = (pred)(&Fields::new(&st.fields));
            st.watch = Some(Watch { pred: pred.clone(), prev, remaining: (*rises).max(1) });
        }
        // Arm every object whose action guards already hold.
        let objects: Vec<Arc<Object>> = self.inner.objects.read().unwrap().clone();
        for obj in &objects {
            let mut st = obj.state.lock().unwrap();
            self.inner.try_dispatch(obj, &mut st);
        }
        let workers: Vec<_> = (0..config.worker_count)
            .map(|_| {
                let inner = self.inner.clone();
                thread::spawn(move || inner.worker_loop())
            })
            .collect();

        let outcome = self.inner.coordinate(&stop, config.deadlock_poll_interval);

        self.inner.halt.store(true, Ordering::SeqCst);
        {
            let mut q = self.inner.sched.q.lock().unwrap();
            q.stopping = true;
            self.inner.sched.worker_cv.notify_all();
        }
        for w in workers {
            let _ = w.join();
        }
        let completions = self.inner.teardown();
        let fail = {
            let mut q = self.inner.sched.q.lock().unwrap();
            q.running = false;
            q.stopping = false;
            q.fail.take()
        };
        self.inner.halt.store(false, Ordering::SeqCst);
        if let Some(e) = fail {
            return Err(e);
        }
        Ok(RunReport {
            outcome,
            wall: started.elapsed(),
            action_completions: completions,
            instrument: self.inner.instrument.snapshot(),
        })
    }

    /// Ask a running scheduler to stop; the run returns `Stopped`.
    pub fn request_stop(&self) {
        let mut q = self.inner.sched.q.lock().unwrap();
        if q.running && q.stop_reason.is_none() {
            q.stop_reason = Some(RunOutcome::Stopped);
            self.inner.halt.store(true, Ordering::SeqCst);
            self.inner.sched.coord_cv.notify_all();
            self.inner.sched.worker_cv.notify_all();
        }
    }

    /// True iff nothing is executing, no action guard of an idle object
    /// holds, and at least one suspended caller or action exists.
    pub fn detect_deadlock(&self) -> bool {
        {
            let q = self.inner.sched.q.lock().unwrap();
            if q.live > 0 {
                return false;
            }
        }
        let objects: Vec<Arc<Object>> = self.inner.objects.read().unwrap().clone();
        let mut suspended = false;
        for obj in &objects {
            let st = obj.state.lock().unwrap();
            if !st.alive {
                continue;
            }
            if !st.waiters.is_empty() || st.inflight {
                suspended = true;
            }
            if !st.inflight {
                let rc = self.inner.class(obj.class);
                for a in &rc.desc.actions {
                    if (a.body.guard)(&Fields::new(&st.fields)) {
                        return false;
                    }
                }
            }
        }
        suspended
    }

    pub fn read_fields(&self, id: ObjectId) -> Result<Vec<Value>, RuntimeError> {
        let obj = self.inner.object(id)?;
        let st = obj.state.lock().unwrap();
        if !st.alive {
            return Err(RuntimeError::Destroyed(id));
        }
        Ok(st.fields.clone())
    }

    pub fn read_field(&self, id: ObjectId, name: &str) -> Result<Value, RuntimeError> {
        let obj = self.inner.object(id)?;
        let rc = self.inner.class(obj.class);
        let fid = rc.desc.field_id(name).ok_or_else(|| RuntimeError::InvalidClass {
            class: rc.desc.name.clone(),
            reason: format!("no field `{name}`"),
        })?;
        let st = obj.state.lock().unwrap();
        if !st.alive {
            return Err(RuntimeError::Destroyed(id));
        }
        Ok(st.fields[fid.0])
    }

    pub fn waiter_count(&self, id: ObjectId) -> Result<usize, RuntimeError> {
        let obj = self.inner.object(id)?;
        let n = obj.state.lock().unwrap().waiters.len();
        Ok(n)
    }

    /// Remove an idle object. Objects with suspended callers or a live action
    /// cannot be destroyed.
    pub fn destroy(&self, id: ObjectId) -> Result<(), RuntimeError> {
        let obj = self.inner.object(id)?;
        let mut st = obj.state.lock().unwrap();
        if !st.alive {
            return Err(RuntimeError::Destroyed(id));
        }
        if !st.waiters.is_empty() || st.inflight || obj.gauge.current() > 0 {
            return Err(RuntimeError::NotIdle(id));
        }
        st.alive = false;
        Ok(())
    }

    pub fn instrument(&self) -> InstrumentSnapshot {
        self.inner.instrument.snapshot()
    }
}

impl Inner {
    fn class(&self, id: ClassId) -> Arc<RuntimeClass> {
        self.classes.read().unwrap()[id.0 as usize].clone()
    }

    fn object(&self, id: ObjectId) -> Result<Arc<Object>, RuntimeError> {
        self.objects
            .read()
            .unwrap()
            .get(id.0 as usize)
            .cloned()
            .ok_or(RuntimeError::Destroyed(id))
    }

    fn emit(&self, object: ObjectId, kind: SinkKind) {
        let params = self.run_params.read().unwrap();
        if let Some(sink) = &params.sink {
            let seq = self.seq.fetch_add(1, Ordering::Relaxed);
            sink.append(SinkEvent { seq, object, kind });
        }
    }

    fn live_inc(&self) {
        let mut q = self.sched.q.lock().unwrap();
        q.live += 1;
        q.gen += 1;
    }

    fn live_dec(&self) {
        let mut q = self.sched.q.lock().unwrap();
        q.live -= 1;
        q.gen += 1;
        if q.live == 0 {
            self.sched.coord_cv.notify_all();
        }
    }

    fn enqueue(&self, act: Box<Activation>) {
        let mut q = self.sched.q.lock().unwrap();
        q.ready.push_back(act);
        q.live += 1;
        q.gen += 1;
        self.sched.worker_cv.notify_one();
    }

    fn record_fail(&self, e: RuntimeError) {
        let mut q = self.sched.q.lock().unwrap();
        if q.fail.is_none() {
            q.fail = Some(e);
        }
        if q.stop_reason.is_none() {
            q.stop_reason = Some(RunOutcome::Stopped);
        }
        self.halt.store(true, Ordering::SeqCst);
        self.sched.coord_cv.notify_all();
        self.sched.worker_cv.notify_all();
    }

    fn worker_loop(self: Arc<Inner>) {
        loop {
            let act = {
                let mut q = self.sched.q.lock().unwrap();
                loop {
                    if q.stopping {
                        return;
                    }
                    if let Some(a) = q.ready.pop_front() {
                        break a;
                    }
                    q = self.sched.worker_cv.wait(q).unwrap();
                }
            };
            match self.exec(act, None) {
                Exec::Done | Exec::ParkedTask | Exec::Halted => {}
                Exec::Failed(e) => self.record_fail(e),
                Exec::ParkedExternal(_) => unreachable!("queued activations have no slot"),
            }
        }
    }

    /// Execute an activation until it completes, parks, or the run halts.
    /// Owns the `live` accounting for every terminal path.
    fn exec(&self, mut act: Box<Activation>, slot: Option<&Arc<InlineSlot>>) -> Exec {
        loop {
            if self.halt.load(Ordering::Relaxed) {
                self.live_dec();
                return Exec::Halted;
            }
            let frame = match act.frames.last() {
                Some(f) => *f,
                None => unreachable!("root completion pops the last frame"),
            };
            let obj = match self.object(frame.obj) {
                Ok(o) => o,
                Err(e) => {
                    self.fail_activation(&act);
                    self.live_dec();
                    return Exec::Failed(e);
                }
            };
            let rc = self.class(obj.class);
            let body = rc.body(frame.body);

            // Body finished: pop the frame, resume the caller or wrap up.
            if frame.entered && frame.seg >= body.segments.len() {
                act.frames.pop();
                if act.frames.is_empty() {
                    match act.root {
                        Root::Action { obj: root_obj } => {
                            let root = self.object(root_obj).expect("action root object");
                            let mut st = root.state.lock().unwrap();
                            st.inflight = false;
                            st.action_live = st.action_live.saturating_sub(1);
                            Instrument::bump(&self.instrument.action_completions);
                            self.try_dispatch(&root, &mut st);
                            drop(st);
                            self.book_action_completion();
                        }
                        Root::External => {}
                    }
                    self.live_dec();
                    return Exec::Done;
                }
                continue;
            }

            let mut st = obj.state.lock().unwrap();
            if !st.alive {
                drop(st);
                self.fail_activation(&act);
                self.live_dec();
                return Exec::Failed(RuntimeError::Destroyed(frame.obj));
            }

            if !frame.entered {
                Instrument::bump(&self.instrument.guard_entry_evals);
                if !(body.guard)(&Fields::new(&st.fields)) {
                    // A dispatched action whose guard no longer holds is
                    // dropped; anything else suspends until a segment of this
                    // object completes and finds the guard true.
                    if matches!(act.root, Root::Action { .. }) && act.frames.len() == 1 {
                        st.inflight = false;
                        st.action_live = st.action_live.saturating_sub(1);
                        Instrument::bump(&self.instrument.action_drops);
                        self.emit(obj.id, SinkKind::ActionDropped {
                            action: match frame.body {
                                BodyId::Action(a) => a,
                                BodyId::Method(_) => unreachable!(),
                            },
                        });
                        self.try_dispatch(&obj, &mut st);
                        drop(st);
                        self.live_dec();
                        return Exec::Done;
                    }
                    // Re-check the halt flag under the object lock: teardown
                    // sets it before sweeping waiters, so a park that slips
                    // past the sweep would never be woken or aborted.
                    if self.halt.load(Ordering::SeqCst) {
                        drop(st);
                        self.fail_activation(&act);
                        self.live_dec();
                        return Exec::Halted;
                    }
                    Instrument::bump(&self.instrument.parks);
                    self.emit(obj.id, SinkKind::Parked { body: frame.body });
                    if let (Root::External, Some(s)) = (&act.root, slot) {
                        st.waiters.push_back(Waiter {
                            class: obj.class,
                            body: frame.body,
                            kind: WaiterKind::External(s.clone()),
                        });
                        drop(st);
                        self.live_dec();
                        return Exec::ParkedExternal(act);
                    }
                    st.waiters.push_back(Waiter {
                        class: obj.class,
                        body: frame.body,
                        kind: WaiterKind::Task(act),
                    });
                    drop(st);
                    self.live_dec();
                    return Exec::ParkedTask;
                }
                act.frames.last_mut().unwrap().entered = true;
            }

            let seg_idx = act.frames.last().unwrap().seg;
            let seg = &body.segments[seg_idx];
            if !obj.gauge.enter() {
                Instrument::bump(&self.instrument.exclusion_violations);
            }
            let mut ctx =
                SegmentCtx::new(&rc.desc, &mut st.fields, seg.call.is_some(), act.tag);
            let result = (seg.run)(&mut ctx);
            let fired = ctx.fired();
            obj.gauge.exit();
            if let Err(e) = result {
                drop(st);
                self.fail_activation(&act);
                self.live_dec();
                return Exec::Failed(e);
            }
            Instrument::bump(&self.instrument.segments);
            act.frames.last_mut().unwrap().seg += 1;

            let next_call = if fired {
                let call = rc
                    .call_at(frame.body, seg_idx)
                    .expect("fire_call is rejected for segments without a call");
                let target = st.params[call.param];
                Some((target, call.method))
            } else {
                None
            };

            self.emit(obj.id, SinkKind::SegmentDone { body: frame.body, seg: seg_idx });
            self.after_segment(&obj, &mut st);
            drop(st);

            if let Some((target, method)) = next_call {
                Instrument::bump(&self.instrument.method_calls);
                act.frames.push(Frame {
                    obj: target,
                    body: BodyId::Method(method),
                    seg: 0,
                    entered: false,
                });
            }
        }
    }

    /// An activation died mid-flight; release its root object's action slot
    /// so the failure is visible as an error, not a phantom suspension.
    fn fail_activation(&self, act: &Activation) {
        if let Root::Action { obj } = act.root {
            if let Ok(root) = self.object(obj) {
                let mut st = root.state.lock().unwrap();
                st.inflight = false;
                st.action_live = st.action_live.saturating_sub(1);
            }
        }
    }

    /// Completion bookkeeping, run under the object's lock after a segment's
    /// updates commit: stop-watch edge counting, at most one waiter wake, and
    /// one action dispatch attempt.
    fn after_segment(&self, obj: &Object, st: &mut ObjState) {
        if let Some(w) = &mut st.watch {
            let now = (w.pred)(&Fields::new(&st.fields));
            if now && !w.prev {
                w.remaining = w.remaining.saturating_sub(1);
                if w.remaining == 0 {
                    st.watch = None;
                    self.signal_stop();
                }
            }
            if let Some(w) = &mut st.watch {
                w.prev = now;
            }
        }

        let policy = self.run_params.read().unwrap().policy;
        let n = st.waiters.len();
        let mut woken: Option<usize> = None;
        for k in 0..n {
            let i = match policy {
                WakeupPolicy::Fifo => k,
                WakeupPolicy::Lifo => n - 1 - k,
            };
            let waiter = &st.waiters[i];
            let rc = self.class(waiter.class);
            let guard = rc.body(waiter.body).guard.clone();
            Instrument::bump(&self.instrument.guard_wake_evals);
            if (guard)(&Fields::new(&st.fields)) {
                woken = Some(i);
                break;
            }
        }
        if let Some(i) = woken {
            let waiter = st.waiters.remove(i).unwrap();
            Instrument::bump(&self.instrument.wakes);
            self.emit(obj.id, SinkKind::Woken { body: waiter.body });
            match waiter.kind {
                WaiterKind::Task(act) => self.enqueue(act),
                WaiterKind::External(slot) => {
                    self.live_inc();
                    slot.wake();
                }
            }
        }

        self.try_dispatch(obj, st);
    }

    fn try_dispatch(&self, obj: &Object, st: &mut ObjState) {
        if !st.alive || st.inflight {
            return;
        }
        let rc = self.class(obj.class);
        let n = rc.desc.actions.len();
        if n == 0 {
            return;
        }
        for k in 0..n {
            let a = (st.next_action + k) % n;
            Instrument::bump(&self.instrument.guard_action_evals);
            if (rc.desc.actions[a].body.guard)(&Fields::new(&st.fields)) {
                st.inflight = true;
                st.action_live += 1;
                if st.action_live > 1 {
                    Instrument::bump(&self.instrument.action_overlap_attempts);
                }
                st.next_action = (a + 1) % n;
                Instrument::bump(&self.instrument.action_dispatches);
                self.emit(obj.id, SinkKind::ActionDispatched { action: a });
                self.enqueue(Box::new(Activation {
                    tag: obj.tag,
                    root: Root::Action { obj: obj.id },
                    frames: vec![Frame {
                        obj: obj.id,
                        body: BodyId::Action(a),
                        seg: 0,
                        entered: false,
                    }],
                }));
                return;
            }
        }
    }

    fn book_action_completion(&self) {
        let mut q = self.sched.q.lock().unwrap();
        q.action_completions += 1;
        if let Some(target) = q.action_target {
            if q.action_completions >= target && q.stop_reason.is_none() {
                q.stop_reason = Some(RunOutcome::Stopped);
                self.halt.store(true, Ordering::SeqCst);
                self.sched.coord_cv.notify_all();
                self.sched.worker_cv.notify_all();
            }
        }
    }

    fn signal_stop(&self) {
        let mut q = self.sched.q.lock().unwrap();
        if q.stop_reason.is_none() {
            q.stop_reason = Some(RunOutcome::Stopped);
        }
        self.halt.store(true, Ordering::SeqCst);
        self.sched.coord_cv.notify_all();
        self.sched.worker_cv.notify_all();
    }

    /// Wait for a stop reason or a stall. A stall with suspended work is a
    /// deadlock; one without is quiescence. `Never` runs ride out both and
    /// end only on an explicit stop request.
    fn coordinate(&self, stop: &StopCondition, poll: Duration) -> RunOutcome {
        let never = matches!(stop, StopCondition::Never);
        let mut q = self.sched.q.lock().unwrap();
        loop {
            if let Some(reason) = q.stop_reason {
                return reason;
            }
            if q.live == 0 && !never {
                let gen = q.gen;
                drop(q);
                let suspended = self.any_suspended();
                q = self.sched.q.lock().unwrap();
                if q.stop_reason.is_some() {
                    continue;
                }
                if q.live == 0 && q.gen == gen {
                    if suspended {
                        return RunOutcome::Deadlocked;
                    }
                    return RunOutcome::Quiescent;
                }
            }
            let (guard, _) = self.sched.coord_cv.wait_timeout(q, poll).unwrap();
            q = guard;
        }
    }

    fn any_suspended(&self) -> bool {
        let objects: Vec<Arc<Object>> = self.objects.read().unwrap().clone();
        objects.iter().any(|obj| {
            let st = obj.state.lock().unwrap();
            st.alive && (!st.waiters.is_empty() || st.inflight)
        })
    }

    /// Drop queued and suspended work after the workers have exited.
    fn teardown(&self) -> u64 {
        let completions = {
            let mut q = self.sched.q.lock().unwrap();
            // In-flight external calls keep their share of `live` and release
            // it themselves when they observe the halt flag.
            q.live -= q.ready.len() as i64;
            q.ready.clear();
            q.gen += 1;
            q.action_completions
        };
        let objects: Vec<Arc<Object>> = self.objects.read().unwrap().clone();
        for obj in &objects {
            let mut st = obj.state.lock().unwrap();
            st.inflight = false;
            st.action_live = 0;
            st.watch = None;
            for waiter in st.waiters.drain(..) {
                if let WaiterKind::External(slot) = waiter.kind {
                    slot.abort();
                }
            }
        }
        completions
    }
}
