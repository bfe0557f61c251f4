//! Execution runtime for systems of guarded concurrent objects.
//!
//! Objects own private fields and expose guarded methods; a caller whose
//! guard is false suspends until a segment of the same object completes and
//! finds the guard true. Objects may also carry autonomous guarded actions,
//! dispatched by the scheduler with at most one in flight per object.
//!
//! Execution is divided into atomic segments: a run of field updates plus at
//! most one outgoing call, placed after the updates commit. Per-object mutual
//! exclusion holds at segment granularity, and guards are re-evaluated only
//! when a segment of the owning object completes.

mod descriptor;
mod error;
mod instrument;
mod system;
mod value;

pub use descriptor::{
    ActionDescriptor, Body, CallSpec, ClassBuilder, ClassDescriptor, FieldDecl, GuardFn,
    MethodDescriptor, ParamDecl, Segment, SegmentCtx, SegmentFn,
};
pub use error::RuntimeError;
pub use instrument::{EntryGauge, Instrument, InstrumentSnapshot};
pub use system::{
    BodyId, ClassId, EventSink, FieldPred, ObjectId, RunOutcome, RunReport, SchedulerConfig,
    SinkEvent, SinkKind, StopCondition, System, WakeupPolicy,
};
pub use value::{Domain, FieldId, Fields, ParamId, Sym, Value};
