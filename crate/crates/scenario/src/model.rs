//! The final class system (Santa, Sleigh, Reindeer, Shop, Elf) as runtime
//! descriptors, plus construction of a wired object population.
//!
//! Phase events are emitted inside the segment that completes the guarded
//! call, attributed through the activation tag, so each object's event stream
//! is serialized by that object's own exclusion. Session events are emitted
//! from Santa's segments: the wakeup decision and session start inside the
//! action that leaves `Sleeping`, the session end inside `pull` and inside
//! the final `consult`.

use std::sync::Arc;

use santa_runtime::{
    Body, ClassBuilder, ClassDescriptor, ObjectId, RuntimeError, Sym, System,
};

use crate::config::ScenarioConfig;
use crate::trace::{Actor, EventHub, EventKind, SessionKind};

use santa_runtime::FieldId;

pub const SANTA_S: FieldId = FieldId(0);
pub const SANTA_B: FieldId = FieldId(1);
pub const SANTA_P: FieldId = FieldId(2);

pub const SLEEPING: Sym = 0;
pub const HARNESSING: Sym = 1;
pub const RIDING: Sym = 2;
pub const WELCOMING: Sym = 3;
pub const CONSULTING: Sym = 4;

pub const SLEIGH_S: FieldId = FieldId(0);
pub const SLEIGH_C: FieldId = FieldId(1);

pub const SL_BACK: Sym = 0;
pub const SL_HARNESSING: Sym = 1;
pub const SL_PULLING: Sym = 2;

pub const SHOP_S: FieldId = FieldId(0);
pub const SHOP_C: FieldId = FieldId(1);

pub const SH_PUZZLED: Sym = 0;
pub const SH_ENTERING: Sym = 1;
pub const SH_CONSULTING: Sym = 2;

const CYCLES: FieldId = FieldId(0);

pub fn santa_class(hub: Arc<EventHub>, group: i64) -> ClassDescriptor {
    let on_pull = hub.clone();
    let on_consult = hub.clone();
    let on_deliver = hub.clone();
    let on_help = hub;
    ClassBuilder::new("Santa")
        .field_enum("s", &["Sleeping", "Harnessing", "Riding", "Welcoming", "Consulting"], "Sleeping")
        .field_bool("b", false)
        .field_int("p", 0, group, 0)
        .method("back", Body::unguarded().seg(|ctx| ctx.set_bool(SANTA_B, true)))
        .method(
            "harness",
            Body::when(|f| f.sym(SANTA_S) == HARNESSING).seg(|ctx| ctx.set_sym(SANTA_S, RIDING)),
        )
        .method(
            "pull",
            Body::when(|f| f.sym(SANTA_S) == RIDING).seg(move |ctx| {
                ctx.set_sym(SANTA_S, SLEEPING)?;
                ctx.set_bool(SANTA_B, false)?;
                on_pull.session_end(SessionKind::Delivery);
                Ok(())
            }),
        )
        .method("puzzled", Body::unguarded().seg(move |ctx| ctx.set_int(SANTA_P, group)))
        .method(
            "enter",
            Body::when(|f| f.sym(SANTA_S) == WELCOMING).seg(|ctx| ctx.set_sym(SANTA_S, CONSULTING)),
        )
        .method(
            "consult",
            Body::when(|f| f.sym(SANTA_S) == CONSULTING).seg(move |ctx| {
                let p = ctx.int(SANTA_P) - 1;
                ctx.set_int(SANTA_P, p)?;
                if p > 0 {
                    ctx.set_sym(SANTA_S, WELCOMING)
                } else {
                    ctx.set_sym(SANTA_S, SLEEPING)?;
                    on_consult.session_end(SessionKind::Help);
                    Ok(())
                }
            }),
        )
        .action(
            "deliver",
            Body::when(|f| f.sym(SANTA_S) == SLEEPING && f.bool_(SANTA_B)).seg(move |ctx| {
                on_deliver.decision(true, ctx.int(SANTA_P) == group);
                on_deliver.session_start(SessionKind::Delivery);
                ctx.set_sym(SANTA_S, HARNESSING)
            }),
        )
        .action(
            "help",
            Body::when(move |f| {
                f.sym(SANTA_S) == SLEEPING && f.int(SANTA_P) == group && !f.bool_(SANTA_B)
            })
            .seg(move |ctx| {
                on_help.decision(false, true);
                on_help.session_start(SessionKind::Help);
                ctx.set_sym(SANTA_S, WELCOMING)
            }),
        )
        .build()
        .expect("Santa descriptor is well formed")
}

pub fn sleigh_class(hub: Arc<EventHub>, barrier: i64) -> ClassDescriptor {
    let countdown = |hub: Arc<EventHub>, kind: EventKind, next: Sym| {
        move |ctx: &mut santa_runtime::SegmentCtx<'_>| {
            hub.phase(Actor::Reindeer(ctx.tag() as u32), kind);
            let c = ctx.int(SLEIGH_C) - 1;
            if c == 0 {
                ctx.set_sym(SLEIGH_S, next)?;
                ctx.set_int(SLEIGH_C, barrier)?;
                ctx.fire_call()
            } else {
                ctx.set_int(SLEIGH_C, c)
            }
        }
    };
    ClassBuilder::new("Sleigh")
        .param("st", "Santa")
        .field_enum("s", &["Back", "Harnessing", "Pulling"], "Back")
        .field_int("c", 0, barrier, barrier)
        .method(
            "back",
            Body::when(|f| f.sym(SLEIGH_S) == SL_BACK).seg_call(
                countdown(hub.clone(), EventKind::Back, SL_HARNESSING),
                "st",
                "back",
            ),
        )
        .method(
            "harness",
            Body::when(|f| f.sym(SLEIGH_S) == SL_HARNESSING).seg_call(
                countdown(hub.clone(), EventKind::Harness, SL_PULLING),
                "st",
                "harness",
            ),
        )
        .method(
            "pull",
            Body::when(|f| f.sym(SLEIGH_S) == SL_PULLING).seg_call(
                countdown(hub, EventKind::Pull, SL_BACK),
                "st",
                "pull",
            ),
        )
        .build()
        .expect("Sleigh descriptor is well formed")
}

pub fn shop_class(hub: Arc<EventHub>, group: i64) -> ClassDescriptor {
    let on_puzzled = hub.clone();
    let on_enter = hub.clone();
    let on_consult = hub;
    ClassBuilder::new("Shop")
        .param("st", "Santa")
        .field_enum("s", &["Puzzled", "Entering", "Consulting"], "Puzzled")
        .field_int("c", 0, group, 0)
        .method(
            "puzzled",
            Body::when(|f| f.sym(SHOP_S) == SH_PUZZLED).seg_call(
                move |ctx| {
                    on_puzzled.phase(Actor::Elf(ctx.tag() as u32), EventKind::Puzzled);
                    let c = ctx.int(SHOP_C) + 1;
                    ctx.set_int(SHOP_C, c)?;
                    if c == group {
                        ctx.set_sym(SHOP_S, SH_ENTERING)?;
                        ctx.fire_call()?;
                    }
                    Ok(())
                },
                "st",
                "puzzled",
            ),
        )
        .method(
            "enter",
            Body::when(|f| f.sym(SHOP_S) == SH_ENTERING).seg_call(
                move |ctx| {
                    on_enter.phase(Actor::Elf(ctx.tag() as u32), EventKind::Enter);
                    ctx.set_sym(SHOP_S, SH_CONSULTING)?;
                    ctx.fire_call()
                },
                "st",
                "enter",
            ),
        )
        .method(
            "consult",
            Body::when(|f| f.sym(SHOP_S) == SH_CONSULTING).seg_call(
                move |ctx| {
                    on_consult.phase(Actor::Elf(ctx.tag() as u32), EventKind::Consult);
                    let c = ctx.int(SHOP_C) - 1;
                    ctx.set_int(SHOP_C, c)?;
                    ctx.set_sym(SHOP_S, if c > 0 { SH_ENTERING } else { SH_PUZZLED })?;
                    ctx.fire_call()
                },
                "st",
                "consult",
            ),
        )
        .build()
        .expect("Shop descriptor is well formed")
}

/// Retirement is a plain counter: unbounded actors start at -1 and never
/// reach zero, bounded ones count down once per started cycle.
fn cycling_class(name: &str, param: &str, target: &str, methods: [&str; 3], cycles: Option<u64>) -> ClassDescriptor {
    let init = cycles.map(|c| c as i64).unwrap_or(-1);
    ClassBuilder::new(name)
        .param(param, target)
        .field_int_free("n", init)
        .action(
            "cycle",
            Body::when(|f| f.int(CYCLES) != 0)
                .seg_call(
                    |ctx| {
                        let n = ctx.int(CYCLES);
                        if n > 0 {
                            ctx.set_int(CYCLES, n - 1)?;
                        }
                        ctx.fire_call()
                    },
                    param,
                    methods[0],
                )
                .call(param, methods[1])
                .call(param, methods[2]),
        )
        .build()
        .expect("cycling actor descriptor is well formed")
}

pub fn reindeer_class(cycles: Option<u64>) -> ClassDescriptor {
    cycling_class("Reindeer", "sl", "Sleigh", ["back", "harness", "pull"], cycles)
}

pub fn elf_class(cycles: Option<u64>) -> ClassDescriptor {
    cycling_class("Elf", "sh", "Shop", ["puzzled", "enter", "consult"], cycles)
}

pub struct ScenarioObjects {
    pub santa: ObjectId,
    pub sleigh: ObjectId,
    pub shop: ObjectId,
    pub reindeer: Vec<ObjectId>,
    pub elves: Vec<ObjectId>,
}

impl ScenarioObjects {
    pub fn total(&self) -> usize {
        3 + self.reindeer.len() + self.elves.len()
    }
}

/// Registers the five classes on `sys` and wires one Santa, one Sleigh, one
/// Shop, and the configured actor populations. Reindeer and elf tags are
/// their ids, so phase events can name the caller.
pub fn build_scenario(
    sys: &System,
    cfg: &ScenarioConfig,
    hub: &Arc<EventHub>,
) -> Result<ScenarioObjects, RuntimeError> {
    let santa_cls = sys.register(santa_class(hub.clone(), cfg.group_size as i64))?;
    let sleigh_cls = sys.register(sleigh_class(hub.clone(), cfg.barrier_size as i64))?;
    let shop_cls = sys.register(shop_class(hub.clone(), cfg.group_size as i64))?;
    let reindeer_cls = sys.register(reindeer_class(cfg.reindeer_cycles))?;
    let elf_cls = sys.register(elf_class(cfg.elf_cycles))?;

    let santa = sys.create(santa_cls, &[])?;
    let sleigh = sys.create(sleigh_cls, &[santa])?;
    let shop = sys.create(shop_cls, &[santa])?;
    let reindeer = (0..cfg.reindeer_count)
        .map(|i| sys.create_tagged(reindeer_cls, &[sleigh], i as u64))
        .collect::<Result<Vec<_>, _>>()?;
    let elves = (0..cfg.elf_count)
        .map(|j| sys.create_tagged(elf_cls, &[shop], j as u64))
        .collect::<Result<Vec<_>, _>>()?;

    Ok(ScenarioObjects { santa, sleigh, shop, reindeer, elves })
}
