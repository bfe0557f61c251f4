//! The acceptance gate. One test per release criterion, each finishing
//! with a single `criterion N: PASS` line (shown under `--nocapture`).
//! The tests take a shared lock so wall-clock measurements are never
//! distorted by a sibling criterion running on the same core.

use std::sync::{Mutex, MutexGuard, OnceLock};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use santa_harness::validate::{validate_trace, SessionTotals, TraceShape};
use santa_refine::mutations::{apply_mutation, MUTATIONS};
use santa_refine::{
    apply, apply_branch, bind, branch_active, check_all_steps, check_class_refinement, normalize,
    parse_spec, print_couple, print_gts, replay, space_size, state_space, Arith, Assign, Atom,
    BoundCouple, CmpOp, Command, Couple, DomainDef, Expr, FieldDef, Gts, NamedCommand,
    RefinementMapping, Update, Val, STEP_TRIPLES,
};
use santa_scenario::{run_backend, BackendId, RunStats, ScenarioConfig};

static GATE: Mutex<()> = Mutex::new(());

fn serial() -> MutexGuard<'static, ()> {
    GATE.lock().unwrap_or_else(|e| e.into_inner())
}

fn pass(n: u32, detail: String) {
    println!("criterion {n}: PASS ({detail})");
}

fn population_at(rounds: u64) -> ScenarioConfig {
    ScenarioConfig {
        santa_rounds: rounds,
        reindeer_cycles: Some(rounds / 5),
        ..ScenarioConfig::default()
    }
}

static LARGE_GUARDS: OnceLock<RunStats> = OnceLock::new();

/// The guards backend at ten times the default round count, shared by the
/// two criteria that need it.
fn large_guards() -> &'static RunStats {
    LARGE_GUARDS.get_or_init(|| {
        run_backend(BackendId::Guards, &population_at(100_000), false).unwrap().stats
    })
}

#[test]
fn criterion_1_development_steps_pass_and_seeded_defects_fail() {
    let _g = serial();
    let t0 = Instant::now();

    let steps = check_all_steps().unwrap();
    assert_eq!(steps.len(), 5);
    for s in &steps {
        assert!(s.report.passed(), "step {} ({}) must pass:\n{}", s.step, s.title, s.report);
    }

    assert!(MUTATIONS.len() >= 10, "want at least ten seeded defects");
    for m in MUTATIONS {
        let src = apply_mutation(m);
        let file = parse_spec(&src).expect("mutated source still parses");
        let (abs_name, conc_name, rel_name) = STEP_TRIPLES[m.step];
        let abs = file.system(abs_name).unwrap();
        let conc = file.system(conc_name).unwrap();
        let rel = file.couple(rel_name).unwrap();
        let report = check_class_refinement(abs, conc, rel, &RefinementMapping::Search).unwrap();
        assert!(!report.passed(), "defect `{}` must flip step {} to Fail", m.name, m.step + 1);
        let ce = report.counterexample().expect("a failed check carries a counterexample");
        assert!(
            replay(ce, abs, conc, rel).unwrap(),
            "defect `{}`: counterexample does not replay:\n{ce}",
            m.name
        );
    }

    let wall = t0.elapsed().as_secs_f64();
    assert!(wall < 10.0, "checks took {wall:.2}s, the budget is 10s");
    pass(1, format!(
        "5 steps pass, {} seeded defects fail with replayable counterexamples, {wall:.2}s",
        MUTATIONS.len()
    ));
}

#[test]
fn criterion_2_session_counts_are_exact() {
    let _g = serial();
    for (rounds, cycles, want) in [(10_000u64, 2_000u64, (2_000u64, 8_000u64)), (100, 20, (20, 80))] {
        let cfg = ScenarioConfig {
            santa_rounds: rounds,
            reindeer_cycles: Some(cycles),
            ..ScenarioConfig::default()
        };
        let stats = run_backend(BackendId::Guards, &cfg, false).unwrap().stats;
        assert!(!stats.stalled && !stats.deadlocked, "guards must finish {rounds} rounds");
        assert_eq!(
            (stats.deliveries, stats.help_sessions),
            want,
            "guards at {rounds} rounds with {cycles} cycles each"
        );
    }
    pass(2, "guards counts exactly 2000/8000 at full scale and 20/80 at small scale".into());
}

#[test]
fn criterion_3_backends_agree_and_traces_are_violation_free() {
    let _g = serial();
    let mut walls = Vec::new();
    for rounds in [100u64, 10_000] {
        let cfg = ScenarioConfig {
            santa_rounds: rounds,
            reindeer_cycles: Some(rounds / 5),
            ..ScenarioConfig::default()
        };
        let mut counts: Option<(u64, u64)> = None;
        for backend in BackendId::ALL {
            let run = run_backend(backend, &cfg, true).unwrap();
            assert!(
                !run.stats.stalled && !run.stats.deadlocked,
                "{backend} must finish {rounds} rounds"
            );
            if rounds == 10_000 {
                assert!(
                    run.stats.wall_s < 60.0,
                    "{backend} took {:.1}s at {rounds} rounds, the budget is 60s",
                    run.stats.wall_s
                );
                walls.push(format!("{backend} {:.2}s", run.stats.wall_s));
            }
            let got = (run.stats.deliveries, run.stats.help_sessions);
            match counts {
                None => counts = Some(got),
                Some(expect) => assert_eq!(got, expect, "{backend} disagrees at {rounds} rounds"),
            }
            let shape = TraceShape::new(cfg.barrier_size, cfg.group_size).expecting(SessionTotals {
                deliveries: run.stats.deliveries,
                help_sessions: run.stats.help_sessions,
            });
            let violations = validate_trace(&run.events, &shape).unwrap();
            assert!(violations.is_empty(), "{backend} at {rounds} rounds: {violations:?}");
        }
    }
    pass(3, format!(
        "identical counts and violation-free traces at 100 and 10000 rounds; {}",
        walls.join(", ")
    ));
}

#[test]
fn criterion_4_no_delivery_without_a_full_team() {
    let _g = serial();
    let cfg = ScenarioConfig {
        reindeer_count: 8,
        santa_rounds: 1_000,
        ..ScenarioConfig::default()
    };
    let stats = run_backend(BackendId::Guards, &cfg, false).unwrap().stats;
    assert!(!stats.stalled && !stats.deadlocked, "elves alone must carry 1000 rounds");
    assert_eq!(
        (stats.deliveries, stats.help_sessions),
        (0, 1_000),
        "8 reindeer can never fill a barrier of 9"
    );
    pass(4, "8 of 9 reindeer give exactly 0 deliveries across 1000 all-help rounds".into());
}

#[test]
fn criterion_5_scaling_and_backend_cost_ordering() {
    let _g = serial();
    let g10k = run_backend(BackendId::Guards, &population_at(10_000), false).unwrap().stats;
    assert!(!g10k.stalled && !g10k.deadlocked);
    let g100k = large_guards();
    assert!(!g100k.stalled && !g100k.deadlocked);
    let ratio = g100k.wall_s / g10k.wall_s;
    assert!(
        (5.0..=20.0).contains(&ratio),
        "10x the rounds scaled guards wall time by {ratio:.2}, want [5, 20]"
    );

    let m10k = run_backend(BackendId::Monitor, &population_at(10_000), false).unwrap().stats;
    assert!(!m10k.stalled && !m10k.deadlocked);
    assert!(
        m10k.wall_s > g10k.wall_s,
        "monitor ({:.2}s) should cost more than guards ({:.2}s) at 10000 rounds",
        m10k.wall_s,
        g10k.wall_s
    );
    pass(5, format!(
        "guards 10x ratio {ratio:.2}; monitor {:.2}s > guards {:.2}s at 10000 rounds",
        m10k.wall_s, g10k.wall_s
    ));
}

#[test]
fn criterion_6_runtime_self_checks_and_deadlock_detection() {
    let _g = serial();
    let run = run_backend(BackendId::Guards, &ScenarioConfig::default(), false).unwrap();
    assert!(!run.stats.stalled && !run.stats.deadlocked);
    let inst = run.instrument.expect("the guards backend reports runtime instrumentation");
    assert!(
        inst.exclusion_violations <= 1,
        "per-object exclusion was violated {} times",
        inst.exclusion_violations
    );
    assert_eq!(inst.action_overlap_attempts, 0, "an action instance overlapped itself");

    let wedged = ScenarioConfig {
        reindeer_count: 8,
        elf_count: 0,
        santa_rounds: 50,
        ..ScenarioConfig::default()
    };
    let stats = run_backend(BackendId::Guards, &wedged, false).unwrap().stats;
    assert!(stats.deadlocked, "8 reindeer and no elves must be reported as a deadlock");

    assert!(!large_guards().deadlocked, "the detector must stay quiet on a clean 100000-round run");
    pass(6, format!(
        "exclusion violations {}, overlap attempts 0, detector fires only when wedged",
        inst.exclusion_violations
    ));
}

// The rest of the file is an independent verdict oracle plus a small random
// system generator. Every quantifier in the refinement conditions is a
// literal loop over enumerated state pairs; the checker must agree with it.

fn related_pairs(bound: &BoundCouple, abs: &Gts, conc: &Gts) -> Vec<(Vec<Val>, Vec<Val>)> {
    let mut pairs = Vec::new();
    for x in state_space(abs) {
        for y in state_space(conc) {
            if bound.holds(&x, &y).unwrap() {
                pairs.push((x.clone(), y.clone()));
            }
        }
    }
    pairs
}

fn simulates(
    abs_cmd: &Command,
    abs: &Gts,
    conc_cmd: &Command,
    conc: &Gts,
    bound: &BoundCouple,
    x: &[Val],
    y: &[Val],
) -> bool {
    let Some(conc_step) = apply(conc_cmd, conc, y).unwrap() else {
        return true;
    };
    let Some(abs_step) = apply(abs_cmd, abs, x).unwrap() else {
        return false;
    };
    abs_step.emits == conc_step.emits && bound.holds(&abs_step.next, &conc_step.next).unwrap()
}

fn oracle_verdict(abs: &Gts, conc: &Gts, couple: &Couple) -> bool {
    let bound = bind(couple, abs, conc).unwrap();
    let pairs = related_pairs(&bound, abs, conc);

    if !bound.holds(&abs.init(), &conc.init()).unwrap() {
        return false;
    }

    for m in &conc.methods {
        match abs.method(&m.name) {
            Some(abs_cmd) => {
                for (x, y) in &pairs {
                    if !simulates(abs_cmd, abs, &m.cmd, conc, &bound, x, y) {
                        return false;
                    }
                }
            }
            None => {
                for branch in normalize(&m.cmd) {
                    let on_branch: Vec<_> = pairs
                        .iter()
                        .filter(|(_, y)| branch_active(&m.cmd, &branch, conc, y).unwrap())
                        .collect();
                    let stutters = on_branch.iter().all(|(x, y)| {
                        let next = apply_branch(&branch, conc, y).unwrap();
                        branch.emits.is_empty() && bound.holds(x, &next).unwrap()
                    });
                    if stutters {
                        continue;
                    }
                    let some_action = abs.actions.iter().any(|a| {
                        on_branch.iter().all(|(x, y)| {
                            let next = apply_branch(&branch, conc, y).unwrap();
                            match apply(a, abs, x).unwrap() {
                                Some(abs_step) => {
                                    abs_step.emits == branch.emits
                                        && bound.holds(&abs_step.next, &next).unwrap()
                                }
                                None => false,
                            }
                        })
                    });
                    if !some_action {
                        return false;
                    }
                }
            }
        }
    }

    for conc_action in &conc.actions {
        let enabled: Vec<_> = pairs
            .iter()
            .filter(|(_, y)| apply(conc_action, conc, y).unwrap().is_some())
            .collect();
        if enabled.is_empty() {
            continue;
        }
        let some_action = abs.actions.iter().any(|a| {
            enabled.iter().all(|(x, y)| simulates(a, abs, conc_action, conc, &bound, x, y))
        });
        if !some_action {
            return false;
        }
    }
    true
}

struct Layout {
    enum_names: Vec<String>,
    counter: Option<i64>,
}

fn gen_layout(rng: &mut ChaCha8Rng) -> Layout {
    let pool = ["P", "Q", "R"];
    let n = rng.gen_range(2..=3);
    let counter = if rng.gen_bool(0.6) { Some(rng.gen_range(1..=2)) } else { None };
    Layout { enum_names: pool[..n].iter().map(|s| s.to_string()).collect(), counter }
}

fn gen_fields(rng: &mut ChaCha8Rng, layout: &Layout) -> Vec<FieldDef> {
    let mut fields = vec![FieldDef {
        name: "s".to_string(),
        domain: DomainDef::Enum(layout.enum_names.clone()),
        init: Val::Sym(rng.gen_range(0..layout.enum_names.len() as u16)),
    }];
    if let Some(hi) = layout.counter {
        fields.push(FieldDef {
            name: "c".to_string(),
            domain: DomainDef::Range(0, hi),
            init: Val::Int(rng.gen_range(0..=hi)),
        });
    }
    fields
}

fn gen_enum_cmp(rng: &mut ChaCha8Rng, layout: &Layout) -> Expr {
    let lit = layout.enum_names[rng.gen_range(0..layout.enum_names.len())].clone();
    Expr::Cmp(CmpOp::Eq, Atom::Ident("s".to_string()), Atom::Ident(lit))
}

fn gen_guard(rng: &mut ChaCha8Rng, layout: &Layout) -> Expr {
    match rng.gen_range(0..4) {
        0 => Expr::Const(true),
        1 => gen_enum_cmp(rng, layout),
        2 if layout.counter.is_some() => Expr::Cmp(
            CmpOp::Le,
            Atom::Ident("c".to_string()),
            Atom::Int(rng.gen_range(0..=layout.counter.unwrap())),
        ),
        _ => Expr::And(Box::new(gen_enum_cmp(rng, layout)), Box::new(gen_enum_cmp(rng, layout))),
    }
}

fn gen_command(rng: &mut ChaCha8Rng, layout: &Layout) -> Command {
    let mut assigns = vec![Assign {
        field: "s".to_string(),
        rhs: Arith::Ident(layout.enum_names[rng.gen_range(0..layout.enum_names.len())].clone()),
    }];
    if let Some(hi) = layout.counter {
        if rng.gen_bool(0.7) {
            let rhs = match rng.gen_range(0..3) {
                0 => Arith::Int(rng.gen_range(0..=hi)),
                1 => Arith::Add(Box::new(Arith::Ident("c".to_string())), Box::new(Arith::Int(1))),
                _ => Arith::Sub(Box::new(Arith::Ident("c".to_string())), Box::new(Arith::Int(1))),
            };
            assigns.push(Assign { field: "c".to_string(), rhs });
        }
    }
    let emits = if rng.gen_bool(0.35) {
        vec![if rng.gen_bool(0.5) { "evt.a" } else { "evt.b" }.to_string()]
    } else {
        Vec::new()
    };
    Command { guard: gen_guard(rng, layout), update: Update::Leaf { assigns, emits } }
}

fn gen_system(rng: &mut ChaCha8Rng, name: &str, layout: &Layout, method_names: &[&str]) -> Gts {
    Gts {
        name: name.to_string(),
        fields: gen_fields(rng, layout),
        methods: method_names
            .iter()
            .map(|m| NamedCommand { name: m.to_string(), cmd: gen_command(rng, layout) })
            .collect(),
        actions: (0..rng.gen_range(1..=2)).map(|_| gen_command(rng, layout)).collect(),
    }
}

fn param_names(prefix: &str, layout: &Layout) -> Vec<String> {
    let mut names = vec![format!("{prefix}0")];
    if layout.counter.is_some() {
        names.push(format!("{prefix}1"));
    }
    names
}

fn gen_relation_expr(rng: &mut ChaCha8Rng, layout: &Layout) -> Expr {
    let clause = |rng: &mut ChaCha8Rng| -> Expr {
        match rng.gen_range(0..5) {
            0 => Expr::Cmp(CmpOp::Eq, Atom::Ident("x0".into()), Atom::Ident("y0".into())),
            1 => Expr::Cmp(
                CmpOp::Eq,
                Atom::Ident("x0".into()),
                Atom::Ident(layout.enum_names[rng.gen_range(0..layout.enum_names.len())].clone()),
            ),
            2 => Expr::Cmp(
                CmpOp::Eq,
                Atom::Ident("y0".into()),
                Atom::Ident(layout.enum_names[rng.gen_range(0..layout.enum_names.len())].clone()),
            ),
            3 if layout.counter.is_some() => {
                Expr::Cmp(CmpOp::Eq, Atom::Ident("x1".into()), Atom::Ident("y1".into()))
            }
            4 if layout.counter.is_some() => Expr::Cmp(
                CmpOp::Le,
                Atom::Ident("y1".into()),
                Atom::Int(rng.gen_range(0..=layout.counter.unwrap())),
            ),
            _ => Expr::Const(true),
        }
    };
    let mut expr = clause(rng);
    for _ in 0..rng.gen_range(0..=2) {
        let next = clause(rng);
        expr = if rng.gen_bool(0.7) {
            Expr::And(Box::new(expr), Box::new(next))
        } else {
            Expr::Or(Box::new(expr), Box::new(next))
        };
    }
    expr
}

fn identity_expr(layout: &Layout) -> Expr {
    let first = Expr::Cmp(CmpOp::Eq, Atom::Ident("x0".into()), Atom::Ident("y0".into()));
    if layout.counter.is_some() {
        Expr::And(
            Box::new(first),
            Box::new(Expr::Cmp(CmpOp::Eq, Atom::Ident("x1".into()), Atom::Ident("y1".into()))),
        )
    } else {
        first
    }
}

fn gen_pair(seed: u64) -> (Gts, Gts, Couple) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let layout = gen_layout(&mut rng);
    let abs_methods: Vec<&str> = if rng.gen_bool(0.5) { vec!["m0"] } else { vec![] };
    let abs = gen_system(&mut rng, "Abs", &layout, &abs_methods);

    if rng.gen_bool(0.35) {
        let mut conc = abs.clone();
        conc.name = "Conc".to_string();
        let couple = Couple {
            name: "R".to_string(),
            abs_params: param_names("x", &layout),
            conc_params: param_names("y", &layout),
            expr: identity_expr(&layout),
        };
        return (abs, conc, couple);
    }

    let mut conc_methods = abs_methods.clone();
    if rng.gen_bool(0.5) {
        conc_methods.push("n0");
    }
    let conc = gen_system(&mut rng, "Conc", &layout, &conc_methods);
    let couple = Couple {
        name: "R".to_string(),
        abs_params: param_names("x", &layout),
        conc_params: param_names("y", &layout),
        expr: gen_relation_expr(&mut rng, &layout),
    };
    (abs, conc, couple)
}

#[test]
fn criterion_7_checker_matches_a_brute_force_oracle() {
    let _g = serial();
    let seeds = 1_000..1_024u64;
    let total = seeds.end - seeds.start;
    let (mut passes, mut fails) = (0u32, 0u32);
    for seed in seeds {
        let (abs, conc, couple) = gen_pair(seed);
        assert!(space_size(&abs) * space_size(&conc) <= 10_000, "pair budget exceeded");
        let expected = oracle_verdict(&abs, &conc, &couple);
        let got = check_class_refinement(&abs, &conc, &couple, &RefinementMapping::Search)
            .unwrap()
            .passed();
        assert_eq!(
            got, expected,
            "seed {seed} disagrees: checker says {got}, oracle says {expected}\n\
             abs:\n{}\nconc:\n{}\nrelation: {}",
            print_gts(&abs),
            print_gts(&conc),
            print_couple(&couple),
        );
        if expected {
            passes += 1;
        } else {
            fails += 1;
        }
    }
    assert!(passes >= 3 && fails >= 3, "want a mix of verdicts, got {passes}/{fails}");
    pass(7, format!(
        "checker matches the oracle on {total} random systems ({passes} pass, {fails} fail)"
    ));
}
