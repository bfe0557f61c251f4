//! The five built-in development steps: every condition discharges, and
//! with exactly the expected resolution. Also covers explicit mappings,
//! the standalone command-level checks, and monotonicity under
//! reachability-restricted relations.

use santa_refine::*;

fn steps() -> Vec<StepReport> {
    check_all_steps().expect("fixture steps must check cleanly")
}

fn labels(report: &CheckReport) -> Vec<&str> {
    report.conditions.iter().map(|c| c.label.as_str()).collect()
}

fn resolution<'a>(report: &'a CheckReport, label: &str) -> &'a Resolution {
    report
        .condition(label)
        .unwrap_or_else(|| panic!("no condition {label}"))
        .resolution
        .as_ref()
        .unwrap_or_else(|| panic!("condition {label} has no resolution"))
}

fn cases(pairs: &[(&str, BranchChoice)]) -> Resolution {
    Resolution::Cases(
        pairs
            .iter()
            .map(|(branch, choice)| CaseResolution { branch: branch.to_string(), choice: *choice })
            .collect(),
    )
}

#[test]
fn all_five_steps_pass() {
    let steps = steps();
    assert_eq!(steps.len(), 5);
    for step in &steps {
        assert!(
            step.report.passed(),
            "step {} ({}) failed:\n{}",
            step.step,
            step.title,
            step.report
        );
        for c in &step.report.conditions {
            assert!(c.passed, "step {} condition {}", step.step, c.label);
        }
    }
}

#[test]
fn step_one_discharges_init_and_four_actions() {
    let step = &steps()[0].report;
    assert_eq!(labels(step), ["I", "A1", "A2", "A3", "A4"]);
    assert_eq!(resolution(step, "A1"), &Resolution::Action(0));
    assert_eq!(resolution(step, "A2"), &Resolution::Action(1));
    assert_eq!(resolution(step, "A3"), &Resolution::Action(0));
    assert_eq!(resolution(step, "A4"), &Resolution::Action(1));
}

#[test]
fn step_two_stutters_the_barrier_methods_and_maps_the_actions() {
    let step = &steps()[1].report;
    assert_eq!(labels(step), ["I", "N1", "N2", "N3", "A1", "A2", "A3"]);
    assert_eq!(resolution(step, "N1"), &Resolution::Stutter);
    assert_eq!(resolution(step, "N2"), &Resolution::Stutter);
    assert_eq!(resolution(step, "N3"), &Resolution::Action(1));
    assert_eq!(resolution(step, "A1"), &Resolution::Action(0));
    assert_eq!(resolution(step, "A2"), &Resolution::Action(2));
    assert_eq!(resolution(step, "A3"), &Resolution::Action(3));
}

#[test]
fn step_three_splits_every_method_on_the_counter() {
    let step = &steps()[2].report;
    assert_eq!(labels(step), ["I", "N1", "N2", "N3"]);
    assert_eq!(
        resolution(step, "N1"),
        &cases(&[("c = 1", BranchChoice::Action(0)), ("not (c = 1)", BranchChoice::Stutter)])
    );
    assert_eq!(
        resolution(step, "N2"),
        &cases(&[("c = 1", BranchChoice::Action(1)), ("not (c = 1)", BranchChoice::Stutter)])
    );
    assert_eq!(
        resolution(step, "N3"),
        &cases(&[("c = 1", BranchChoice::Action(2)), ("not (c = 1)", BranchChoice::Stutter)])
    );
}

#[test]
fn step_four_matches_shared_methods_and_splits_consult() {
    let step = &steps()[3].report;
    assert_eq!(labels(step), ["I", "M1", "M2", "M3", "N1", "N2", "N3", "A1", "A2"]);
    for label in ["M1", "M2", "M3"] {
        assert_eq!(resolution(step, label), &Resolution::Matches);
    }
    assert_eq!(resolution(step, "N1"), &Resolution::Stutter);
    assert_eq!(resolution(step, "N2"), &Resolution::Stutter);
    assert_eq!(
        resolution(step, "N3"),
        &cases(&[("p <= 1", BranchChoice::Action(2)), ("not (p <= 1)", BranchChoice::Stutter)])
    );
    assert_eq!(resolution(step, "A1"), &Resolution::Action(0));
    assert_eq!(resolution(step, "A2"), &Resolution::Action(1));
}

#[test]
fn step_five_resolves_the_batched_shop() {
    let step = &steps()[4].report;
    assert_eq!(labels(step), ["I", "N1", "N2", "N3"]);
    assert_eq!(
        resolution(step, "N1"),
        &cases(&[("c = 2", BranchChoice::Action(0)), ("not (c = 2)", BranchChoice::Stutter)])
    );
    assert_eq!(resolution(step, "N2"), &Resolution::Action(1));
    assert_eq!(resolution(step, "N3"), &Resolution::Action(2));
}

#[test]
fn explicit_mapping_verifies_the_searched_witnesses() {
    let file = parse_spec(SANTA_STEPS).unwrap();
    let abs = file.system("Santa1").unwrap();
    let conc = file.system("Santa2").unwrap();
    let rel = file.couple("R2").unwrap();
    let mapping = RefinementMapping::Explicit(ExplicitMapping {
        new_methods: vec![
            ("back".to_string(), NChoice::Stutter),
            ("harness".to_string(), NChoice::Stutter),
            ("pull".to_string(), NChoice::Action(1)),
        ],
        actions: vec![0, 2, 3],
    });
    let report = check_class_refinement(abs, conc, rel, &mapping).unwrap();
    assert!(report.passed(), "{report}");
}

#[test]
fn explicit_mapping_with_a_wrong_pin_fails_replayably() {
    let file = parse_spec(SANTA_STEPS).unwrap();
    let abs = file.system("Santa1").unwrap();
    let conc = file.system("Santa2").unwrap();
    let rel = file.couple("R2").unwrap();
    let mapping = RefinementMapping::Explicit(ExplicitMapping {
        new_methods: vec![
            ("back".to_string(), NChoice::Stutter),
            ("harness".to_string(), NChoice::Stutter),
            ("pull".to_string(), NChoice::Action(0)),
        ],
        actions: vec![0, 2, 3],
    });
    let report = check_class_refinement(abs, conc, rel, &mapping).unwrap();
    assert!(!report.passed());
    assert!(!report.condition("N3").unwrap().passed);
    let ce = report.counterexample().expect("failing report carries a counterexample");
    assert!(replay(ce, abs, conc, rel).unwrap(), "counterexample must replay:\n{ce}");
}

#[test]
fn explicit_mapping_must_cover_every_new_method_and_action() {
    let file = parse_spec(SANTA_STEPS).unwrap();
    let abs = file.system("Santa1").unwrap();
    let conc = file.system("Santa2").unwrap();
    let rel = file.couple("R2").unwrap();

    let missing_method = RefinementMapping::Explicit(ExplicitMapping {
        new_methods: vec![("back".to_string(), NChoice::Stutter)],
        actions: vec![0, 2, 3],
    });
    assert!(matches!(
        check_class_refinement(abs, conc, rel, &missing_method),
        Err(CheckError::BadMapping(_))
    ));

    let short_actions = RefinementMapping::Explicit(ExplicitMapping {
        new_methods: vec![
            ("back".to_string(), NChoice::Stutter),
            ("harness".to_string(), NChoice::Stutter),
            ("pull".to_string(), NChoice::Action(1)),
        ],
        actions: vec![0],
    });
    assert!(matches!(
        check_class_refinement(abs, conc, rel, &short_actions),
        Err(CheckError::BadMapping(_))
    ));
}

#[test]
fn missing_shared_method_is_a_structural_error_not_a_verdict() {
    let src = "
class A
  var s : {P, Q} = P
  method m() :: true -> s := Q

class B
  var s : {P, Q} = P

couple R (sa) (sb) :: sa = sb
";
    let file = parse_spec(src).unwrap();
    let err = check_class_refinement(
        file.system("A").unwrap(),
        file.system("B").unwrap(),
        file.couple("R").unwrap(),
        &RefinementMapping::Search,
    )
    .unwrap_err();
    assert!(matches!(err, CheckError::Structural(_)), "{err}");
}

#[test]
fn guarded_assignment_check_accepts_the_first_step_action() {
    let file = parse_spec(SANTA_STEPS).unwrap();
    let abs = file.system("Santa0").unwrap();
    let conc = file.system("Santa1").unwrap();
    let rel = file.couple("R1").unwrap();
    let report =
        check_guarded_assignment(&abs.actions[0], abs, &conc.actions[0], conc, rel).unwrap();
    assert!(report.passed(), "{report}");
}

#[test]
fn guarded_assignment_check_rejects_a_self_loop_with_a_witness() {
    let file = parse_spec(SANTA_STEPS).unwrap();
    let abs = file.system("Santa0").unwrap();
    let conc = file.system("Santa1").unwrap();
    let rel = file.couple("R1").unwrap();
    let self_loop = Command {
        guard: Expr::Cmp(CmpOp::Eq, Atom::Ident("s".into()), Atom::Ident("Sleeping".into())),
        update: Update::Leaf {
            assigns: vec![Assign { field: "s".into(), rhs: Arith::Ident("Sleeping".into()) }],
            emits: vec![],
        },
    };
    let report = check_guarded_assignment(&abs.actions[0], abs, &self_loop, conc, rel).unwrap();
    assert!(!report.passed());
    let ce = report.counterexample().unwrap();
    assert_eq!(ce.clause, Clause::Relation);
    assert_eq!(ce.abs_state, vec![("s".to_string(), "Sleeping".to_string())]);
    assert_eq!(ce.conc_state, vec![("s".to_string(), "Sleeping".to_string())]);
}

#[test]
fn stutter_check_accepts_flag_setting_and_rejects_emitting_steps() {
    let file = parse_spec(SANTA_STEPS).unwrap();

    let santa1 = file.system("Santa1").unwrap();
    let santa2 = file.system("Santa2").unwrap();
    let r2 = file.couple("R2").unwrap();
    let back = santa2.method("back").unwrap();
    let report = check_stutter(back, santa1, santa2, r2).unwrap();
    assert!(report.passed(), "{report}");

    let sleigh2 = file.system("Sleigh2").unwrap();
    let sleigh3 = file.system("Sleigh3").unwrap();
    let r3 = file.couple("R3").unwrap();
    // The handover branch of the counting barrier, as a standalone command:
    // it emits, so it can never be a stutter step.
    let handover = Command {
        guard: Expr::And(
            Box::new(Expr::Cmp(CmpOp::Eq, Atom::Ident("s".into()), Atom::Ident("Back".into()))),
            Box::new(Expr::Cmp(CmpOp::Eq, Atom::Ident("c".into()), Atom::Int(1))),
        ),
        update: Update::Leaf {
            assigns: vec![
                Assign { field: "s".into(), rhs: Arith::Ident("Harnessing".into()) },
                Assign { field: "c".into(), rhs: Arith::Int(9) },
            ],
            emits: vec!["st.back".into()],
        },
    };
    let report = check_stutter(&handover, sleigh2, sleigh3, r3).unwrap();
    assert!(!report.passed());
    assert_eq!(report.counterexample().unwrap().clause, Clause::StutterLabels);
}

/// Every state either system can actually reach from its initial valuation,
/// stepping through any method or action.
fn reachable(gts: &Gts) -> Vec<Vec<Val>> {
    let mut seen = vec![gts.init()];
    let mut frontier = vec![gts.init()];
    while let Some(state) = frontier.pop() {
        let commands = gts.methods.iter().map(|m| &m.cmd).chain(gts.actions.iter());
        for cmd in commands {
            if let Some(step) = apply(cmd, gts, &state).unwrap() {
                if !seen.contains(&step.next) {
                    seen.push(step.next.clone());
                    frontier.push(step.next);
                }
            }
        }
    }
    seen
}

/// `Or` over the given states of `And` over their field values, written
/// against the relation parameters for one side.
fn states_expr(gts: &Gts, params: &[String], states: &[Vec<Val>]) -> Expr {
    let state_clause = |state: &Vec<Val>| {
        let mut clause: Option<Expr> = None;
        for (i, (field, &v)) in gts.fields.iter().zip(state).enumerate() {
            let atom = match (&field.domain, v) {
                (DomainDef::Enum(names), Val::Sym(s)) => Atom::Ident(names[s as usize].clone()),
                (_, Val::Int(n)) => Atom::Int(n),
                _ => unreachable!(),
            };
            let cmp = Expr::Cmp(CmpOp::Eq, Atom::Ident(params[i].clone()), atom);
            clause = Some(match clause {
                None => cmp,
                Some(prev) => Expr::And(Box::new(prev), Box::new(cmp)),
            });
        }
        clause.expect("systems have at least one field")
    };
    let mut expr: Option<Expr> = None;
    for state in states {
        let clause = state_clause(state);
        expr = Some(match expr {
            None => clause,
            Some(prev) => Expr::Or(Box::new(prev), Box::new(clause)),
        });
    }
    expr.expect("initial state is always reachable")
}

#[test]
fn restricting_relations_to_reachable_pairs_preserves_every_pass() {
    let file = parse_spec(SANTA_STEPS).unwrap();
    for (abs_name, conc_name, rel_name) in STEP_TRIPLES {
        let abs = file.system(abs_name).unwrap();
        let conc = file.system(conc_name).unwrap();
        let rel = file.couple(rel_name).unwrap();
        let restriction = Expr::And(
            Box::new(states_expr(abs, &rel.abs_params, &reachable(abs))),
            Box::new(states_expr(conc, &rel.conc_params, &reachable(conc))),
        );
        let shrunk = Couple {
            name: format!("{rel_name}r"),
            abs_params: rel.abs_params.clone(),
            conc_params: rel.conc_params.clone(),
            expr: Expr::And(Box::new(rel.expr.clone()), Box::new(restriction)),
        };
        let report =
            check_class_refinement(abs, conc, &shrunk, &RefinementMapping::Search).unwrap();
        assert!(report.passed(), "{conc_name} under restricted {rel_name}:\n{report}");
        for c in &report.conditions {
            assert!(c.passed, "{conc_name} restricted {rel_name} condition {}", c.label);
        }
    }
}
