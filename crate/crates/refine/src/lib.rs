//! Refinement checking for finite guarded transition systems.
//!
//! A small text format describes classes (finite-domain fields, guarded
//! methods, and autonomous actions) and named coupling relations between an
//! abstract and a concrete class. The checker enumerates every related
//! state pair and discharges the usual simulation conditions: related
//! initial states, shared methods tracking their abstract namesakes, new
//! methods stuttering or refining an abstract action (branch by branch
//! where needed), and concrete actions refining abstract ones. Failures
//! come back as replayable single-step counterexamples.

pub mod ast;
pub mod check;
pub mod error;
pub mod eval;
pub mod mutations;
pub mod parse;
pub mod print;

pub use ast::{
    Arith, Assign, Atom, CmpOp, Command, Couple, DomainDef, Expr, FieldDef, Gts, NamedCommand,
    SpecFile, Update, Val,
};
pub use check::{
    check_class_refinement, check_guarded_assignment, check_stutter, replay, AbsRef, BranchChoice,
    CaseResolution, CheckReport, Clause, CommandRef, ConditionResult, Counterexample,
    ExplicitMapping, NChoice, RefinementMapping, Resolution, Verdict,
};
pub use error::CheckError;
pub use eval::{
    apply, apply_branch, bind, branch_active, eval_guard, normalize, space_size, state_space,
    Applied, BoundCouple, Branch, MAX_PAIRS,
};
pub use parse::parse_spec;
pub use print::{print_command, print_couple, print_expr, print_gts, print_spec, print_update};

/// The staged gift-delivery classes and their coupling relations.
pub const SANTA_STEPS: &str = include_str!("fixtures/santa_steps.gts");

/// The two-state controller sketch on its own.
pub const SANTA0: &str = include_str!("fixtures/santa0.gts");

/// One checked development step.
#[derive(Clone, Debug)]
pub struct StepReport {
    pub step: usize,
    pub title: String,
    pub report: CheckReport,
}

/// The five development steps, in order: each triple names the abstract
/// class, the concrete class, and the coupling relation in
/// [`SANTA_STEPS`].
pub const STEP_TRIPLES: [(&str, &str, &str); 5] = [
    ("Santa0", "Santa1", "R1"),
    ("Santa1", "Santa2", "R2"),
    ("Sleigh2", "Sleigh3", "R3"),
    ("Santa2", "Santa4", "R4"),
    ("Shop4", "Shop5", "R5"),
];

/// Check every development step in [`SANTA_STEPS`] by witness search.
pub fn check_all_steps() -> Result<Vec<StepReport>, CheckError> {
    let file = parse_spec(SANTA_STEPS)?;
    let mut out = Vec::with_capacity(STEP_TRIPLES.len());
    for (i, (abs_name, conc_name, rel_name)) in STEP_TRIPLES.iter().enumerate() {
        let abs = file
            .system(abs_name)
            .ok_or_else(|| CheckError::UnknownSystem(abs_name.to_string()))?;
        let conc = file
            .system(conc_name)
            .ok_or_else(|| CheckError::UnknownSystem(conc_name.to_string()))?;
        let couple = file
            .couple(rel_name)
            .ok_or_else(|| CheckError::UnknownRelation(rel_name.to_string()))?;
        let report = check_class_refinement(abs, conc, couple, &RefinementMapping::Search)?;
        out.push(StepReport {
            step: i + 1,
            title: format!("{conc_name} refines {abs_name} via {rel_name}"),
            report,
        });
    }
    Ok(out)
}
