//! Refinement checking between two finite guarded transition systems under
//! a coupling relation.
//!
//! A class-level check discharges one condition per proof obligation: the
//! initial valuations are related (I), every shared method refines its
//! same-named abstract method (M), every new concrete method stutters or
//! refines some abstract action, possibly branch by branch (N), and every
//! concrete action refines some abstract action (A). Every failing report
//! carries a replayable counterexample.

use crate::ast::*;
use crate::error::CheckError;
use crate::eval::*;
use crate::print::print_command;
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
}

/// Which clause of a condition a counterexample violates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Clause {
    /// The initial valuations are not related.
    InitRelation,
    /// The concrete guard holds but the abstract guard does not.
    Guard,
    /// The post-states are not related.
    Relation,
    /// The emitted label sequences differ.
    Labels,
    /// A stuttering step leaves the relation.
    StutterRelation,
    /// A stuttering step emits labels.
    StutterLabels,
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let text = match self {
            Clause::InitRelation => "initial valuations are not related",
            Clause::Guard => "concrete guard holds where the abstract guard does not",
            Clause::Relation => "post-states are not related",
            Clause::Labels => "emitted labels differ",
            Clause::StutterRelation => "stuttering step leaves the relation",
            Clause::StutterLabels => "stuttering step emits labels",
        };
        f.write_str(text)
    }
}

/// Concrete-side subject of a counterexample.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CommandRef {
    Init,
    Method(String),
    Action(usize),
}

impl fmt::Display for CommandRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CommandRef::Init => f.write_str("init"),
            CommandRef::Method(name) => write!(f, "method {name}"),
            CommandRef::Action(i) => write!(f, "action {}", i + 1),
        }
    }
}

/// Abstract-side counterpart attempted when the violation was found.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AbsRef {
    Method(String),
    Action(usize),
}

impl fmt::Display for AbsRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AbsRef::Method(name) => write!(f, "abstract method {name}"),
            AbsRef::Action(i) => write!(f, "abstract action {}", i + 1),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    pub abs_state: Vec<(String, String)>,
    pub conc_state: Vec<(String, String)>,
    pub abs_vals: Vec<Val>,
    pub conc_vals: Vec<Val>,
    pub target: CommandRef,
    /// Restricts the violation to one normalized branch of the target.
    pub branch: Option<usize>,
    /// `None` means the violated step was a stutter attempt.
    pub attempt: Option<AbsRef>,
    pub clause: Clause,
    pub command: String,
    pub detail: String,
}

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |pairs: &[(String, String)]| {
            pairs
                .iter()
                .map(|(k, v)| format!("{k} = {v}"))
                .collect::<Vec<_>>()
                .join(", ")
        };
        writeln!(f, "abstract state: {}", show(&self.abs_state))?;
        writeln!(f, "concrete state: {}", show(&self.conc_state))?;
        writeln!(f, "command: {} :: {}", self.target, self.command)?;
        if let Some(b) = self.branch {
            writeln!(f, "branch: {}", b + 1)?;
        }
        match &self.attempt {
            Some(a) => writeln!(f, "against: {a}")?,
            None if self.clause != Clause::InitRelation => writeln!(f, "against: stutter")?,
            None => {}
        }
        write!(f, "clause: {}", self.clause)?;
        if !self.detail.is_empty() {
            write!(f, "\ndetail: {}", self.detail)?;
        }
        Ok(())
    }
}

/// How one branch of a new method was discharged.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BranchChoice {
    Stutter,
    Action(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CaseResolution {
    pub branch: String,
    pub choice: BranchChoice,
}

/// How a condition was discharged.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Resolution {
    /// Shared method refines its same-named abstract method.
    Matches,
    Stutter,
    Action(usize),
    Cases(Vec<CaseResolution>),
}

impl fmt::Display for Resolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Resolution::Matches => f.write_str("matches the abstract method"),
            Resolution::Stutter => f.write_str("stutter"),
            Resolution::Action(i) => write!(f, "refines abstract action {}", i + 1),
            Resolution::Cases(cases) => {
                f.write_str("cases: ")?;
                for (i, case) in cases.iter().enumerate() {
                    if i > 0 {
                        f.write_str("; ")?;
                    }
                    match case.choice {
                        BranchChoice::Stutter => write!(f, "[{}] stutter", case.branch)?,
                        BranchChoice::Action(a) => {
                            write!(f, "[{}] refines abstract action {}", case.branch, a + 1)?
                        }
                    }
                }
                Ok(())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConditionResult {
    /// `I`, `M<k>`, `N<k>`, or `A<k>` (1-based).
    pub label: String,
    pub subject: String,
    pub passed: bool,
    pub resolution: Option<Resolution>,
    pub counterexample: Option<Counterexample>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckReport {
    pub verdict: Verdict,
    pub abs_name: String,
    pub conc_name: String,
    pub relation: String,
    pub conditions: Vec<ConditionResult>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    /// First failing condition's counterexample, if any.
    pub fn counterexample(&self) -> Option<&Counterexample> {
        self.conditions
            .iter()
            .find(|c| !c.passed)
            .and_then(|c| c.counterexample.as_ref())
    }

    pub fn condition(&self, label: &str) -> Option<&ConditionResult> {
        self.conditions.iter().find(|c| c.label == label)
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{} refines {} via {}: {}",
            self.conc_name,
            self.abs_name,
            self.relation,
            match self.verdict {
                Verdict::Pass => "PASS",
                Verdict::Fail => "FAIL",
            }
        )?;
        for c in &self.conditions {
            write!(f, "  {} ({}): {}", c.label, c.subject, if c.passed { "ok" } else { "FAIL" })?;
            if let Some(r) = &c.resolution {
                write!(f, " [{r}]")?;
            }
            writeln!(f)?;
        }
        if let Some(ce) = self.counterexample() {
            writeln!(f, "counterexample:")?;
            for line in ce.to_string().lines() {
                writeln!(f, "  {line}")?;
            }
        }
        Ok(())
    }
}

/// Explicit choice for one new concrete method.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NChoice {
    Stutter,
    Action(usize),
    PerBranch(Vec<BranchChoice>),
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ExplicitMapping {
    pub new_methods: Vec<(String, NChoice)>,
    /// One abstract action index per concrete action, in declaration order.
    pub actions: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RefinementMapping {
    /// Try stutter, then each abstract action in declaration order, then a
    /// branch-by-branch split; the first witness is kept.
    Search,
    Explicit(ExplicitMapping),
}

struct Ctx<'a> {
    bound: BoundCouple<'a>,
    xs: Vec<Vec<Val>>,
    ys: Vec<Vec<Val>>,
    /// Indices into `xs`/`ys` of the related pairs.
    pairs: Vec<(usize, usize)>,
}

fn show_state(gts: &Gts, vals: &[Val]) -> Vec<(String, String)> {
    gts.fields
        .iter()
        .zip(vals)
        .map(|(f, &v)| (f.name.clone(), f.domain.show(v)))
        .collect()
}

impl<'a> Ctx<'a> {
    fn build(couple: &'a Couple, abs: &'a Gts, conc: &'a Gts) -> Result<Self, CheckError> {
        let total = space_size(abs) * space_size(conc);
        if total > MAX_PAIRS {
            return Err(CheckError::SpaceTooLarge(total));
        }
        let bound = bind(couple, abs, conc)?;
        let xs = state_space(abs);
        let ys = state_space(conc);
        let mut pairs = Vec::new();
        for (xi, x) in xs.iter().enumerate() {
            for (yi, y) in ys.iter().enumerate() {
                if bound.holds(x, y)? {
                    pairs.push((xi, yi));
                }
            }
        }
        Ok(Ctx { bound, xs, ys, pairs })
    }

    #[allow(clippy::too_many_arguments)]
    fn ce(
        &self,
        xi: usize,
        yi: usize,
        target: &CommandRef,
        branch: Option<usize>,
        attempt: Option<AbsRef>,
        clause: Clause,
        command: &Command,
        detail: String,
    ) -> Counterexample {
        Counterexample {
            abs_state: show_state(self.bound.abs, &self.xs[xi]),
            conc_state: show_state(self.bound.conc, &self.ys[yi]),
            abs_vals: self.xs[xi].clone(),
            conc_vals: self.ys[yi].clone(),
            target: target.clone(),
            branch,
            attempt,
            clause,
            command: print_command(command),
            detail,
        }
    }

    /// Check that `conc_cmd` refines `abs_cmd` over every related pair,
    /// optionally restricted to one normalized branch of the concrete
    /// command. Returns the first violation.
    fn refines(
        &self,
        abs_cmd: &Command,
        attempt: &AbsRef,
        conc_cmd: &Command,
        target: &CommandRef,
        branch: Option<(usize, &Branch)>,
    ) -> Result<Option<Counterexample>, CheckError> {
        let (abs, conc) = (self.bound.abs, self.bound.conc);
        for &(xi, yi) in &self.pairs {
            let (x, y) = (&self.xs[xi], &self.ys[yi]);
            let stepped = match branch {
                Some((_, br)) => {
                    if !branch_active(conc_cmd, br, conc, y)? {
                        continue;
                    }
                    apply(conc_cmd, conc, y)?
                }
                None => apply(conc_cmd, conc, y)?,
            };
            let Some(step) = stepped else { continue };
            let bidx = branch.map(|(i, _)| i);
            let Some(abs_step) = apply(abs_cmd, abs, x)? else {
                return Ok(Some(self.ce(
                    xi,
                    yi,
                    target,
                    bidx,
                    Some(attempt.clone()),
                    Clause::Guard,
                    conc_cmd,
                    format!("{attempt} is not enabled"),
                )));
            };
            if !self.bound.holds(&abs_step.next, &step.next)? {
                return Ok(Some(self.ce(
                    xi,
                    yi,
                    target,
                    bidx,
                    Some(attempt.clone()),
                    Clause::Relation,
                    conc_cmd,
                    format!(
                        "abstract step reaches {:?}, concrete step reaches {:?}",
                        show_state(abs, &abs_step.next),
                        show_state(conc, &step.next)
                    ),
                )));
            }
            if abs_step.emits != step.emits {
                return Ok(Some(self.ce(
                    xi,
                    yi,
                    target,
                    bidx,
                    Some(attempt.clone()),
                    Clause::Labels,
                    conc_cmd,
                    format!("abstract emits {:?}, concrete emits {:?}", abs_step.emits, step.emits),
                )));
            }
        }
        Ok(None)
    }

    /// Check that `conc_cmd` stutters (relation preserved, nothing emitted)
    /// over every related pair, optionally branch-restricted.
    fn stutters(
        &self,
        conc_cmd: &Command,
        target: &CommandRef,
        branch: Option<(usize, &Branch)>,
    ) -> Result<Option<Counterexample>, CheckError> {
        let conc = self.bound.conc;
        for &(xi, yi) in &self.pairs {
            let (x, y) = (&self.xs[xi], &self.ys[yi]);
            if let Some((_, br)) = branch {
                if !branch_active(conc_cmd, br, conc, y)? {
                    continue;
                }
            }
            let Some(step) = apply(conc_cmd, conc, y)? else { continue };
            let bidx = branch.map(|(i, _)| i);
            if !step.emits.is_empty() {
                return Ok(Some(self.ce(
                    xi,
                    yi,
                    target,
                    bidx,
                    None,
                    Clause::StutterLabels,
                    conc_cmd,
                    format!("step emits {:?}", step.emits),
                )));
            }
            if !self.bound.holds(x, &step.next)? {
                return Ok(Some(self.ce(
                    xi,
                    yi,
                    target,
                    bidx,
                    None,
                    Clause::StutterRelation,
                    conc_cmd,
                    format!("concrete step reaches {:?}", show_state(conc, &step.next)),
                )));
            }
        }
        Ok(None)
    }
}

fn single_report(
    abs: &Gts,
    conc: &Gts,
    couple: &Couple,
    label: &str,
    subject: String,
    resolution: Option<Resolution>,
    ce: Option<Counterexample>,
) -> CheckReport {
    let passed = ce.is_none();
    CheckReport {
        verdict: if passed { Verdict::Pass } else { Verdict::Fail },
        abs_name: abs.name.clone(),
        conc_name: conc.name.clone(),
        relation: couple.name.clone(),
        conditions: vec![ConditionResult {
            label: label.to_string(),
            subject,
            passed,
            resolution: if passed { resolution } else { None },
            counterexample: ce,
        }],
    }
}

/// Check that one concrete command refines one abstract command under the
/// relation: wherever the concrete guard holds on a related pair, the
/// abstract guard holds, the post-states are related, and the emitted
/// label sequences agree.
pub fn check_guarded_assignment(
    abs_cmd: &Command,
    abs: &Gts,
    conc_cmd: &Command,
    conc: &Gts,
    couple: &Couple,
) -> Result<CheckReport, CheckError> {
    let ctx = Ctx::build(couple, abs, conc)?;
    let attempt = AbsRef::Method("<given>".to_string());
    let target = CommandRef::Method("<given>".to_string());
    let ce = ctx.refines(abs_cmd, &attempt, conc_cmd, &target, None)?;
    Ok(single_report(
        abs,
        conc,
        couple,
        "refine",
        print_command(conc_cmd),
        Some(Resolution::Matches),
        ce,
    ))
}

/// Check that one concrete command stutters under the relation: wherever
/// its guard holds on a related pair, the step emits nothing and the new
/// concrete state remains related to the unchanged abstract state.
pub fn check_stutter(
    conc_cmd: &Command,
    abs: &Gts,
    conc: &Gts,
    couple: &Couple,
) -> Result<CheckReport, CheckError> {
    let ctx = Ctx::build(couple, abs, conc)?;
    let target = CommandRef::Method("<given>".to_string());
    let ce = ctx.stutters(conc_cmd, &target, None)?;
    Ok(single_report(
        abs,
        conc,
        couple,
        "stutter",
        print_command(conc_cmd),
        Some(Resolution::Stutter),
        ce,
    ))
}

fn candidate_summary(failures: &[(String, Clause)]) -> String {
    failures
        .iter()
        .map(|(who, clause)| format!("{who}: {clause}"))
        .collect::<Vec<_>>()
        .join("; ")
}

/// Resolve one new concrete method: stutter, a single abstract action, or
/// a branch-by-branch split.
fn resolve_new_method(
    ctx: &Ctx,
    abs: &Gts,
    cmd: &Command,
    target: &CommandRef,
) -> Result<(Option<Resolution>, Option<Counterexample>), CheckError> {
    let mut failures = Vec::new();
    let first_stutter_ce = match ctx.stutters(cmd, target, None)? {
        None => return Ok((Some(Resolution::Stutter), None)),
        Some(ce) => {
            failures.push(("stutter".to_string(), ce.clause));
            ce
        }
    };
    for (i, action) in abs.actions.iter().enumerate() {
        match ctx.refines(action, &AbsRef::Action(i), cmd, target, None)? {
            None => return Ok((Some(Resolution::Action(i)), None)),
            Some(ce) => failures.push((format!("abstract action {}", i + 1), ce.clause)),
        }
    }
    // Branch-by-branch: each normalized branch may stutter or refine its
    // own abstract action.
    let branches = normalize(cmd);
    if branches.len() > 1 {
        let mut cases = Vec::with_capacity(branches.len());
        for (bi, br) in branches.iter().enumerate() {
            let restricted = Some((bi, br));
            let stutter_ce = match ctx.stutters(cmd, target, restricted)? {
                None => {
                    cases.push(CaseResolution { branch: br.describe(), choice: BranchChoice::Stutter });
                    continue;
                }
                Some(ce) => ce,
            };
            let mut resolved = None;
            for (i, action) in abs.actions.iter().enumerate() {
                if ctx.refines(action, &AbsRef::Action(i), cmd, target, restricted)?.is_none() {
                    resolved = Some(BranchChoice::Action(i));
                    break;
                }
            }
            match resolved {
                Some(choice) => cases.push(CaseResolution { branch: br.describe(), choice }),
                None => {
                    let mut ce = stutter_ce;
                    ce.detail = format!(
                        "branch `{}` neither stutters nor refines any abstract action ({})",
                        br.describe(),
                        ce.detail
                    );
                    return Ok((None, Some(ce)));
                }
            }
        }
        return Ok((Some(Resolution::Cases(cases)), None));
    }
    let mut ce = first_stutter_ce;
    ce.detail = format!(
        "no resolution found ({}); first stutter violation: {}",
        candidate_summary(&failures),
        ce.detail
    );
    Ok((None, Some(ce)))
}

/// Verify one explicitly chosen resolution for a new method.
fn verify_new_method_choice(
    ctx: &Ctx,
    abs: &Gts,
    cmd: &Command,
    target: &CommandRef,
    choice: &NChoice,
) -> Result<(Option<Resolution>, Option<Counterexample>), CheckError> {
    match choice {
        NChoice::Stutter => match ctx.stutters(cmd, target, None)? {
            None => Ok((Some(Resolution::Stutter), None)),
            Some(ce) => Ok((None, Some(ce))),
        },
        NChoice::Action(i) => {
            let action = abs.actions.get(*i).ok_or_else(|| {
                CheckError::BadMapping(format!("abstract action {} does not exist", i + 1))
            })?;
            match ctx.refines(action, &AbsRef::Action(*i), cmd, target, None)? {
                None => Ok((Some(Resolution::Action(*i)), None)),
                Some(ce) => Ok((None, Some(ce))),
            }
        }
        NChoice::PerBranch(choices) => {
            let branches = normalize(cmd);
            if choices.len() != branches.len() {
                return Err(CheckError::BadMapping(format!(
                    "{target} has {} branches but the mapping lists {}",
                    branches.len(),
                    choices.len()
                )));
            }
            let mut cases = Vec::with_capacity(branches.len());
            for (bi, (br, choice)) in branches.iter().zip(choices).enumerate() {
                let restricted = Some((bi, br));
                let ce = match choice {
                    BranchChoice::Stutter => ctx.stutters(cmd, target, restricted)?,
                    BranchChoice::Action(i) => {
                        let action = abs.actions.get(*i).ok_or_else(|| {
                            CheckError::BadMapping(format!("abstract action {} does not exist", i + 1))
                        })?;
                        ctx.refines(action, &AbsRef::Action(*i), cmd, target, restricted)?
                    }
                };
                if let Some(ce) = ce {
                    return Ok((None, Some(ce)));
                }
                cases.push(CaseResolution { branch: br.describe(), choice: *choice });
            }
            Ok((Some(Resolution::Cases(cases)), None))
        }
    }
}

/// Resolve one concrete action against the abstract actions.
fn resolve_action(
    ctx: &Ctx,
    abs: &Gts,
    cmd: &Command,
    target: &CommandRef,
    pinned: Option<usize>,
) -> Result<(Option<Resolution>, Option<Counterexample>), CheckError> {
    if let Some(i) = pinned {
        let action = abs.actions.get(i).ok_or_else(|| {
            CheckError::BadMapping(format!("abstract action {} does not exist", i + 1))
        })?;
        return match ctx.refines(action, &AbsRef::Action(i), cmd, target, None)? {
            None => Ok((Some(Resolution::Action(i)), None)),
            Some(ce) => Ok((None, Some(ce))),
        };
    }
    let mut first_ce = None;
    let mut failures = Vec::new();
    for (i, action) in abs.actions.iter().enumerate() {
        match ctx.refines(action, &AbsRef::Action(i), cmd, target, None)? {
            None => return Ok((Some(Resolution::Action(i)), None)),
            Some(ce) => {
                failures.push((format!("abstract action {}", i + 1), ce.clause));
                if first_ce.is_none() {
                    first_ce = Some(ce);
                }
            }
        }
    }
    let ce = match first_ce {
        Some(mut ce) => {
            ce.detail = format!(
                "no abstract action matches ({}); first violation: {}",
                candidate_summary(&failures),
                ce.detail
            );
            Some(ce)
        }
        None => {
            // No abstract actions at all: any enabled concrete action is
            // unmatched. Report the first related pair that enables it.
            let mut found = None;
            for &(xi, yi) in &ctx.pairs {
                if apply(cmd, ctx.bound.conc, &ctx.ys[yi])?.is_some() {
                    found = Some(ctx.ce(
                        xi,
                        yi,
                        target,
                        None,
                        None,
                        Clause::Guard,
                        cmd,
                        "the abstract system has no actions".to_string(),
                    ));
                    break;
                }
            }
            found
        }
    };
    match ce {
        Some(ce) => Ok((None, Some(ce))),
        // Never enabled on a related pair: vacuously fine.
        None => Ok((None, None)),
    }
}

/// Check that `conc` refines `abs` under `couple`, discharging the I, M,
/// N, and A conditions. `mapping` selects between searching for witnesses
/// and verifying explicitly chosen ones.
pub fn check_class_refinement(
    abs: &Gts,
    conc: &Gts,
    couple: &Couple,
    mapping: &RefinementMapping,
) -> Result<CheckReport, CheckError> {
    for m in &abs.methods {
        if conc.method(&m.name).is_none() {
            return Err(CheckError::Structural(format!(
                "abstract method `{}` has no counterpart in `{}`",
                m.name, conc.name
            )));
        }
    }
    let explicit = match mapping {
        RefinementMapping::Search => None,
        RefinementMapping::Explicit(m) => Some(m),
    };
    if let Some(m) = explicit {
        if m.actions.len() != conc.actions.len() {
            return Err(CheckError::BadMapping(format!(
                "`{}` has {} actions but the mapping lists {}",
                conc.name,
                conc.actions.len(),
                m.actions.len()
            )));
        }
    }

    let ctx = Ctx::build(couple, abs, conc)?;
    let mut conditions = Vec::new();

    let init_ok = ctx.bound.holds(&abs.init(), &conc.init())?;
    let init_ce = if init_ok {
        None
    } else {
        Some(Counterexample {
            abs_state: show_state(abs, &abs.init()),
            conc_state: show_state(conc, &conc.init()),
            abs_vals: abs.init(),
            conc_vals: conc.init(),
            target: CommandRef::Init,
            branch: None,
            attempt: None,
            clause: Clause::InitRelation,
            command: "init".to_string(),
            detail: String::new(),
        })
    };
    conditions.push(ConditionResult {
        label: "I".to_string(),
        subject: "initial valuations".to_string(),
        passed: init_ok,
        resolution: None,
        counterexample: init_ce,
    });

    for (k, m) in abs.methods.iter().enumerate() {
        let conc_cmd = conc.method(&m.name).expect("checked above");
        let target = CommandRef::Method(m.name.clone());
        let ce = ctx.refines(&m.cmd, &AbsRef::Method(m.name.clone()), conc_cmd, &target, None)?;
        conditions.push(ConditionResult {
            label: format!("M{}", k + 1),
            subject: format!("method {}", m.name),
            passed: ce.is_none(),
            resolution: if ce.is_none() { Some(Resolution::Matches) } else { None },
            counterexample: ce,
        });
    }

    let new_methods: Vec<&NamedCommand> =
        conc.methods.iter().filter(|m| abs.method(&m.name).is_none()).collect();
    for (k, m) in new_methods.iter().enumerate() {
        let target = CommandRef::Method(m.name.clone());
        let (resolution, ce) = match explicit {
            None => resolve_new_method(&ctx, abs, &m.cmd, &target)?,
            Some(map) => {
                let choice = map
                    .new_methods
                    .iter()
                    .find(|(name, _)| *name == m.name)
                    .map(|(_, c)| c)
                    .ok_or_else(|| {
                        CheckError::BadMapping(format!("no mapping entry for new method `{}`", m.name))
                    })?;
                verify_new_method_choice(&ctx, abs, &m.cmd, &target, choice)?
            }
        };
        conditions.push(ConditionResult {
            label: format!("N{}", k + 1),
            subject: format!("method {}", m.name),
            passed: ce.is_none(),
            resolution,
            counterexample: ce,
        });
    }

    for (j, cmd) in conc.actions.iter().enumerate() {
        let target = CommandRef::Action(j);
        let pinned = explicit.map(|m| m.actions[j]);
        let (resolution, ce) = resolve_action(&ctx, abs, cmd, &target, pinned)?;
        conditions.push(ConditionResult {
            label: format!("A{}", j + 1),
            subject: format!("action {}", j + 1),
            passed: ce.is_none(),
            resolution,
            counterexample: ce,
        });
    }

    let verdict = if conditions.iter().all(|c| c.passed) { Verdict::Pass } else { Verdict::Fail };
    Ok(CheckReport {
        verdict,
        abs_name: abs.name.clone(),
        conc_name: conc.name.clone(),
        relation: couple.name.clone(),
        conditions,
    })
}

/// Re-run the single step recorded in a counterexample and confirm that it
/// violates the recorded clause. Returns `Ok(true)` when the violation
/// reproduces.
pub fn replay(
    ce: &Counterexample,
    abs: &Gts,
    conc: &Gts,
    couple: &Couple,
) -> Result<bool, CheckError> {
    let bound = bind(couple, abs, conc)?;
    let (x, y) = (&ce.abs_vals, &ce.conc_vals);

    if ce.clause == Clause::InitRelation {
        return Ok(*x == abs.init() && *y == conc.init() && !bound.holds(x, y)?);
    }

    if !bound.holds(x, y)? {
        return Ok(false);
    }
    let conc_cmd = match &ce.target {
        CommandRef::Init => return Ok(false),
        CommandRef::Method(name) => match conc.method(name) {
            Some(c) => c,
            None => return Ok(false),
        },
        CommandRef::Action(i) => match conc.actions.get(*i) {
            Some(c) => c,
            None => return Ok(false),
        },
    };
    let Some(step) = apply(conc_cmd, conc, y)? else {
        return Ok(false);
    };
    if let Some(bidx) = ce.branch {
        if step.branch != bidx {
            return Ok(false);
        }
    }

    match &ce.attempt {
        None => match ce.clause {
            Clause::StutterLabels => Ok(!step.emits.is_empty()),
            Clause::StutterRelation => Ok(!bound.holds(x, &step.next)?),
            // A guard clause with no attempt records a concrete action that
            // is enabled while the abstract system has no actions.
            Clause::Guard => Ok(abs.actions.is_empty()),
            _ => Ok(false),
        },
        Some(attempt) => {
            let abs_cmd = match attempt {
                AbsRef::Method(name) => match abs.method(name) {
                    Some(c) => c,
                    None => return Ok(false),
                },
                AbsRef::Action(i) => match abs.actions.get(*i) {
                    Some(c) => c,
                    None => return Ok(false),
                },
            };
            let abs_step = apply(abs_cmd, abs, x)?;
            match ce.clause {
                Clause::Guard => Ok(abs_step.is_none()),
                Clause::Relation => match abs_step {
                    Some(a) => Ok(!bound.holds(&a.next, &step.next)?),
                    None => Ok(false),
                },
                Clause::Labels => match abs_step {
                    Some(a) => Ok(a.emits != step.emits),
                    None => Ok(false),
                },
                _ => Ok(false),
            }
        }
    }
}
