//! Finite-state evaluation: enumerating valuations, evaluating guards and
//! coupling relations, applying commands, and flattening branching updates
//! into linear branches.
//!
//! Enum values compare by name, so fields of different systems can be
//! related even when their domains differ. Integer assignments saturate at
//! the bounds of the target field's range, which keeps every update total
//! on the declared state space.

use crate::ast::*;
use crate::error::CheckError;
use crate::print::print_expr;

/// Hard ceiling on the number of state pairs any check will enumerate.
pub const MAX_PAIRS: u128 = 1 << 20;

pub fn space_size(gts: &Gts) -> u128 {
    gts.fields.iter().map(|f| f.domain.size() as u128).product()
}

/// Every valuation of the system's fields, in lexicographic domain order.
pub fn state_space(gts: &Gts) -> Vec<Vec<Val>> {
    let mut states = vec![Vec::new()];
    for field in &gts.fields {
        let values = field.domain.values();
        let mut next = Vec::with_capacity(states.len() * values.len());
        for state in &states {
            for &v in &values {
                let mut s = state.clone();
                s.push(v);
                next.push(s);
            }
        }
        states = next;
    }
    states
}

#[derive(Clone, Copy, PartialEq, Debug)]
enum TypedVal<'a> {
    Int(i64),
    Name(&'a str),
}

fn field_typed<'a>(gts: &'a Gts, idx: usize, v: &[Val]) -> TypedVal<'a> {
    match (&gts.fields[idx].domain, v[idx]) {
        (DomainDef::Enum(names), Val::Sym(s)) => TypedVal::Name(&names[s as usize]),
        (DomainDef::Range(..), Val::Int(i)) => TypedVal::Int(i),
        _ => unreachable!("valuation disagrees with domain"),
    }
}

fn compare(op: CmpOp, lhs: TypedVal, rhs: TypedVal) -> Result<bool, CheckError> {
    match (lhs, rhs) {
        (TypedVal::Int(a), TypedVal::Int(b)) => Ok(match op {
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Gt => a > b,
            CmpOp::Ge => a >= b,
        }),
        (TypedVal::Name(a), TypedVal::Name(b)) => match op {
            CmpOp::Eq => Ok(a == b),
            CmpOp::Ne => Ok(a != b),
            _ => Err(CheckError::Type(format!(
                "ordered comparison of enumeration values `{a}` and `{b}`"
            ))),
        },
        (a, b) => Err(CheckError::Type(format!(
            "comparison mixes integer and enumeration value ({a:?} vs {b:?})"
        ))),
    }
}

/// Evaluate a guard or branch condition over one system's valuation.
pub fn eval_guard<'a>(e: &'a Expr, gts: &'a Gts, v: &[Val]) -> Result<bool, CheckError> {
    let resolve = move |atom: &'a Atom| -> Result<TypedVal<'a>, CheckError> {
        match atom {
            Atom::Int(i) => Ok(TypedVal::Int(*i)),
            Atom::Ident(name) => match gts.field_index(name) {
                Some(idx) => Ok(field_typed(gts, idx, v)),
                None => Ok(TypedVal::Name(name)),
            },
        }
    };
    eval_expr(e, &resolve)
}

fn eval_expr<'a, F>(e: &'a Expr, resolve: &F) -> Result<bool, CheckError>
where
    F: Fn(&'a Atom) -> Result<TypedVal<'a>, CheckError>,
{
    match e {
        Expr::Const(b) => Ok(*b),
        Expr::Cmp(op, a, b) => compare(*op, resolve(a)?, resolve(b)?),
        Expr::In(a, items) => {
            let lhs = resolve(a)?;
            for item in items {
                if compare(CmpOp::Eq, lhs, resolve(item)?)? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
        Expr::Not(inner) => Ok(!eval_expr(inner, resolve)?),
        Expr::And(l, r) => Ok(eval_expr(l, resolve)? && eval_expr(r, resolve)?),
        Expr::Or(l, r) => Ok(eval_expr(l, resolve)? || eval_expr(r, resolve)?),
        Expr::Implies(l, r) => Ok(!eval_expr(l, resolve)? || eval_expr(r, resolve)?),
        Expr::Iff(l, r) => Ok(eval_expr(l, resolve)? == eval_expr(r, resolve)?),
    }
}

/// A coupling relation bound to a concrete pair of systems, with parameter
/// names resolved positionally against their field lists.
pub struct BoundCouple<'a> {
    pub couple: &'a Couple,
    pub abs: &'a Gts,
    pub conc: &'a Gts,
}

#[derive(Clone, Copy)]
enum ParamRef {
    Abs(usize),
    Conc(usize),
}

impl<'a> BoundCouple<'a> {
    fn lookup(&self, name: &str) -> Option<ParamRef> {
        if let Some(i) = self.couple.abs_params.iter().position(|p| p == name) {
            return Some(ParamRef::Abs(i));
        }
        self.couple
            .conc_params
            .iter()
            .position(|p| p == name)
            .map(ParamRef::Conc)
    }

    pub fn holds<'s>(&'s self, x: &[Val], y: &[Val]) -> Result<bool, CheckError> {
        let resolve = move |atom: &'s Atom| -> Result<TypedVal<'s>, CheckError> {
            match atom {
                Atom::Int(i) => Ok(TypedVal::Int(*i)),
                Atom::Ident(name) => match self.lookup(name) {
                    Some(ParamRef::Abs(i)) => Ok(field_typed(self.abs, i, x)),
                    Some(ParamRef::Conc(i)) => Ok(field_typed(self.conc, i, y)),
                    None => Ok(TypedVal::Name(name)),
                },
            }
        };
        eval_expr(&self.couple.expr, &resolve)
    }
}

/// Bind a coupling relation to an abstract and a concrete system, checking
/// parameter arity and that every literal name in the relation is a value
/// of the field it is compared against.
pub fn bind<'a>(couple: &'a Couple, abs: &'a Gts, conc: &'a Gts) -> Result<BoundCouple<'a>, CheckError> {
    if couple.abs_params.len() != abs.fields.len() {
        return Err(CheckError::RelationBind {
            name: couple.name.clone(),
            detail: format!(
                "abstract side binds {} parameters but `{}` has {} fields",
                couple.abs_params.len(),
                abs.name,
                abs.fields.len()
            ),
        });
    }
    if couple.conc_params.len() != conc.fields.len() {
        return Err(CheckError::RelationBind {
            name: couple.name.clone(),
            detail: format!(
                "concrete side binds {} parameters but `{}` has {} fields",
                couple.conc_params.len(),
                conc.name,
                conc.fields.len()
            ),
        });
    }
    let bound = BoundCouple { couple, abs, conc };
    validate_couple_expr(&couple.expr, &bound)?;
    Ok(bound)
}

fn param_domain<'a>(bound: &BoundCouple<'a>, r: ParamRef) -> &'a DomainDef {
    match r {
        ParamRef::Abs(i) => &bound.abs.fields[i].domain,
        ParamRef::Conc(i) => &bound.conc.fields[i].domain,
    }
}

fn validate_couple_expr(e: &Expr, bound: &BoundCouple) -> Result<(), CheckError> {
    let fail = |detail: String| {
        Err(CheckError::RelationBind { name: bound.couple.name.clone(), detail })
    };
    match e {
        Expr::Const(_) => Ok(()),
        Expr::Cmp(op, a, b) => {
            let numeric = matches!(op, CmpOp::Lt | CmpOp::Le | CmpOp::Gt | CmpOp::Ge);
            let sides = [a, b];
            let refs: Vec<Option<ParamRef>> = sides
                .iter()
                .map(|s| match s {
                    Atom::Ident(n) => bound.lookup(n),
                    Atom::Int(_) => None,
                })
                .collect();
            for (i, side) in sides.iter().enumerate() {
                match (side, refs[i]) {
                    (_, Some(r)) => {
                        let dom = param_domain(bound, r);
                        if numeric && !matches!(dom, DomainDef::Range(..)) {
                            return fail(format!(
                                "ordered comparison over non-numeric parameter in `{}`",
                                print_expr(e)
                            ));
                        }
                    }
                    (Atom::Ident(name), None) => {
                        // Literal: the opposite side must be a parameter whose
                        // enum domain contains this name.
                        let Some(r) = refs[1 - i] else {
                            return fail(format!("unknown identifier `{name}`"));
                        };
                        let dom = param_domain(bound, r);
                        if dom.sym(name).is_none() {
                            return fail(format!(
                                "`{name}` is not a value of the compared field"
                            ));
                        }
                    }
                    (Atom::Int(_), None) => {
                        if let Some(r) = refs[1 - i] {
                            let dom = param_domain(bound, r);
                            if !matches!(dom, DomainDef::Range(..)) {
                                return fail(format!(
                                    "integer compared against non-numeric parameter in `{}`",
                                    print_expr(e)
                                ));
                            }
                        }
                    }
                }
            }
            if refs[0].is_none() && refs[1].is_none() {
                return fail(format!("no parameter in comparison `{}`", print_expr(e)));
            }
            Ok(())
        }
        Expr::In(a, items) => {
            let Atom::Ident(name) = a else {
                return fail("set membership needs a parameter on the left".to_string());
            };
            let Some(r) = bound.lookup(name) else {
                return fail(format!("unknown identifier `{name}`"));
            };
            let dom = param_domain(bound, r);
            for item in items {
                match item {
                    Atom::Ident(n) if dom.sym(n).is_none() => {
                        return fail(format!("`{n}` is not a value of parameter `{name}`"));
                    }
                    Atom::Int(_) if !matches!(dom, DomainDef::Range(..)) => {
                        return fail(format!("integer in value set of `{name}`"));
                    }
                    _ => {}
                }
            }
            Ok(())
        }
        Expr::Not(inner) => validate_couple_expr(inner, bound),
        Expr::And(l, r) | Expr::Or(l, r) | Expr::Implies(l, r) | Expr::Iff(l, r) => {
            validate_couple_expr(l, bound)?;
            validate_couple_expr(r, bound)
        }
    }
}

fn eval_arith(a: &Arith, gts: &Gts, v: &[Val]) -> Result<i64, CheckError> {
    match a {
        Arith::Int(i) => Ok(*i),
        Arith::Ident(name) => match gts.field_index(name) {
            Some(idx) => match v[idx] {
                Val::Int(i) => Ok(i),
                Val::Sym(_) => Err(CheckError::Type(format!(
                    "field `{name}` is not numeric"
                ))),
            },
            None => Err(CheckError::Type(format!("unknown identifier `{name}`"))),
        },
        Arith::Add(l, r) => Ok(eval_arith(l, gts, v)?.saturating_add(eval_arith(r, gts, v)?)),
        Arith::Sub(l, r) => Ok(eval_arith(l, gts, v)?.saturating_sub(eval_arith(r, gts, v)?)),
    }
}

fn assign_value(assign: &Assign, gts: &Gts, v: &[Val]) -> Result<Val, CheckError> {
    let idx = gts
        .field_index(&assign.field)
        .ok_or_else(|| CheckError::Type(format!("unknown field `{}`", assign.field)))?;
    let domain = &gts.fields[idx].domain;
    match domain {
        DomainDef::Enum(_) => match &assign.rhs {
            Arith::Ident(name) => {
                if let Some(s) = domain.sym(name) {
                    Ok(Val::Sym(s))
                } else if let Some(src) = gts.field_index(name) {
                    Ok(v[src])
                } else {
                    Err(CheckError::Type(format!(
                        "`{name}` is not a value of field `{}`",
                        assign.field
                    )))
                }
            }
            _ => Err(CheckError::Type(format!("field `{}` is not numeric", assign.field))),
        },
        DomainDef::Range(..) => {
            let raw = eval_arith(&assign.rhs, gts, v)?;
            Ok(domain.clamp(Val::Int(raw)))
        }
    }
}

fn apply_assigns(assigns: &[Assign], gts: &Gts, v: &[Val]) -> Result<Vec<Val>, CheckError> {
    let mut next = v.to_vec();
    for assign in assigns {
        let value = assign_value(assign, gts, v)?;
        let idx = gts.field_index(&assign.field).unwrap();
        next[idx] = value;
    }
    Ok(next)
}

/// Result of applying a command whose guard held.
pub struct Applied<'c> {
    pub next: Vec<Val>,
    pub emits: &'c [String],
    /// Index of the update branch that fired, in [`normalize`] order.
    pub branch: usize,
}

/// Apply a command at a valuation. `Ok(None)` means the guard is false.
pub fn apply<'c>(cmd: &'c Command, gts: &Gts, v: &[Val]) -> Result<Option<Applied<'c>>, CheckError> {
    if !eval_guard(&cmd.guard, gts, v)? {
        return Ok(None);
    }
    let mut update = &cmd.update;
    let mut branch = 0usize;
    loop {
        match update {
            Update::Leaf { assigns, emits } => {
                let next = apply_assigns(assigns, gts, v)?;
                return Ok(Some(Applied { next, emits, branch }));
            }
            Update::If { cond, then_branch, else_branch } => {
                if eval_guard(cond, gts, v)? {
                    update = then_branch;
                } else {
                    branch += leaf_count(then_branch);
                    update = else_branch;
                }
            }
        }
    }
}

fn leaf_count(u: &Update) -> usize {
    match u {
        Update::Leaf { .. } => 1,
        Update::If { then_branch, else_branch, .. } => {
            leaf_count(then_branch) + leaf_count(else_branch)
        }
    }
}

/// One linear branch of a command: the conjunction of the guard and the
/// recorded branch conditions selects it, and its assignments and emitted
/// labels apply atomically.
#[derive(Clone, Debug)]
pub struct Branch {
    pub conds: Vec<(Expr, bool)>,
    pub assigns: Vec<Assign>,
    pub emits: Vec<String>,
}

impl Branch {
    /// Human-readable branch condition, `always` for an unconditional body.
    pub fn describe(&self) -> String {
        if self.conds.is_empty() {
            return "always".to_string();
        }
        self.conds
            .iter()
            .map(|(e, polarity)| {
                if *polarity {
                    print_expr(e)
                } else {
                    format!("not ({})", print_expr(e))
                }
            })
            .collect::<Vec<_>>()
            .join(" and ")
    }
}

/// Flatten a command's update tree into its branches, in the same order
/// [`apply`] reports through `Applied::branch`.
pub fn normalize(cmd: &Command) -> Vec<Branch> {
    let mut out = Vec::new();
    let mut conds = Vec::new();
    flatten(&cmd.update, &mut conds, &mut out);
    out
}

fn flatten(u: &Update, conds: &mut Vec<(Expr, bool)>, out: &mut Vec<Branch>) {
    match u {
        Update::Leaf { assigns, emits } => out.push(Branch {
            conds: conds.clone(),
            assigns: assigns.clone(),
            emits: emits.clone(),
        }),
        Update::If { cond, then_branch, else_branch } => {
            conds.push((cond.clone(), true));
            flatten(then_branch, conds, out);
            conds.pop();
            conds.push((cond.clone(), false));
            flatten(else_branch, conds, out);
            conds.pop();
        }
    }
}

/// True when `cmd`'s guard holds at `v` and the branch's recorded
/// conditions select exactly this branch.
pub fn branch_active(cmd: &Command, branch: &Branch, gts: &Gts, v: &[Val]) -> Result<bool, CheckError> {
    if !eval_guard(&cmd.guard, gts, v)? {
        return Ok(false);
    }
    for (cond, polarity) in &branch.conds {
        if eval_guard(cond, gts, v)? != *polarity {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Apply one normalized branch's assignments.
pub fn apply_branch(branch: &Branch, gts: &Gts, v: &[Val]) -> Result<Vec<Val>, CheckError> {
    apply_assigns(&branch.assigns, gts, v)
}
