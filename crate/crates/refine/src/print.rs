//! Canonical text form for parsed specs. Parsing the printed form yields a
//! structurally equal tree, which the round-trip tests pin down.

use crate::ast::*;
use std::fmt::Write;

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Iff(..) => 1,
        Expr::Implies(..) => 2,
        Expr::Or(..) => 3,
        Expr::And(..) => 4,
        Expr::Not(..) => 5,
        Expr::Const(_) | Expr::Cmp(..) | Expr::In(..) => 6,
    }
}

fn fmt_atom(a: &Atom, out: &mut String) {
    match a {
        Atom::Ident(n) => out.push_str(n),
        Atom::Int(i) => {
            let _ = write!(out, "{i}");
        }
    }
}

fn fmt_expr(e: &Expr, min: u8, out: &mut String) {
    if prec(e) < min {
        out.push('(');
        fmt_expr(e, 0, out);
        out.push(')');
        return;
    }
    match e {
        Expr::Const(true) => out.push_str("true"),
        Expr::Const(false) => out.push_str("false"),
        Expr::Cmp(op, a, b) => {
            fmt_atom(a, out);
            let _ = write!(out, " {} ", op.symbol());
            fmt_atom(b, out);
        }
        Expr::In(a, items) => {
            fmt_atom(a, out);
            out.push_str(" in {");
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                fmt_atom(item, out);
            }
            out.push('}');
        }
        Expr::Not(inner) => {
            out.push_str("not ");
            fmt_expr(inner, 5, out);
        }
        Expr::And(l, r) => {
            fmt_expr(l, 4, out);
            out.push_str(" and ");
            fmt_expr(r, 5, out);
        }
        Expr::Or(l, r) => {
            fmt_expr(l, 3, out);
            out.push_str(" or ");
            fmt_expr(r, 4, out);
        }
        Expr::Implies(l, r) => {
            fmt_expr(l, 3, out);
            out.push_str(" => ");
            fmt_expr(r, 2, out);
        }
        Expr::Iff(l, r) => {
            fmt_expr(l, 2, out);
            out.push_str(" <=> ");
            fmt_expr(r, 1, out);
        }
    }
}

pub fn print_expr(e: &Expr) -> String {
    let mut out = String::new();
    fmt_expr(e, 0, &mut out);
    out
}

fn fmt_arith(a: &Arith, out: &mut String) {
    match a {
        Arith::Int(i) => {
            let _ = write!(out, "{i}");
        }
        Arith::Ident(n) => out.push_str(n),
        Arith::Add(l, r) => {
            fmt_arith(l, out);
            out.push_str(" + ");
            fmt_arith(r, out);
        }
        Arith::Sub(l, r) => {
            fmt_arith(l, out);
            out.push_str(" - ");
            fmt_arith(r, out);
        }
    }
}

fn fmt_update(u: &Update, out: &mut String) {
    match u {
        Update::Leaf { assigns, emits } => {
            for (i, a) in assigns.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                out.push_str(&a.field);
                out.push_str(" := ");
                fmt_arith(&a.rhs, out);
            }
            for label in emits {
                out.push_str(" ; emit ");
                out.push_str(label);
            }
        }
        Update::If { cond, then_branch, else_branch } => {
            out.push_str("if ");
            fmt_expr(cond, 0, out);
            out.push_str(" then ");
            fmt_update(then_branch, out);
            out.push_str(" else ");
            fmt_update(else_branch, out);
        }
    }
}

pub fn print_update(u: &Update) -> String {
    let mut out = String::new();
    fmt_update(u, &mut out);
    out
}

pub fn print_command(c: &Command) -> String {
    format!("{} -> {}", print_expr(&c.guard), print_update(&c.update))
}

fn fmt_domain(d: &DomainDef, out: &mut String) {
    match d {
        DomainDef::Enum(names) => {
            out.push('{');
            for (i, n) in names.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                out.push_str(n);
            }
            out.push('}');
        }
        DomainDef::Range(lo, hi) => {
            let _ = write!(out, "{lo} .. {hi}");
        }
    }
}

pub fn print_gts(g: &Gts) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "class {}", g.name);
    for f in &g.fields {
        out.push_str("  var ");
        out.push_str(&f.name);
        out.push_str(" : ");
        fmt_domain(&f.domain, &mut out);
        out.push_str(" = ");
        out.push_str(&f.domain.show(f.init));
        out.push('\n');
    }
    for m in &g.methods {
        let _ = writeln!(out, "  method {}() :: {}", m.name, print_command(&m.cmd));
    }
    for a in &g.actions {
        let _ = writeln!(out, "  action :: {}", print_command(a));
    }
    out
}

pub fn print_couple(c: &Couple) -> String {
    format!(
        "couple {} ({}) ({}) :: {}\n",
        c.name,
        c.abs_params.join(", "),
        c.conc_params.join(", "),
        print_expr(&c.expr)
    )
}

pub fn print_spec(file: &SpecFile) -> String {
    let mut out = String::new();
    for (i, g) in file.systems.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        out.push_str(&print_gts(g));
    }
    if !file.systems.is_empty() && !file.couples.is_empty() {
        out.push('\n');
    }
    for c in &file.couples {
        out.push_str(&print_couple(c));
    }
    out
}
