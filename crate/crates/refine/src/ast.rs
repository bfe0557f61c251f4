//! Syntax trees for the guarded-transition-system text format.
//!
//! A spec file holds class definitions (finite-domain fields plus guarded
//! methods and actions) and named coupling relations between an abstract and
//! a concrete field list. Structural equality on these types is the
//! round-trip contract for the parser and printer.

/// One parsed spec file.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct SpecFile {
    pub systems: Vec<Gts>,
    pub couples: Vec<Couple>,
}

impl SpecFile {
    pub fn system(&self, name: &str) -> Option<&Gts> {
        self.systems.iter().find(|s| s.name == name)
    }

    pub fn couple(&self, name: &str) -> Option<&Couple> {
        self.couples.iter().find(|c| c.name == name)
    }
}

/// A finite guarded transition system: named fields over finite domains,
/// an initial valuation (per-field), guarded methods, and unnamed actions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gts {
    pub name: String,
    pub fields: Vec<FieldDef>,
    pub methods: Vec<NamedCommand>,
    pub actions: Vec<Command>,
}

impl Gts {
    pub fn field_index(&self, name: &str) -> Option<usize> {
        self.fields.iter().position(|f| f.name == name)
    }

    pub fn init(&self) -> Vec<Val> {
        self.fields.iter().map(|f| f.init).collect()
    }

    pub fn method(&self, name: &str) -> Option<&Command> {
        self.methods.iter().find(|m| m.name == name).map(|m| &m.cmd)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldDef {
    pub name: String,
    pub domain: DomainDef,
    pub init: Val,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DomainDef {
    /// Named enumeration; values are indices into the name list.
    Enum(Vec<String>),
    /// Inclusive integer range.
    Range(i64, i64),
}

impl DomainDef {
    pub fn size(&self) -> u64 {
        match self {
            DomainDef::Enum(names) => names.len() as u64,
            DomainDef::Range(lo, hi) => (hi - lo + 1) as u64,
        }
    }

    pub fn contains(&self, v: Val) -> bool {
        match (self, v) {
            (DomainDef::Enum(names), Val::Sym(s)) => (s as usize) < names.len(),
            (DomainDef::Range(lo, hi), Val::Int(i)) => *lo <= i && i <= *hi,
            _ => false,
        }
    }

    pub fn values(&self) -> Vec<Val> {
        match self {
            DomainDef::Enum(names) => (0..names.len()).map(|i| Val::Sym(i as u16)).collect(),
            DomainDef::Range(lo, hi) => (*lo..=*hi).map(Val::Int).collect(),
        }
    }

    pub fn sym(&self, name: &str) -> Option<u16> {
        match self {
            DomainDef::Enum(names) => names.iter().position(|n| n == name).map(|i| i as u16),
            DomainDef::Range(..) => None,
        }
    }

    /// Printable form of a value of this domain.
    pub fn show(&self, v: Val) -> String {
        match (self, v) {
            (DomainDef::Enum(names), Val::Sym(s)) => names[s as usize].clone(),
            (_, Val::Int(i)) => i.to_string(),
            (_, Val::Sym(s)) => format!("#{s}"),
        }
    }

    /// Clamp an integer into a range domain; enum values pass through.
    pub fn clamp(&self, v: Val) -> Val {
        match (self, v) {
            (DomainDef::Range(lo, hi), Val::Int(i)) => Val::Int(i.clamp(*lo, *hi)),
            _ => v,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Val {
    /// Index into the owning field's enumeration.
    Sym(u16),
    Int(i64),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NamedCommand {
    pub name: String,
    pub cmd: Command,
}

/// A guarded command: `guard -> update`, where the update is a tree of
/// parallel assignments and conditionals with emitted call labels at the
/// leaves.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Command {
    pub guard: Expr,
    pub update: Update,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Update {
    Leaf { assigns: Vec<Assign>, emits: Vec<String> },
    If { cond: Expr, then_branch: Box<Update>, else_branch: Box<Update> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Assign {
    pub field: String,
    pub rhs: Arith,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Arith {
    Int(i64),
    /// Field reference or enumeration literal; resolved against the target
    /// field when the assignment is applied.
    Ident(String),
    Add(Box<Arith>, Box<Arith>),
    Sub(Box<Arith>, Box<Arith>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "/=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Atom {
    Ident(String),
    Int(i64),
}

/// Boolean expressions shared by guards, branch conditions, and coupling
/// relations. Identifiers resolve against whichever field lists are in
/// scope at evaluation time.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Const(bool),
    Cmp(CmpOp, Atom, Atom),
    In(Atom, Vec<Atom>),
    Not(Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    Implies(Box<Expr>, Box<Expr>),
    Iff(Box<Expr>, Box<Expr>),
}

/// A named coupling relation. The two parameter lists bind fresh names to
/// the abstract and concrete systems' fields, positionally; the expression
/// relates one valuation of each.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Couple {
    pub name: String,
    pub abs_params: Vec<String>,
    pub conc_params: Vec<String>,
    pub expr: Expr,
}
