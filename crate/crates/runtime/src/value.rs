use std::fmt;

/// Index of a field within its class, in declaration order.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct FieldId(pub usize);

/// Index of a constructor parameter within its class, in declaration order.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct ParamId(pub usize);

/// Symbolic constant: an index into the declaring field's enum domain.
pub type Sym = u16;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Value {
    Bool(bool),
    Int(i64),
    Sym(Sym),
}

impl Value {
    pub fn kind(&self) -> &'static str {
        match self {
            Value::Bool(_) => "bool",
            Value::Int(_) => "int",
            Value::Sym(_) => "sym",
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Int(i) => write!(f, "{i}"),
            Value::Sym(s) => write!(f, "#{s}"),
        }
    }
}

/// Declared domain of a field. Scenario fields are finite; `Int` is the
/// unbounded escape hatch for callers that want plain counters.
#[derive(Clone, Debug)]
pub enum Domain {
    Bool,
    /// Inclusive integer range.
    IntRange { lo: i64, hi: i64 },
    /// Unbounded integer.
    Int,
    /// Named enumeration; values are `Sym` indices into this list.
    Enum(Vec<String>),
}

impl Domain {
    pub fn contains(&self, v: Value) -> bool {
        match (self, v) {
            (Domain::Bool, Value::Bool(_)) => true,
            (Domain::IntRange { lo, hi }, Value::Int(i)) => *lo <= i && i <= *hi,
            (Domain::Int, Value::Int(_)) => true,
            (Domain::Enum(names), Value::Sym(s)) => (s as usize) < names.len(),
            _ => false,
        }
    }

    /// Number of distinct values, when finite.
    pub fn size(&self) -> Option<u64> {
        match self {
            Domain::Bool => Some(2),
            Domain::IntRange { lo, hi } => Some((hi - lo + 1) as u64),
            Domain::Int => None,
            Domain::Enum(names) => Some(names.len() as u64),
        }
    }

    pub fn sym_of(&self, name: &str) -> Option<Sym> {
        match self {
            Domain::Enum(names) => names.iter().position(|n| n == name).map(|i| i as Sym),
            _ => None,
        }
    }
}

/// Read-only view over an object's fields, handed to guard closures.
pub struct Fields<'a> {
    values: &'a [Value],
}

impl<'a> Fields<'a> {
    pub(crate) fn new(values: &'a [Value]) -> Self {
        Fields { values }
    }

    pub fn get(&self, f: FieldId) -> Value {
        self.values[f.0]
    }

    pub fn bool_(&self, f: FieldId) -> bool {
        match self.values[f.0] {
            Value::Bool(b) => b,
            other => panic!("field {} is {}, not bool", f.0, other.kind()),
        }
    }

    pub fn int(&self, f: FieldId) -> i64 {
        match self.values[f.0] {
            Value::Int(i) => i,
            other => panic!("field {} is {}, not int", f.0, other.kind()),
        }
    }

    pub fn sym(&self, f: FieldId) -> Sym {
        match self.values[f.0] {
            Value::Sym(s) => s,
            other => panic!("field {} is {}, not sym", f.0, other.kind()),
        }
    }
}
