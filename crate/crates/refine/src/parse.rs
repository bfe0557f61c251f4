//! Lexer and recursive-descent parser for the class and relation text format.
//!
//! All reported positions are 1-based line/column of the offending token.
//! Identifier use inside class bodies is validated while parsing, so guard
//! and update errors also carry positions. Coupling relation expressions
//! are only shape-checked here; enum literals in them are resolved when the
//! relation is bound to a pair of systems.

use crate::ast::*;
use crate::error::CheckError;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Int(i64),
    Class,
    Var,
    Method,
    Action,
    Couple,
    If,
    Then,
    Else,
    Emit,
    In,
    And,
    Or,
    Not,
    True,
    False,
    LBrace,
    RBrace,
    LParen,
    RParen,
    Comma,
    Colon,
    ColonColon,
    Gets,
    Arrow,
    Semi,
    Dot,
    DotDot,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Implies,
    Iff,
    Plus,
    Minus,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Int(i) => format!("integer `{i}`"),
            Tok::Eof => "end of input".to_string(),
            other => format!("`{}`", other.text()),
        }
    }

    fn text(&self) -> &'static str {
        match self {
            Tok::Class => "class",
            Tok::Var => "var",
            Tok::Method => "method",
            Tok::Action => "action",
            Tok::Couple => "couple",
            Tok::If => "if",
            Tok::Then => "then",
            Tok::Else => "else",
            Tok::Emit => "emit",
            Tok::In => "in",
            Tok::And => "and",
            Tok::Or => "or",
            Tok::Not => "not",
            Tok::True => "true",
            Tok::False => "false",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::Comma => ",",
            Tok::Colon => ":",
            Tok::ColonColon => "::",
            Tok::Gets => ":=",
            Tok::Arrow => "->",
            Tok::Semi => ";",
            Tok::Dot => ".",
            Tok::DotDot => "..",
            Tok::Eq => "=",
            Tok::Ne => "/=",
            Tok::Lt => "<",
            Tok::Le => "<=",
            Tok::Gt => ">",
            Tok::Ge => ">=",
            Tok::Implies => "=>",
            Tok::Iff => "<=>",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Ident(_) | Tok::Int(_) | Tok::Eof => "",
        }
    }
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: u32,
    col: u32,
}

fn lex(src: &str) -> Result<Vec<Token>, CheckError> {
    let mut out = Vec::new();
    let mut chars = src.chars().peekable();
    let mut line: u32 = 1;
    let mut col: u32 = 1;

    macro_rules! push {
        ($tok:expr, $l:expr, $c:expr) => {
            out.push(Token { tok: $tok, line: $l, col: $c })
        };
    }

    while let Some(&c) = chars.peek() {
        let (tl, tc) = (line, col);
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars>| {
            let c = chars.next().unwrap();
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            c
        };
        match c {
            ' ' | '\t' | '\r' | '\n' => {
                bump(&mut chars);
            }
            '#' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    bump(&mut chars);
                }
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let mut word = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        word.push(bump(&mut chars));
                    } else {
                        break;
                    }
                }
                let tok = match word.as_str() {
                    "class" => Tok::Class,
                    "var" => Tok::Var,
                    "method" => Tok::Method,
                    "action" => Tok::Action,
                    "couple" => Tok::Couple,
                    "if" => Tok::If,
                    "then" => Tok::Then,
                    "else" => Tok::Else,
                    "emit" => Tok::Emit,
                    "in" => Tok::In,
                    "and" => Tok::And,
                    "or" => Tok::Or,
                    "not" => Tok::Not,
                    "true" => Tok::True,
                    "false" => Tok::False,
                    _ => Tok::Ident(word),
                };
                push!(tok, tl, tc);
            }
            '0'..='9' => {
                let mut n: i64 = 0;
                while let Some(&c) = chars.peek() {
                    if let Some(d) = c.to_digit(10) {
                        n = n
                            .checked_mul(10)
                            .and_then(|n| n.checked_add(d as i64))
                            .ok_or_else(|| CheckError::parse(tl, tc, "integer literal overflows"))?;
                        bump(&mut chars);
                    } else {
                        break;
                    }
                }
                push!(Tok::Int(n), tl, tc);
            }
            '{' => {
                bump(&mut chars);
                push!(Tok::LBrace, tl, tc);
            }
            '}' => {
                bump(&mut chars);
                push!(Tok::RBrace, tl, tc);
            }
            '(' => {
                bump(&mut chars);
                push!(Tok::LParen, tl, tc);
            }
            ')' => {
                bump(&mut chars);
                push!(Tok::RParen, tl, tc);
            }
            ',' => {
                bump(&mut chars);
                push!(Tok::Comma, tl, tc);
            }
            ';' => {
                bump(&mut chars);
                push!(Tok::Semi, tl, tc);
            }
            '+' => {
                bump(&mut chars);
                push!(Tok::Plus, tl, tc);
            }
            ':' => {
                bump(&mut chars);
                match chars.peek() {
                    Some(':') => {
                        bump(&mut chars);
                        push!(Tok::ColonColon, tl, tc);
                    }
                    Some('=') => {
                        bump(&mut chars);
                        push!(Tok::Gets, tl, tc);
                    }
                    _ => push!(Tok::Colon, tl, tc),
                }
            }
            '-' => {
                bump(&mut chars);
                if chars.peek() == Some(&'>') {
                    bump(&mut chars);
                    push!(Tok::Arrow, tl, tc);
                } else {
                    push!(Tok::Minus, tl, tc);
                }
            }
            '.' => {
                bump(&mut chars);
                if chars.peek() == Some(&'.') {
                    bump(&mut chars);
                    push!(Tok::DotDot, tl, tc);
                } else {
                    push!(Tok::Dot, tl, tc);
                }
            }
            '=' => {
                bump(&mut chars);
                if chars.peek() == Some(&'>') {
                    bump(&mut chars);
                    push!(Tok::Implies, tl, tc);
                } else {
                    push!(Tok::Eq, tl, tc);
                }
            }
            '/' => {
                bump(&mut chars);
                if chars.peek() == Some(&'=') {
                    bump(&mut chars);
                    push!(Tok::Ne, tl, tc);
                } else {
                    return Err(CheckError::parse(tl, tc, "expected `/=`"));
                }
            }
            '<' => {
                bump(&mut chars);
                if chars.peek() == Some(&'=') {
                    bump(&mut chars);
                    if chars.peek() == Some(&'>') {
                        bump(&mut chars);
                        push!(Tok::Iff, tl, tc);
                    } else {
                        push!(Tok::Le, tl, tc);
                    }
                } else {
                    push!(Tok::Lt, tl, tc);
                }
            }
            '>' => {
                bump(&mut chars);
                if chars.peek() == Some(&'=') {
                    bump(&mut chars);
                    push!(Tok::Ge, tl, tc);
                } else {
                    push!(Tok::Gt, tl, tc);
                }
            }
            other => {
                return Err(CheckError::parse(tl, tc, format!("unexpected character `{other}`")));
            }
        }
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}

/// Where an expression is being parsed, for identifier validation.
enum ExprScope<'a> {
    /// Inside a class body: identifiers must be declared fields or enum
    /// literals of the field they are compared against.
    Class(&'a [FieldDef]),
    /// Inside a coupling relation: identifiers must be relation parameters
    /// or literals left for resolution at bind time.
    Couple { params: &'a [String] },
}

impl ExprScope<'_> {
    fn field<'b>(&'b self, name: &str) -> Option<&'b FieldDef> {
        match self {
            ExprScope::Class(fields) => fields.iter().find(|f| f.name == name),
            ExprScope::Couple { .. } => None,
        }
    }

    fn is_binding(&self, name: &str) -> bool {
        match self {
            ExprScope::Class(fields) => fields.iter().any(|f| f.name == name),
            ExprScope::Couple { params } => params.iter().any(|p| p == name),
        }
    }

    fn is_couple(&self) -> bool {
        matches!(self, ExprScope::Couple { .. })
    }
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn here(&self) -> (u32, u32) {
        let t = &self.toks[self.pos];
        (t.line, t.col)
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, CheckError> {
        let (line, col) = self.here();
        Err(CheckError::parse(line, col, msg.into()))
    }

    fn expect(&mut self, tok: Tok) -> Result<Token, CheckError> {
        if *self.peek() == tok {
            Ok(self.next())
        } else {
            self.err(format!("expected `{}`, found {}", tok.text(), self.peek().describe()))
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, u32, u32), CheckError> {
        let (line, col) = self.here();
        match self.peek().clone() {
            Tok::Ident(name) => {
                self.next();
                Ok((name, line, col))
            }
            other => self.err(format!("expected {what}, found {}", other.describe())),
        }
    }

    fn int(&mut self) -> Result<i64, CheckError> {
        let neg = if *self.peek() == Tok::Minus {
            self.next();
            true
        } else {
            false
        };
        match self.peek().clone() {
            Tok::Int(n) => {
                self.next();
                Ok(if neg { -n } else { n })
            }
            other => self.err(format!("expected integer, found {}", other.describe())),
        }
    }

    fn parse_file(&mut self) -> Result<SpecFile, CheckError> {
        let mut file = SpecFile::default();
        loop {
            match self.peek() {
                Tok::Eof => break,
                Tok::Class => {
                    let gts = self.parse_class(&file)?;
                    file.systems.push(gts);
                }
                Tok::Couple => {
                    let couple = self.parse_couple(&file)?;
                    file.couples.push(couple);
                }
                other => {
                    let d = other.describe();
                    return self.err(format!("expected `class` or `couple`, found {d}"));
                }
            }
        }
        Ok(file)
    }

    fn parse_class(&mut self, file: &SpecFile) -> Result<Gts, CheckError> {
        self.expect(Tok::Class)?;
        let (name, nl, nc) = self.ident("class name")?;
        if file.system(&name).is_some() {
            return Err(CheckError::parse(nl, nc, format!("duplicate class name `{name}`")));
        }
        let mut gts = Gts { name, fields: Vec::new(), methods: Vec::new(), actions: Vec::new() };
        loop {
            match self.peek() {
                Tok::Var => {
                    self.next();
                    let (fname, fl, fc) = self.ident("field name")?;
                    if gts.field_index(&fname).is_some() {
                        return Err(CheckError::parse(
                            fl,
                            fc,
                            format!("duplicate field `{fname}` in class `{}`", gts.name),
                        ));
                    }
                    self.expect(Tok::Colon)?;
                    let domain = self.parse_domain()?;
                    self.expect(Tok::Eq)?;
                    let (il, ic) = self.here();
                    let init = self.parse_value(&domain)?;
                    if !domain.contains(init) {
                        return Err(CheckError::parse(
                            il,
                            ic,
                            format!(
                                "initial value {} lies outside the domain of `{fname}`",
                                domain.show(init)
                            ),
                        ));
                    }
                    gts.fields.push(FieldDef { name: fname, domain, init });
                }
                Tok::Method => {
                    self.next();
                    let (mname, ml, mc) = self.ident("method name")?;
                    if gts.method(&mname).is_some() {
                        return Err(CheckError::parse(
                            ml,
                            mc,
                            format!("duplicate method `{mname}` in class `{}`", gts.name),
                        ));
                    }
                    self.expect(Tok::LParen)?;
                    self.expect(Tok::RParen)?;
                    self.expect(Tok::ColonColon)?;
                    let cmd = self.parse_command(&gts.fields)?;
                    gts.methods.push(NamedCommand { name: mname, cmd });
                }
                Tok::Action => {
                    self.next();
                    self.expect(Tok::ColonColon)?;
                    let cmd = self.parse_command(&gts.fields)?;
                    gts.actions.push(cmd);
                }
                _ => break,
            }
        }
        Ok(gts)
    }

    fn parse_domain(&mut self) -> Result<DomainDef, CheckError> {
        if *self.peek() == Tok::LBrace {
            self.next();
            let mut names = Vec::new();
            loop {
                let (n, l, c) = self.ident("enumeration value")?;
                if names.contains(&n) {
                    return Err(CheckError::parse(l, c, format!("duplicate enumeration value `{n}`")));
                }
                names.push(n);
                if *self.peek() == Tok::Comma {
                    self.next();
                } else {
                    break;
                }
            }
            self.expect(Tok::RBrace)?;
            Ok(DomainDef::Enum(names))
        } else {
            let (ll, lc) = self.here();
            let lo = self.int()?;
            self.expect(Tok::DotDot)?;
            let hi = self.int()?;
            if lo > hi {
                return Err(CheckError::parse(ll, lc, format!("empty range {lo} .. {hi}")));
            }
            Ok(DomainDef::Range(lo, hi))
        }
    }

    fn parse_value(&mut self, domain: &DomainDef) -> Result<Val, CheckError> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                let (l, c) = self.here();
                self.next();
                match domain.sym(&name) {
                    Some(s) => Ok(Val::Sym(s)),
                    None => Err(CheckError::parse(l, c, format!("`{name}` is not a value of this domain"))),
                }
            }
            _ => Ok(Val::Int(self.int()?)),
        }
    }

    fn parse_command(&mut self, fields: &[FieldDef]) -> Result<Command, CheckError> {
        let scope = ExprScope::Class(fields);
        let guard = self.parse_expr(&scope)?;
        self.expect(Tok::Arrow)?;
        let update = self.parse_update(fields)?;
        Ok(Command { guard, update })
    }

    fn parse_update(&mut self, fields: &[FieldDef]) -> Result<Update, CheckError> {
        if *self.peek() == Tok::If {
            self.next();
            let scope = ExprScope::Class(fields);
            let cond = self.parse_expr(&scope)?;
            self.expect(Tok::Then)?;
            let then_branch = Box::new(self.parse_update(fields)?);
            self.expect(Tok::Else)?;
            let else_branch = Box::new(self.parse_update(fields)?);
            return Ok(Update::If { cond, then_branch, else_branch });
        }
        let mut assigns = Vec::new();
        loop {
            assigns.push(self.parse_assign(fields)?);
            if *self.peek() == Tok::Comma {
                self.next();
            } else {
                break;
            }
        }
        let mut emits = Vec::new();
        while *self.peek() == Tok::Semi {
            self.next();
            self.expect(Tok::Emit)?;
            emits.push(self.parse_label()?);
        }
        Ok(Update::Leaf { assigns, emits })
    }

    fn parse_label(&mut self) -> Result<String, CheckError> {
        let (mut label, ..) = self.ident("call label")?;
        while *self.peek() == Tok::Dot {
            self.next();
            let (part, ..) = self.ident("call label part")?;
            label.push('.');
            label.push_str(&part);
        }
        Ok(label)
    }

    fn parse_assign(&mut self, fields: &[FieldDef]) -> Result<Assign, CheckError> {
        let (fname, fl, fc) = self.ident("field name")?;
        let target = fields
            .iter()
            .find(|f| f.name == fname)
            .ok_or_else(|| CheckError::parse(fl, fc, format!("assignment to unknown field `{fname}`")))?;
        self.expect(Tok::Gets)?;
        let (rl, rc) = self.here();
        let rhs = self.parse_arith(fields)?;
        validate_rhs(&rhs, target, fields).map_err(|msg| CheckError::parse(rl, rc, msg))?;
        Ok(Assign { field: fname, rhs })
    }

    fn parse_arith(&mut self, fields: &[FieldDef]) -> Result<Arith, CheckError> {
        let mut lhs = self.parse_arith_term(fields)?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.next();
                    let rhs = self.parse_arith_term(fields)?;
                    lhs = Arith::Add(Box::new(lhs), Box::new(rhs));
                }
                Tok::Minus => {
                    self.next();
                    let rhs = self.parse_arith_term(fields)?;
                    lhs = Arith::Sub(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn parse_arith_term(&mut self, _fields: &[FieldDef]) -> Result<Arith, CheckError> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                self.next();
                Ok(Arith::Ident(name))
            }
            Tok::Int(_) | Tok::Minus => Ok(Arith::Int(self.int()?)),
            other => self.err(format!("expected value, found {}", other.describe())),
        }
    }

    fn parse_couple(&mut self, file: &SpecFile) -> Result<Couple, CheckError> {
        self.expect(Tok::Couple)?;
        let (name, nl, nc) = self.ident("relation name")?;
        if file.couple(&name).is_some() {
            return Err(CheckError::parse(nl, nc, format!("duplicate relation name `{name}`")));
        }
        let abs_params = self.parse_param_list()?;
        let conc_params = self.parse_param_list()?;
        for p in &conc_params {
            if abs_params.contains(p) {
                return self.err(format!("relation parameter `{p}` bound on both sides"));
            }
        }
        self.expect(Tok::ColonColon)?;
        let mut params = abs_params.clone();
        params.extend(conc_params.iter().cloned());
        let scope = ExprScope::Couple { params: &params };
        let expr = self.parse_expr(&scope)?;
        Ok(Couple { name, abs_params, conc_params, expr })
    }

    fn parse_param_list(&mut self) -> Result<Vec<String>, CheckError> {
        self.expect(Tok::LParen)?;
        let mut params = Vec::new();
        if *self.peek() != Tok::RParen {
            loop {
                let (p, l, c) = self.ident("relation parameter")?;
                if params.contains(&p) {
                    return Err(CheckError::parse(l, c, format!("duplicate relation parameter `{p}`")));
                }
                params.push(p);
                if *self.peek() == Tok::Comma {
                    self.next();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RParen)?;
        Ok(params)
    }

    // Precedence, loosest first: <=> (right), => (right), or, and, not, atoms.
    fn parse_expr(&mut self, scope: &ExprScope) -> Result<Expr, CheckError> {
        let lhs = self.parse_implies(scope)?;
        if *self.peek() == Tok::Iff {
            self.next();
            let rhs = self.parse_expr(scope)?;
            return Ok(Expr::Iff(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn parse_implies(&mut self, scope: &ExprScope) -> Result<Expr, CheckError> {
        let lhs = self.parse_or(scope)?;
        if *self.peek() == Tok::Implies {
            self.next();
            let rhs = self.parse_implies(scope)?;
            return Ok(Expr::Implies(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn parse_or(&mut self, scope: &ExprScope) -> Result<Expr, CheckError> {
        let mut lhs = self.parse_and(scope)?;
        while *self.peek() == Tok::Or {
            self.next();
            let rhs = self.parse_and(scope)?;
            lhs = Expr::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn parse_and(&mut self, scope: &ExprScope) -> Result<Expr, CheckError> {
        let mut lhs = self.parse_unary(scope)?;
        while *self.peek() == Tok::And {
            self.next();
            let rhs = self.parse_unary(scope)?;
            lhs = Expr::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn parse_unary(&mut self, scope: &ExprScope) -> Result<Expr, CheckError> {
        if *self.peek() == Tok::Not {
            self.next();
            let inner = self.parse_unary(scope)?;
            return Ok(Expr::Not(Box::new(inner)));
        }
        self.parse_atom_expr(scope)
    }

    fn parse_atom_expr(&mut self, scope: &ExprScope) -> Result<Expr, CheckError> {
        match self.peek().clone() {
            Tok::True => {
                self.next();
                Ok(Expr::Const(true))
            }
            Tok::False => {
                self.next();
                Ok(Expr::Const(false))
            }
            Tok::LParen => {
                self.next();
                let inner = self.parse_expr(scope)?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            Tok::Ident(_) | Tok::Int(_) | Tok::Minus => {
                let (ll, lc) = self.here();
                let lhs = self.parse_atom()?;
                match self.peek().clone() {
                    Tok::In => {
                        self.next();
                        self.expect(Tok::LBrace)?;
                        let mut items = Vec::new();
                        loop {
                            let (il, ic) = self.here();
                            let item = self.parse_atom()?;
                            validate_set_item(&lhs, &item, scope)
                                .map_err(|msg| CheckError::parse(il, ic, msg))?;
                            items.push(item);
                            if *self.peek() == Tok::Comma {
                                self.next();
                            } else {
                                break;
                            }
                        }
                        self.expect(Tok::RBrace)?;
                        validate_membership(&lhs, scope).map_err(|msg| CheckError::parse(ll, lc, msg))?;
                        Ok(Expr::In(lhs, items))
                    }
                    op @ (Tok::Eq | Tok::Ne | Tok::Lt | Tok::Le | Tok::Gt | Tok::Ge) => {
                        self.next();
                        let rhs = self.parse_atom()?;
                        let op = match op {
                            Tok::Eq => CmpOp::Eq,
                            Tok::Ne => CmpOp::Ne,
                            Tok::Lt => CmpOp::Lt,
                            Tok::Le => CmpOp::Le,
                            Tok::Gt => CmpOp::Gt,
                            _ => CmpOp::Ge,
                        };
                        validate_cmp(op, &lhs, &rhs, scope)
                            .map_err(|msg| CheckError::parse(ll, lc, msg))?;
                        Ok(Expr::Cmp(op, lhs, rhs))
                    }
                    other => {
                        self.err(format!("expected comparison operator, found {}", other.describe()))
                    }
                }
            }
            other => self.err(format!("expected expression, found {}", other.describe())),
        }
    }

    fn parse_atom(&mut self) -> Result<Atom, CheckError> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                self.next();
                Ok(Atom::Ident(name))
            }
            Tok::Int(_) | Tok::Minus => Ok(Atom::Int(self.int()?)),
            other => self.err(format!("expected value, found {}", other.describe())),
        }
    }
}

fn is_int_field(def: &FieldDef) -> bool {
    matches!(def.domain, DomainDef::Range(..))
}

/// Comparison validation. In class scope every identifier must resolve as a
/// field or as an enum literal of the field on the other side; in couple
/// scope at least one side must be a relation parameter and literal names
/// are deferred to bind time.
fn validate_cmp(op: CmpOp, lhs: &Atom, rhs: &Atom, scope: &ExprScope) -> Result<(), String> {
    let numeric = matches!(op, CmpOp::Lt | CmpOp::Le | CmpOp::Gt | CmpOp::Ge);
    let sides = [lhs, rhs];
    let bound: Vec<bool> = sides
        .iter()
        .map(|a| matches!(a, Atom::Ident(n) if scope.is_binding(n)))
        .collect();
    if !bound[0] && !bound[1] {
        let name = sides.iter().find_map(|a| match a {
            Atom::Ident(n) => Some(n.clone()),
            Atom::Int(_) => None,
        });
        return match name {
            Some(n) => Err(format!("unknown identifier `{n}`")),
            None => Err("comparison relates two constants".to_string()),
        };
    }
    if scope.is_couple() {
        // Domains are unknown until the relation is bound; only check that
        // numeric comparisons do not use unresolvable names.
        if numeric {
            for (a, b) in sides.iter().zip(&bound) {
                if let (Atom::Ident(n), false) = (a, b) {
                    return Err(format!("unknown identifier `{n}` in ordered comparison"));
                }
            }
        }
        return Ok(());
    }
    for (i, side) in sides.iter().enumerate() {
        match side {
            Atom::Ident(name) => {
                if let Some(def) = scope.field(name) {
                    if numeric && !is_int_field(def) {
                        return Err(format!("field `{name}` is not numeric"));
                    }
                } else {
                    // Must be an enum literal of the opposite field.
                    let other = sides[1 - i];
                    let Atom::Ident(other_name) = other else {
                        return Err(format!("unknown identifier `{name}`"));
                    };
                    let Some(def) = scope.field(other_name) else {
                        return Err(format!("unknown identifier `{name}`"));
                    };
                    if def.domain.sym(name).is_none() {
                        return Err(format!(
                            "`{name}` is not a value of field `{other_name}`"
                        ));
                    }
                    if numeric {
                        return Err(format!("enumeration value `{name}` is not numeric"));
                    }
                }
            }
            Atom::Int(_) => {
                if !numeric {
                    let other = sides[1 - i];
                    if let Atom::Ident(other_name) = other {
                        if let Some(def) = scope.field(other_name) {
                            if !is_int_field(def) {
                                return Err(format!("field `{other_name}` is not numeric"));
                            }
                        }
                    }
                } else if let Atom::Ident(other_name) = sides[1 - i] {
                    if let Some(def) = scope.field(other_name) {
                        if !is_int_field(def) {
                            return Err(format!("field `{other_name}` is not numeric"));
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

fn validate_membership(lhs: &Atom, scope: &ExprScope) -> Result<(), String> {
    match lhs {
        Atom::Ident(name) if scope.is_binding(name) => Ok(()),
        Atom::Ident(name) => Err(format!("unknown identifier `{name}`")),
        Atom::Int(_) => Err("set membership needs a field on the left".to_string()),
    }
}

fn validate_set_item(lhs: &Atom, item: &Atom, scope: &ExprScope) -> Result<(), String> {
    if scope.is_couple() {
        return Ok(());
    }
    let Atom::Ident(lhs_name) = lhs else {
        return Ok(());
    };
    let Some(def) = scope.field(lhs_name) else {
        return Ok(());
    };
    match item {
        Atom::Ident(name) => match def.domain.sym(name) {
            Some(_) => Ok(()),
            None => Err(format!("`{name}` is not a value of field `{lhs_name}`")),
        },
        Atom::Int(_) => {
            if is_int_field(def) {
                Ok(())
            } else {
                Err(format!("field `{lhs_name}` is not numeric"))
            }
        }
    }
}

/// Assignment right-hand sides: enum targets take a literal of their own
/// domain or a copy of an identically-typed field; numeric targets take
/// integer arithmetic over numeric fields and constants.
fn validate_rhs(rhs: &Arith, target: &FieldDef, fields: &[FieldDef]) -> Result<(), String> {
    match &target.domain {
        DomainDef::Enum(_) => match rhs {
            Arith::Ident(name) => {
                if target.domain.sym(name).is_some() {
                    return Ok(());
                }
                if let Some(src) = fields.iter().find(|f| f.name == *name) {
                    if src.domain == target.domain {
                        return Ok(());
                    }
                    return Err(format!(
                        "cannot assign field `{name}` to `{}`: domains differ",
                        target.name
                    ));
                }
                Err(format!("`{name}` is not a value of field `{}`", target.name))
            }
            Arith::Int(_) => Err(format!("field `{}` is not numeric", target.name)),
            Arith::Add(..) | Arith::Sub(..) => {
                Err(format!("arithmetic cannot produce a value for `{}`", target.name))
            }
        },
        DomainDef::Range(..) => check_numeric_rhs(rhs, fields),
    }
}

fn check_numeric_rhs(rhs: &Arith, fields: &[FieldDef]) -> Result<(), String> {
    match rhs {
        Arith::Int(_) => Ok(()),
        Arith::Ident(name) => match fields.iter().find(|f| f.name == *name) {
            Some(def) if is_int_field(def) => Ok(()),
            Some(_) => Err(format!("field `{name}` is not numeric")),
            None => Err(format!("unknown identifier `{name}`")),
        },
        Arith::Add(a, b) | Arith::Sub(a, b) => {
            check_numeric_rhs(a, fields)?;
            check_numeric_rhs(b, fields)
        }
    }
}

/// Parse a complete spec file. Empty input yields empty sets.
pub fn parse_spec(src: &str) -> Result<SpecFile, CheckError> {
    let toks = lex(src)?;
    let mut parser = Parser { toks, pos: 0 };
    parser.parse_file()
}
