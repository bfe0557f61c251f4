use std::sync::Arc;

use crate::error::RuntimeError;
use crate::value::{Domain, FieldId, Fields, ParamId, Sym, Value};

pub type GuardFn = Arc<dyn Fn(&Fields) -> bool + Send + Sync>;
pub type SegmentFn = Arc<dyn Fn(&mut SegmentCtx) -> Result<(), RuntimeError> + Send + Sync>;

/// Mutable view over an object's fields for the duration of one segment.
/// Writes are domain-checked immediately; a segment that declares an
/// outgoing call decides whether to place it via [`SegmentCtx::fire_call`].
pub struct SegmentCtx<'a> {
    class: &'a ClassDescriptor,
    values: &'a mut [Value],
    has_call: bool,
    fired: bool,
    tag: u64,
}

impl<'a> SegmentCtx<'a> {
    pub(crate) fn new(
        class: &'a ClassDescriptor,
        values: &'a mut [Value],
        has_call: bool,
        tag: u64,
    ) -> Self {
        SegmentCtx { class, values, has_call, fired: false, tag }
    }

    pub(crate) fn fired(&self) -> bool {
        self.fired
    }

    /// Actor tag of the activation executing this segment. Objects carry the
    /// tag they were created with; it travels through nested calls so event
    /// sinks can attribute work to the originating actor.
    pub fn tag(&self) -> u64 {
        self.tag
    }

    pub fn fields(&self) -> Fields<'_> {
        Fields::new(self.values)
    }

    pub fn get(&self, f: FieldId) -> Value {
        self.values[f.0]
    }

    pub fn bool_(&self, f: FieldId) -> bool {
        self.fields().bool_(f)
    }

    pub fn int(&self, f: FieldId) -> i64 {
        self.fields().int(f)
    }

    pub fn sym(&self, f: FieldId) -> Sym {
        self.fields().sym(f)
    }

    pub fn set(&mut self, f: FieldId, v: Value) -> Result<(), RuntimeError> {
        let decl = &self.class.fields[f.0];
        if !decl.domain.contains(v) {
            return Err(RuntimeError::DomainViolation {
                class: self.class.name.clone(),
                field: decl.name.clone(),
                value: v.to_string(),
            });
        }
        self.values[f.0] = v;
        Ok(())
    }

    pub fn set_bool(&mut self, f: FieldId, v: bool) -> Result<(), RuntimeError> {
        self.set(f, Value::Bool(v))
    }

    pub fn set_int(&mut self, f: FieldId, v: i64) -> Result<(), RuntimeError> {
        self.set(f, Value::Int(v))
    }

    pub fn set_sym(&mut self, f: FieldId, v: Sym) -> Result<(), RuntimeError> {
        self.set(f, Value::Sym(v))
    }

    /// Place the segment's declared outgoing call. The call happens after the
    /// segment's field updates commit and the object's exclusion is released.
    pub fn fire_call(&mut self) -> Result<(), RuntimeError> {
        if !self.has_call {
            return Err(RuntimeError::FireWithoutCall);
        }
        if self.fired {
            return Err(RuntimeError::DoubleFire);
        }
        self.fired = true;
        Ok(())
    }
}

/// Outgoing call site: method `method` on the object bound to ctor
/// parameter `param`. Resolved against the registry when the class is
/// registered.
#[derive(Clone, Debug)]
pub struct CallSpec {
    pub param: String,
    pub method: String,
}

pub struct Segment {
    pub run: SegmentFn,
    pub call: Option<CallSpec>,
}

pub struct Body {
    pub guard: GuardFn,
    pub segments: Vec<Segment>,
}

impl Body {
    /// Body whose guard is always true.
    pub fn unguarded() -> Self {
        Body { guard: Arc::new(|_| true), segments: Vec::new() }
    }

    pub fn when(guard: impl Fn(&Fields) -> bool + Send + Sync + 'static) -> Self {
        Body { guard: Arc::new(guard), segments: Vec::new() }
    }

    /// Append a call-free segment.
    pub fn seg(
        mut self,
        run: impl Fn(&mut SegmentCtx) -> Result<(), RuntimeError> + Send + Sync + 'static,
    ) -> Self {
        self.segments.push(Segment { run: Arc::new(run), call: None });
        self
    }

    /// Append a segment that may place one call to `param.method()`;
    /// the update closure decides via [`SegmentCtx::fire_call`].
    pub fn seg_call(
        mut self,
        run: impl Fn(&mut SegmentCtx) -> Result<(), RuntimeError> + Send + Sync + 'static,
        param: &str,
        method: &str,
    ) -> Self {
        self.segments.push(Segment {
            run: Arc::new(run),
            call: Some(CallSpec { param: param.into(), method: method.into() }),
        });
        self
    }

    /// Append a segment that unconditionally calls `param.method()`.
    pub fn call(self, param: &str, method: &str) -> Self {
        self.seg_call(|ctx| ctx.fire_call(), param, method)
    }
}

pub struct MethodDescriptor {
    pub name: String,
    pub body: Body,
}

pub struct ActionDescriptor {
    pub name: String,
    pub body: Body,
}

pub struct ParamDecl {
    pub name: String,
    pub class: String,
}

pub struct FieldDecl {
    pub name: String,
    pub domain: Domain,
    pub init: Value,
}

pub struct ClassDescriptor {
    pub name: String,
    pub params: Vec<ParamDecl>,
    pub fields: Vec<FieldDecl>,
    pub methods: Vec<MethodDescriptor>,
    pub actions: Vec<ActionDescriptor>,
}

impl ClassDescriptor {
    pub fn field_id(&self, name: &str) -> Option<FieldId> {
        self.fields.iter().position(|f| f.name == name).map(FieldId)
    }

    pub fn param_id(&self, name: &str) -> Option<ParamId> {
        self.params.iter().position(|p| p.name == name).map(ParamId)
    }

    pub fn method_id(&self, name: &str) -> Option<usize> {
        self.methods.iter().position(|m| m.name == name)
    }

    /// Resolve an enum constant of field `field`.
    pub fn sym(&self, field: &str, name: &str) -> Option<Sym> {
        let id = self.field_id(field)?;
        self.fields[id.0].domain.sym_of(name)
    }

    fn check(&self) -> Result<(), RuntimeError> {
        let fail = |reason: String| -> Result<(), RuntimeError> {
            Err(RuntimeError::InvalidClass { class: self.name.clone(), reason })
        };
        for (i, f) in self.fields.iter().enumerate() {
            if self.fields[..i].iter().any(|g| g.name == f.name) {
                return fail(format!("duplicate field `{}`", f.name));
            }
            if let Domain::Enum(names) = &f.domain {
                if names.is_empty() {
                    return fail(format!("field `{}` has an empty enumeration", f.name));
                }
            }
            if let Domain::IntRange { lo, hi } = f.domain {
                if lo > hi {
                    return fail(format!("field `{}` has an empty range", f.name));
                }
            }
            if !f.domain.contains(f.init) {
                return Err(RuntimeError::DomainViolation {
                    class: self.name.clone(),
                    field: f.name.clone(),
                    value: f.init.to_string(),
                });
            }
        }
        for (i, p) in self.params.iter().enumerate() {
            if self.params[..i].iter().any(|q| q.name == p.name) {
                return fail(format!("duplicate parameter `{}`", p.name));
            }
        }
        for (i, m) in self.methods.iter().enumerate() {
            if self.methods[..i].iter().any(|n| n.name == m.name) {
                return fail(format!("duplicate method `{}`", m.name));
            }
        }
        let bodies = self
            .methods
            .iter()
            .map(|m| (&m.name, &m.body))
            .chain(self.actions.iter().map(|a| (&a.name, &a.body)));
        for (name, body) in bodies {
            if body.segments.is_empty() {
                return fail(format!("`{name}` has no segments"));
            }
            for seg in &body.segments[..body.segments.len() - 1] {
                if seg.call.is_none() {
                    return fail(format!(
                        "`{name}`: only the final segment may omit a call; merge the updates"
                    ));
                }
            }
            for seg in &body.segments {
                if let Some(call) = &seg.call {
                    if self.param_id(&call.param).is_none() {
                        return fail(format!(
                            "`{name}` calls through unknown parameter `{}`",
                            call.param
                        ));
                    }
                }
            }
        }
        Ok(())
    }
}

pub struct ClassBuilder {
    desc: ClassDescriptor,
}

impl ClassBuilder {
    pub fn new(name: &str) -> Self {
        ClassBuilder {
            desc: ClassDescriptor {
                name: name.into(),
                params: Vec::new(),
                fields: Vec::new(),
                methods: Vec::new(),
                actions: Vec::new(),
            },
        }
    }

    pub fn param(mut self, name: &str, class: &str) -> Self {
        self.desc.params.push(ParamDecl { name: name.into(), class: class.into() });
        self
    }

    pub fn field_enum(mut self, name: &str, values: &[&str], init: &str) -> Self {
        let names: Vec<String> = values.iter().map(|s| s.to_string()).collect();
        let init_sym = names.iter().position(|n| n == init).unwrap_or(names.len()) as Sym;
        self.desc.fields.push(FieldDecl {
            name: name.into(),
            domain: Domain::Enum(names),
            init: Value::Sym(init_sym),
        });
        self
    }

    pub fn field_bool(mut self, name: &str, init: bool) -> Self {
        self.desc.fields.push(FieldDecl {
            name: name.into(),
            domain: Domain::Bool,
            init: Value::Bool(init),
        });
        self
    }

    pub fn field_int(mut self, name: &str, lo: i64, hi: i64, init: i64) -> Self {
        self.desc.fields.push(FieldDecl {
            name: name.into(),
            domain: Domain::IntRange { lo, hi },
            init: Value::Int(init),
        });
        self
    }

    pub fn field_int_free(mut self, name: &str, init: i64) -> Self {
        self.desc.fields.push(FieldDecl {
            name: name.into(),
            domain: Domain::Int,
            init: Value::Int(init),
        });
        self
    }

    pub fn method(mut self, name: &str, body: Body) -> Self {
        self.desc.methods.push(MethodDescriptor { name: name.into(), body });
        self
    }

    pub fn action(mut self, name: &str, body: Body) -> Self {
        self.desc.actions.push(ActionDescriptor { name: name.into(), body });
        self
    }

    pub fn build(self) -> Result<ClassDescriptor, RuntimeError> {
        self.desc.check()?;
        Ok(self.desc)
    }
}
