use std::collections::{HashMap, HashSet};

use super::ast::*;
use super::LangError;

/// Static type of an expression. `Null` is the type of the `null` literal and
/// is compatible with every class type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExprType {
    Int,
    Bool,
    Null,
    Class(String),
    Void,
}

impl ExprType {
    fn from_type(t: &Type) -> Self {
        match t {
            Type::Int => ExprType::Int,
            Type::Bool => ExprType::Bool,
            Type::Class(c) => ExprType::Class(c.clone()),
        }
    }

    fn describe(&self) -> String {
        match self {
            ExprType::Int => "Int".into(),
            ExprType::Bool => "Bool".into(),
            ExprType::Null => "null".into(),
            ExprType::Class(c) => c.clone(),
            ExprType::Void => "Void".into(),
        }
    }

    fn assignable_to(&self, target: &Type) -> bool {
        match (self, target) {
            (ExprType::Int, Type::Int) | (ExprType::Bool, Type::Bool) => true,
            (ExprType::Null, Type::Class(_)) => true,
            (ExprType::Class(a), Type::Class(b)) => a == b,
            _ => false,
        }
    }
}

/// Types of every expression node, keyed by node id.
#[derive(Debug, Clone, Default)]
pub struct TypeInfo {
    pub expr_types: HashMap<NodeId, ExprType>,
}

pub fn check_program(program: &Program) -> Result<TypeInfo, LangError> {
    let mut info = TypeInfo::default();
    let mut class_names = HashSet::new();
    for class in &program.classes {
        if !class_names.insert(class.name.as_str()) {
            return Err(LangError::DuplicateName {
                name: class.name.clone(),
                scope: "program".into(),
            });
        }
    }
    for class in &program.classes {
        check_class_header(program, class)?;
    }
    for class in &program.classes {
        for ctor in &class.constructors {
            let mut cx = Checker::new(program, class, false, None, &mut info);
            cx.bind_params(&ctor.params, "constructor")?;
            cx.block(&ctor.body)?;
        }
        for m in &class.methods {
            let mut cx = Checker::new(program, class, m.is_static, m.ret.clone(), &mut info);
            cx.bind_params(&m.params, &m.name)?;
            cx.block(&m.body)?;
            if m.ret.is_some() && !always_returns(&m.body) {
                return Err(LangError::Type {
                    node: m.body.last().map_or(NodeId::default(), |s| s.id),
                    line: m.pos.line,
                    col: m.pos.col,
                    message: format!("method `{}` may finish without returning a value", m.name),
                });
            }
        }
    }
    Ok(info)
}

fn check_type_exists(program: &Program, ty: &Type, pos: Pos) -> Result<(), LangError> {
    if let Type::Class(c) = ty {
        if program.class(c).is_none() {
            return Err(LangError::Type {
                node: NodeId::default(),
                line: pos.line,
                col: pos.col,
                message: format!("unknown type `{c}`"),
            });
        }
    }
    Ok(())
}

fn check_class_header(program: &Program, class: &ClassDecl) -> Result<(), LangError> {
    let scope = format!("class {}", class.name);
    let mut names = HashSet::new();
    for f in &class.fields {
        if !names.insert(f.name.as_str()) {
            return Err(LangError::DuplicateName { name: f.name.clone(), scope });
        }
        check_type_exists(program, &f.ty, class.pos)?;
    }
    for c in &class.constants {
        if !names.insert(c.name.as_str()) {
            return Err(LangError::DuplicateName { name: c.name.clone(), scope });
        }
    }
    let mut methods = HashSet::new();
    for m in &class.methods {
        if !methods.insert(m.name.as_str()) {
            return Err(LangError::DuplicateName { name: m.name.clone(), scope });
        }
        for p in &m.params {
            check_type_exists(program, &p.ty, m.pos)?;
        }
        if let Some(t) = &m.ret {
            check_type_exists(program, t, m.pos)?;
        }
    }
    let mut arities = HashSet::new();
    for c in &class.constructors {
        if !arities.insert(c.params.len()) {
            return Err(LangError::DuplicateName {
                name: format!("constructor/{}", c.params.len()),
                scope,
            });
        }
        for p in &c.params {
            check_type_exists(program, &p.ty, c.pos)?;
        }
    }
    Ok(())
}

fn always_returns(stmts: &[Stmt]) -> bool {
    stmts.iter().any(|s| match &s.kind {
        StmtKind::Return(_) => true,
        StmtKind::If {
            then_branch,
            else_branch: Some(els),
            ..
        } => always_returns(then_branch) && always_returns(els),
        _ => false,
    })
}

struct Checker<'a> {
    program: &'a Program,
    class: &'a ClassDecl,
    is_static: bool,
    ret: Option<Type>,
    locals: Vec<(String, Type)>,
    info: &'a mut TypeInfo,
}

impl<'a> Checker<'a> {
    fn new(
        program: &'a Program,
        class: &'a ClassDecl,
        is_static: bool,
        ret: Option<Type>,
        info: &'a mut TypeInfo,
    ) -> Self {
        Checker {
            program,
            class,
            is_static,
            ret,
            locals: Vec::new(),
            info,
        }
    }

    fn bind_params(&mut self, params: &[Param], owner: &str) -> Result<(), LangError> {
        for p in params {
            if self.locals.iter().any(|(n, _)| *n == p.name) {
                return Err(LangError::DuplicateName {
                    name: p.name.clone(),
                    scope: format!("{}.{owner}", self.class.name),
                });
            }
            self.locals.push((p.name.clone(), p.ty.clone()));
        }
        Ok(())
    }

    fn err<T>(&self, node: NodeId, pos: Pos, message: String) -> Result<T, LangError> {
        Err(LangError::Type {
            node,
            line: pos.line,
            col: pos.col,
            message,
        })
    }

    fn local(&self, name: &str) -> Option<&Type> {
        self.locals.iter().rev().find(|(n, _)| n == name).map(|(_, t)| t)
    }

    fn block(&mut self, stmts: &[Stmt]) -> Result<(), LangError> {
        let mark = self.locals.len();
        for s in stmts {
            self.stmt(s)?;
        }
        self.locals.truncate(mark);
        Ok(())
    }

    fn stmt(&mut self, stmt: &Stmt) -> Result<(), LangError> {
        match &stmt.kind {
            StmtKind::VarDecl { name, ty, init } => {
                check_type_exists(self.program, ty, stmt.pos)?;
                if self.local(name).is_some() || self.class.constant(name).is_some() {
                    return Err(LangError::DuplicateName {
                        name: name.clone(),
                        scope: format!("class {}", self.class.name),
                    });
                }
                let t = self.expr(init)?;
                if !t.assignable_to(ty) {
                    return self.err(
                        init.id,
                        init.pos,
                        format!("cannot initialise `{name}: {ty}` with {}", t.describe()),
                    );
                }
                self.locals.push((name.clone(), ty.clone()));
            }
            StmtKind::Assign { target, value } => {
                let target_ty = self.lvalue(target, stmt)?;
                let t = self.expr(value)?;
                if !t.assignable_to(&target_ty) {
                    return self.err(
                        value.id,
                        value.pos,
                        format!("cannot assign {} to {target_ty}", t.describe()),
                    );
                }
            }
            StmtKind::If { cond, then_branch, else_branch } => {
                self.expect_bool(cond)?;
                self.block(then_branch)?;
                if let Some(els) = else_branch {
                    self.block(els)?;
                }
            }
            StmtKind::While { cond, body } => {
                self.expect_bool(cond)?;
                self.block(body)?;
            }
            StmtKind::Return(value) => match (value, self.ret.clone()) {
                (None, None) => {}
                (Some(e), Some(rt)) => {
                    let t = self.expr(e)?;
                    if !t.assignable_to(&rt) {
                        return self.err(e.id, e.pos, format!("returning {} from a {rt} method", t.describe()));
                    }
                }
                (None, Some(rt)) => {
                    return self.err(stmt.id, stmt.pos, format!("missing return value of type {rt}"))
                }
                (Some(e), None) => {
                    return self.err(e.id, e.pos, "returning a value from a Void method".into())
                }
            },
            StmtKind::Expr(e) => {
                self.expr(e)?;
            }
            StmtKind::Skip => {}
        }
        Ok(())
    }

    fn lvalue(&mut self, lv: &LValue, stmt: &Stmt) -> Result<Type, LangError> {
        let mut ty = if lv.root == "this" {
            if self.is_static {
                return self.err(stmt.id, stmt.pos, "`this` in a static method".into());
            }
            if lv.path.is_empty() {
                return self.err(stmt.id, stmt.pos, "cannot assign to `this`".into());
            }
            Type::Class(self.class.name.clone())
        } else if let Some(t) = self.local(&lv.root) {
            t.clone()
        } else if self.class.constant(&lv.root).is_some() {
            return self.err(stmt.id, stmt.pos, format!("cannot assign to constant `{}`", lv.root));
        } else {
            return self.err(stmt.id, stmt.pos, format!("unknown variable `{}`", lv.root));
        };
        for f in &lv.path {
            ty = self.field_type(&ty, f, stmt.id, stmt.pos)?;
        }
        Ok(ty)
    }

    fn field_type(&self, ty: &Type, field: &str, node: NodeId, pos: Pos) -> Result<Type, LangError> {
        let Type::Class(cname) = ty else {
            return self.err(node, pos, format!("field access `.{field}` on {ty}"));
        };
        let class = self.program.class(cname).expect("class types are resolved");
        match class.field(field) {
            Some(f) => Ok(f.ty.clone()),
            None => self.err(node, pos, format!("class {cname} has no field `{field}`")),
        }
    }

    fn expect_bool(&mut self, e: &Expr) -> Result<(), LangError> {
        match self.expr(e)? {
            ExprType::Bool => Ok(()),
            t => self.err(e.id, e.pos, format!("expected Bool, found {}", t.describe())),
        }
    }

    fn expr(&mut self, e: &Expr) -> Result<ExprType, LangError> {
        let t = self.expr_inner(e)?;
        self.info.expr_types.insert(e.id, t.clone());
        Ok(t)
    }

    fn expr_inner(&mut self, e: &Expr) -> Result<ExprType, LangError> {
        match &e.kind {
            ExprKind::Int(_) => Ok(ExprType::Int),
            ExprKind::Bool(_) => Ok(ExprType::Bool),
            ExprKind::Null => Ok(ExprType::Null),
            ExprKind::This => {
                if self.is_static {
                    self.err(e.id, e.pos, "`this` in a static method".into())
                } else {
                    Ok(ExprType::Class(self.class.name.clone()))
                }
            }
            ExprKind::Var(name) => {
                if let Some(t) = self.local(name) {
                    Ok(ExprType::from_type(t))
                } else if self.class.constant(name).is_some() {
                    Ok(ExprType::Int)
                } else {
                    self.err(e.id, e.pos, format!("unknown variable `{name}`"))
                }
            }
            ExprKind::Field(inner, f) => {
                let t = self.expr(inner)?;
                let ty = match t {
                    ExprType::Class(c) => Type::Class(c),
                    other => {
                        return self.err(e.id, e.pos, format!("field access `.{f}` on {}", other.describe()))
                    }
                };
                Ok(ExprType::from_type(&self.field_type(&ty, f, e.id, e.pos)?))
            }
            ExprKind::Unary(op, inner) => {
                let t = self.expr(inner)?;
                match (op, &t) {
                    (UnOp::Neg, ExprType::Int) => Ok(ExprType::Int),
                    (UnOp::Not, ExprType::Bool) => Ok(ExprType::Bool),
                    _ => self.err(e.id, e.pos, format!("operator cannot apply to {}", t.describe())),
                }
            }
            ExprKind::Binary(op, l, r) => {
                let lt = self.expr(l)?;
                let rt = self.expr(r)?;
                let ok = if op.is_arithmetic() || matches!(op, BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge) {
                    lt == ExprType::Int && rt == ExprType::Int
                } else if op.is_logical() {
                    lt == ExprType::Bool && rt == ExprType::Bool
                } else {
                    comparable(&lt, &rt)
                };
                if !ok {
                    return self.err(
                        e.id,
                        e.pos,
                        format!("`{}` cannot apply to {} and {}", op.symbol(), lt.describe(), rt.describe()),
                    );
                }
                Ok(if op.is_arithmetic() { ExprType::Int } else { ExprType::Bool })
            }
            ExprKind::New { class, args } => {
                let Some(decl) = self.program.class(class) else {
                    return self.err(e.id, e.pos, format!("unknown class `{class}`"));
                };
                let Some(ctor) = decl.constructor_with_arity(args.len()) else {
                    return self.err(e.id, e.pos, format!("no constructor of {class} takes {} arguments", args.len()));
                };
                if ctor.visibility == Visibility::Private && decl.name != self.class.name {
                    return self.err(e.id, e.pos, format!("constructor of {class} is private"));
                }
                self.check_args(&ctor.params, args, e)?;
                Ok(ExprType::Class(class.clone()))
            }
            ExprKind::Call { receiver, method, args } => {
                let (cname, static_ok) = match receiver {
                    Some(r) => match self.expr(r)? {
                        ExprType::Class(c) => (c, false),
                        t => return self.err(e.id, e.pos, format!("method call on {}", t.describe())),
                    },
                    None => (self.class.name.clone(), true),
                };
                let decl = self.program.class(&cname).expect("class types are resolved");
                let Some(m) = decl.method(method) else {
                    return self.err(e.id, e.pos, format!("class {cname} has no method `{method}`"));
                };
                if m.is_static && !static_ok {
                    return self.err(e.id, e.pos, format!("static method `{method}` called on an instance"));
                }
                if !m.is_static && receiver.is_none() && self.is_static {
                    return self.err(e.id, e.pos, format!("instance method `{method}` called from static context"));
                }
                if m.visibility == Visibility::Private && cname != self.class.name {
                    return self.err(e.id, e.pos, format!("method `{method}` is private"));
                }
                self.check_args(&m.params, args, e)?;
                Ok(m.ret.as_ref().map_or(ExprType::Void, ExprType::from_type))
            }
            ExprKind::StaticCall { class, method, args } => {
                let Some(decl) = self.program.class(class) else {
                    return self.err(e.id, e.pos, format!("unknown class `{class}`"));
                };
                let Some(m) = decl.method(method).filter(|m| m.is_static) else {
                    return self.err(e.id, e.pos, format!("class {class} has no static method `{method}`"));
                };
                if m.visibility == Visibility::Private && *class != self.class.name {
                    return self.err(e.id, e.pos, format!("method `{method}` is private"));
                }
                self.check_args(&m.params, args, e)?;
                Ok(m.ret.as_ref().map_or(ExprType::Void, ExprType::from_type))
            }
        }
    }

    fn check_args(&mut self, params: &[Param], args: &[Expr], call: &Expr) -> Result<(), LangError> {
        if params.len() != args.len() {
            return self.err(
                call.id,
                call.pos,
                format!("expected {} arguments, found {}", params.len(), args.len()),
            );
        }
        for (p, a) in params.iter().zip(args) {
            let t = self.expr(a)?;
            if !t.assignable_to(&p.ty) {
                return self.err(a.id, a.pos, format!("argument `{}` expects {}, found {}", p.name, p.ty, t.describe()));
            }
        }
        Ok(())
    }
}

fn comparable(a: &ExprType, b: &ExprType) -> bool {
    match (a, b) {
        (ExprType::Int, ExprType::Int) | (ExprType::Bool, ExprType::Bool) => true,
        (ExprType::Null, ExprType::Null | ExprType::Class(_)) | (ExprType::Class(_), ExprType::Null) => true,
        (ExprType::Class(x), ExprType::Class(y)) => x == y,
        _ => false,
    }
}
