use std::fmt;

use serde::{Deserialize, Serialize};

/// Pre-order identifier of a statement or expression node. Used as the
/// mutation location.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Type {
    Int,
    Bool,
    Class(String),
}

impl Type {
    pub fn class_name(&self) -> Option<&str> {
        match self {
            Type::Class(name) => Some(name),
            _ => None,
        }
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Int => f.write_str("Int"),
            Type::Bool => f.write_str("Bool"),
            Type::Class(name) => f.write_str(name),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Visibility {
    #[default]
    Public,
    Private,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Program {
    pub classes: Vec<ClassDecl>,
}

impl Program {
    pub fn class(&self, name: &str) -> Option<&ClassDecl> {
        self.classes.iter().find(|c| c.name == name)
    }

    /// Value of a class constant; constants are fixed at load time.
    pub fn constant(&self, class: &str, name: &str) -> Option<i64> {
        self.class(class)?.constant(name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassDecl {
    pub name: String,
    pub fields: Vec<FieldDecl>,
    pub constants: Vec<ConstDecl>,
    pub constructors: Vec<Constructor>,
    pub methods: Vec<Method>,
    pub pos: Pos,
}

impl ClassDecl {
    pub fn field(&self, name: &str) -> Option<&FieldDecl> {
        self.fields.iter().find(|f| f.name == name)
    }

    pub fn field_index(&self, name: &str) -> Option<usize> {
        self.fields.iter().position(|f| f.name == name)
    }

    pub fn constant(&self, name: &str) -> Option<i64> {
        self.constants.iter().find(|c| c.name == name).map(|c| c.value)
    }

    pub fn method(&self, name: &str) -> Option<&Method> {
        self.methods.iter().find(|m| m.name == name)
    }

    pub fn constructor_with_arity(&self, arity: usize) -> Option<&Constructor> {
        self.constructors.iter().find(|c| c.params.len() == arity)
    }

    pub fn public_constructors(&self) -> impl Iterator<Item = (usize, &Constructor)> {
        self.constructors
            .iter()
            .enumerate()
            .filter(|(_, c)| c.visibility == Visibility::Public)
    }

    pub fn public_methods(&self) -> impl Iterator<Item = &Method> {
        self.methods
            .iter()
            .filter(|m| m.visibility == Visibility::Public)
    }

    /// Fields whose declared type is the declaring class itself.
    pub fn recursive_fields(&self) -> impl Iterator<Item = &FieldDecl> {
        self.fields
            .iter()
            .filter(move |f| f.ty.class_name() == Some(self.name.as_str()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldDecl {
    pub name: String,
    pub ty: Type,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstDecl {
    pub name: String,
    pub value: i64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub name: String,
    pub ty: Type,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constructor {
    pub visibility: Visibility,
    pub params: Vec<Param>,
    pub body: Vec<Stmt>,
    /// Synthesized no-argument constructor for classes that declare none.
    pub implicit: bool,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Method {
    pub name: String,
    pub visibility: Visibility,
    pub is_static: bool,
    pub params: Vec<Param>,
    /// `None` for `Void`.
    pub ret: Option<Type>,
    pub body: Vec<Stmt>,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stmt {
    pub id: NodeId,
    pub pos: Pos,
    pub kind: StmtKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StmtKind {
    VarDecl { name: String, ty: Type, init: Expr },
    Assign { target: LValue, value: Expr },
    If { cond: Expr, then_branch: Vec<Stmt>, else_branch: Option<Vec<Stmt>> },
    While { cond: Expr, body: Vec<Stmt> },
    Return(Option<Expr>),
    Expr(Expr),
    /// Empty statement; produced by statement deletion.
    Skip,
}

/// Assignment target: a local, parameter or `this`, followed by a field path.
#[derive(Debug, Clone, PartialEq)]
pub struct LValue {
    pub root: String,
    pub path: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub id: NodeId,
    pub pos: Pos,
    pub kind: ExprKind,
}

impl Expr {
    pub fn new(kind: ExprKind, pos: Pos) -> Self {
        Expr { id: NodeId::default(), pos, kind }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Int(i64),
    Bool(bool),
    Null,
    This,
    Var(String),
    Field(Box<Expr>, String),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    New { class: String, args: Vec<Expr> },
    /// `recv.m(args)`, or `m(args)` on the current class when `receiver` is `None`.
    Call { receiver: Option<Box<Expr>>, method: String, args: Vec<Expr> },
    /// `C::m(args)`.
    StaticCall { class: String, method: String, args: Vec<Expr> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnOp {
    Neg,
    Not,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

impl BinOp {
    pub const ARITHMETIC: [BinOp; 5] = [BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div, BinOp::Rem];
    pub const RELATIONAL: [BinOp; 6] = [BinOp::Eq, BinOp::Ne, BinOp::Lt, BinOp::Le, BinOp::Gt, BinOp::Ge];

    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Rem => "%",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }

    pub fn is_arithmetic(self) -> bool {
        Self::ARITHMETIC.contains(&self)
    }

    pub fn is_relational(self) -> bool {
        Self::RELATIONAL.contains(&self)
    }

    pub fn is_logical(self) -> bool {
        matches!(self, BinOp::And | BinOp::Or)
    }

    /// Binding strength; higher binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Ne => 3,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 4,
            BinOp::Add | BinOp::Sub => 5,
            BinOp::Mul | BinOp::Div | BinOp::Rem => 6,
        }
    }
}

/// Pre-order walk over every statement and expression of a body.
pub fn walk_stmts<'a>(stmts: &'a [Stmt], visit: &mut dyn FnMut(Node<'a>)) {
    for stmt in stmts {
        walk_stmt(stmt, visit);
    }
}

#[derive(Clone, Copy)]
pub enum Node<'a> {
    Stmt(&'a Stmt),
    Expr(&'a Expr),
}

fn walk_stmt<'a>(stmt: &'a Stmt, visit: &mut dyn FnMut(Node<'a>)) {
    visit(Node::Stmt(stmt));
    match &stmt.kind {
        StmtKind::VarDecl { init, .. } => walk_expr(init, visit),
        StmtKind::Assign { value, .. } => walk_expr(value, visit),
        StmtKind::If { cond, then_branch, else_branch } => {
            walk_expr(cond, visit);
            walk_stmts(then_branch, visit);
            if let Some(els) = else_branch {
                walk_stmts(els, visit);
            }
        }
        StmtKind::While { cond, body } => {
            walk_expr(cond, visit);
            walk_stmts(body, visit);
        }
        StmtKind::Return(Some(e)) | StmtKind::Expr(e) => walk_expr(e, visit),
        StmtKind::Return(None) | StmtKind::Skip => {}
    }
}

pub fn walk_expr<'a>(expr: &'a Expr, visit: &mut dyn FnMut(Node<'a>)) {
    visit(Node::Expr(expr));
    match &expr.kind {
        ExprKind::Int(_) | ExprKind::Bool(_) | ExprKind::Null | ExprKind::This | ExprKind::Var(_) => {}
        ExprKind::Field(inner, _) | ExprKind::Unary(_, inner) => walk_expr(inner, visit),
        ExprKind::Binary(_, l, r) => {
            walk_expr(l, visit);
            walk_expr(r, visit);
        }
        ExprKind::New { args, .. } | ExprKind::StaticCall { args, .. } => {
            for a in args {
                walk_expr(a, visit);
            }
        }
        ExprKind::Call { receiver, args, .. } => {
            if let Some(r) = receiver {
                walk_expr(r, visit);
            }
            for a in args {
                walk_expr(a, visit);
            }
        }
    }
}

/// Mutable pre-order walk, used for id assignment and node replacement.
pub fn walk_stmts_mut(stmts: &mut [Stmt], visit: &mut dyn FnMut(NodeMut<'_>)) {
    for stmt in stmts {
        walk_stmt_mut(stmt, visit);
    }
}

pub enum NodeMut<'a> {
    Stmt(&'a mut Stmt),
    Expr(&'a mut Expr),
}

fn walk_stmt_mut(stmt: &mut Stmt, visit: &mut dyn FnMut(NodeMut<'_>)) {
    visit(NodeMut::Stmt(stmt));
    match &mut stmt.kind {
        StmtKind::VarDecl { init, .. } => walk_expr_mut(init, visit),
        StmtKind::Assign { value, .. } => walk_expr_mut(value, visit),
        StmtKind::If { cond, then_branch, else_branch } => {
            walk_expr_mut(cond, visit);
            walk_stmts_mut(then_branch, visit);
            if let Some(els) = else_branch {
                walk_stmts_mut(els, visit);
            }
        }
        StmtKind::While { cond, body } => {
            walk_expr_mut(cond, visit);
            walk_stmts_mut(body, visit);
        }
        StmtKind::Return(Some(e)) | StmtKind::Expr(e) => walk_expr_mut(e, visit),
        StmtKind::Return(None) | StmtKind::Skip => {}
    }
}

pub fn walk_expr_mut(expr: &mut Expr, visit: &mut dyn FnMut(NodeMut<'_>)) {
    visit(NodeMut::Expr(expr));
    match &mut expr.kind {
        ExprKind::Int(_) | ExprKind::Bool(_) | ExprKind::Null | ExprKind::This | ExprKind::Var(_) => {}
        ExprKind::Field(inner, _) | ExprKind::Unary(_, inner) => walk_expr_mut(inner, visit),
        ExprKind::Binary(_, l, r) => {
            walk_expr_mut(l, visit);
            walk_expr_mut(r, visit);
        }
        ExprKind::New { args, .. } | ExprKind::StaticCall { args, .. } => {
            for a in args {
                walk_expr_mut(a, visit);
            }
        }
        ExprKind::Call { receiver, args, .. } => {
            if let Some(r) = receiver {
                walk_expr_mut(r, visit);
            }
            for a in args {
                walk_expr_mut(a, visit);
            }
        }
    }
}

/// Assigns node ids in pre-order across all classes, constructors and methods.
pub fn assign_ids(program: &mut Program) {
    let mut next = 0u32;
    for class in &mut program.classes {
        let bodies = class
            .constructors
            .iter_mut()
            .map(|c| &mut c.body)
            .chain(class.methods.iter_mut().map(|m| &mut m.body));
        for body in bodies {
            walk_stmts_mut(body, &mut |node| {
                match node {
                    NodeMut::Stmt(s) => s.id = NodeId(next),
                    NodeMut::Expr(e) => e.id = NodeId(next),
                }
                next += 1;
            });
        }
    }
}
