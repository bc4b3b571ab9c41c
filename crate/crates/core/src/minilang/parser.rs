use super::ast::*;
use super::lexer::{tokenize, Tok};
use super::LangError;

/// Parses MiniObj source without type checking. Node ids are assigned in
/// pre-order once the whole program has been read.
pub fn parse_untyped(src: &str) -> Result<Program, LangError> {
    let tokens = tokenize(src)?;
    let mut parser = Parser { tokens, at: 0 };
    let mut program = Program::default();
    while !parser.check(&Tok::Eof) {
        program.classes.push(parser.class_decl()?);
    }
    assign_ids(&mut program);
    Ok(program)
}

struct Parser {
    tokens: Vec<(Tok, Pos)>,
    at: usize,
}

type PResult<T> = Result<T, LangError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.at].0
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let idx = (self.at + offset).min(self.tokens.len() - 1);
        &self.tokens[idx].0
    }

    fn pos(&self) -> Pos {
        self.tokens[self.at].1
    }

    fn advance(&mut self) -> Tok {
        let tok = self.tokens[self.at].0.clone();
        if self.at < self.tokens.len() - 1 {
            self.at += 1;
        }
        tok
    }

    fn check(&self, tok: &Tok) -> bool {
        self.peek() == tok
    }

    fn check_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Tok::Punct(q) if *q == p)
    }

    fn check_kw(&self, k: &str) -> bool {
        matches!(self.peek(), Tok::Keyword(q) if *q == k)
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.check_punct(p) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, k: &str) -> bool {
        if self.check_kw(k) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn error<T>(&self, expected: &[&str]) -> PResult<T> {
        let pos = self.pos();
        Err(LangError::Syntax {
            line: pos.line,
            col: pos.col,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek().describe(),
        })
    }

    fn expect_punct(&mut self, p: &'static str) -> PResult<()> {
        if self.eat_punct(p) {
            Ok(())
        } else {
            self.error(&[p])
        }
    }

    fn expect_kw(&mut self, k: &'static str) -> PResult<()> {
        if self.eat_kw(k) {
            Ok(())
        } else {
            self.error(&[k])
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                self.advance();
                Ok(name)
            }
            _ => self.error(&["identifier"]),
        }
    }

    fn class_decl(&mut self) -> PResult<ClassDecl> {
        let pos = self.pos();
        self.expect_kw("class")?;
        let name = self.ident()?;
        self.expect_punct("{")?;
        let mut class = ClassDecl {
            name,
            fields: Vec::new(),
            constants: Vec::new(),
            constructors: Vec::new(),
            methods: Vec::new(),
            pos,
        };
        while !self.eat_punct("}") {
            self.member(&mut class)?;
        }
        if class.constructors.is_empty() {
            class.constructors.push(Constructor {
                visibility: Visibility::Public,
                params: Vec::new(),
                body: Vec::new(),
                implicit: true,
                pos,
            });
        }
        Ok(class)
    }

    fn member(&mut self, class: &mut ClassDecl) -> PResult<()> {
        let pos = self.pos();
        if self.eat_kw("field") {
            let name = self.ident()?;
            self.expect_punct(":")?;
            let ty = self.ty()?;
            self.expect_punct(";")?;
            class.fields.push(FieldDecl { name, ty });
            return Ok(());
        }
        if self.eat_kw("const") {
            let name = self.ident()?;
            self.expect_punct(":")?;
            self.expect_kw("Int")?;
            self.expect_punct("=")?;
            let negative = self.eat_punct("-");
            let value = match self.advance() {
                Tok::Int(v) => {
                    if negative {
                        v.wrapping_neg()
                    } else {
                        v
                    }
                }
                _ => {
                    self.at -= 1;
                    return self.error(&["integer literal"]);
                }
            };
            self.expect_punct(";")?;
            class.constants.push(ConstDecl { name, value });
            return Ok(());
        }
        let visibility = if self.eat_kw("private") {
            Visibility::Private
        } else {
            Visibility::Public
        };
        if self.eat_kw("constructor") {
            let params = self.params()?;
            let body = self.block()?;
            class.constructors.push(Constructor {
                visibility,
                params,
                body,
                implicit: false,
                pos,
            });
            return Ok(());
        }
        let is_static = self.eat_kw("static");
        if self.eat_kw("method") {
            let name = self.ident()?;
            let params = self.params()?;
            self.expect_punct(":")?;
            let ret = if self.eat_kw("Void") {
                None
            } else {
                Some(self.ty()?)
            };
            let body = self.block()?;
            class.methods.push(Method {
                name,
                visibility,
                is_static,
                params,
                ret,
                body,
                pos,
            });
            return Ok(());
        }
        self.error(&["field", "const", "constructor", "method", "}"])
    }

    fn ty(&mut self) -> PResult<Type> {
        if self.eat_kw("Int") {
            Ok(Type::Int)
        } else if self.eat_kw("Bool") {
            Ok(Type::Bool)
        } else if let Tok::Ident(name) = self.peek().clone() {
            self.advance();
            Ok(Type::Class(name))
        } else {
            self.error(&["Int", "Bool", "class name"])
        }
    }

    fn params(&mut self) -> PResult<Vec<Param>> {
        self.expect_punct("(")?;
        let mut params = Vec::new();
        if !self.eat_punct(")") {
            loop {
                let name = self.ident()?;
                self.expect_punct(":")?;
                let ty = self.ty()?;
                params.push(Param { name, ty });
                if self.eat_punct(")") {
                    break;
                }
                self.expect_punct(",")?;
            }
        }
        Ok(params)
    }

    fn block(&mut self) -> PResult<Vec<Stmt>> {
        self.expect_punct("{")?;
        let mut stmts = Vec::new();
        while !self.eat_punct("}") {
            stmts.push(self.stmt()?);
        }
        Ok(stmts)
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        let pos = self.pos();
        let kind = if self.eat_kw("var") {
            let name = self.ident()?;
            self.expect_punct(":")?;
            let ty = self.ty()?;
            self.expect_punct("=")?;
            let init = self.expr()?;
            self.expect_punct(";")?;
            StmtKind::VarDecl { name, ty, init }
        } else if self.eat_kw("if") {
            return self.if_rest(pos);
        } else if self.eat_kw("while") {
            self.expect_punct("(")?;
            let cond = self.expr()?;
            self.expect_punct(")")?;
            let body = self.block()?;
            StmtKind::While { cond, body }
        } else if self.eat_kw("return") {
            let value = if self.check_punct(";") {
                None
            } else {
                Some(self.expr()?)
            };
            self.expect_punct(";")?;
            StmtKind::Return(value)
        } else if self.eat_punct(";") {
            StmtKind::Skip
        } else if let Some(target) = self.try_lvalue() {
            self.expect_punct("=")?;
            let value = self.expr()?;
            self.expect_punct(";")?;
            StmtKind::Assign { target, value }
        } else {
            let e = self.expr()?;
            if !matches!(
                e.kind,
                ExprKind::Call { .. } | ExprKind::StaticCall { .. } | ExprKind::New { .. }
            ) {
                return self.error(&["=", "call"]);
            }
            self.expect_punct(";")?;
            StmtKind::Expr(e)
        };
        Ok(Stmt {
            id: NodeId::default(),
            pos,
            kind,
        })
    }

    fn if_rest(&mut self, pos: Pos) -> PResult<Stmt> {
        self.expect_punct("(")?;
        let cond = self.expr()?;
        self.expect_punct(")")?;
        let then_branch = self.block()?;
        let else_branch = if self.eat_kw("else") {
            if self.check_kw("if") {
                let inner_pos = self.pos();
                self.advance();
                Some(vec![self.if_rest(inner_pos)?])
            } else {
                Some(self.block()?)
            }
        } else {
            None
        };
        Ok(Stmt {
            id: NodeId::default(),
            pos,
            kind: StmtKind::If {
                cond,
                then_branch,
                else_branch,
            },
        })
    }

    /// Looks ahead for `root(.f)* =` without consuming anything on failure.
    fn try_lvalue(&mut self) -> Option<LValue> {
        let root = match self.peek() {
            Tok::Ident(name) => name.clone(),
            Tok::Keyword("this") => "this".to_string(),
            _ => return None,
        };
        let mut offset = 1;
        let mut path = Vec::new();
        loop {
            match (self.peek_at(offset), self.peek_at(offset + 1)) {
                (Tok::Punct("."), Tok::Ident(f)) => {
                    path.push(f.clone());
                    offset += 2;
                }
                (Tok::Punct("="), _) => break,
                _ => return None,
            }
        }
        self.at += offset;
        Some(LValue { root, path })
    }

    fn expr(&mut self) -> PResult<Expr> {
        self.binary(1)
    }

    fn binary_op(&self) -> Option<BinOp> {
        let Tok::Punct(p) = self.peek() else {
            return None;
        };
        Some(match *p {
            "||" => BinOp::Or,
            "&&" => BinOp::And,
            "==" => BinOp::Eq,
            "!=" => BinOp::Ne,
            "<" => BinOp::Lt,
            "<=" => BinOp::Le,
            ">" => BinOp::Gt,
            ">=" => BinOp::Ge,
            "+" => BinOp::Add,
            "-" => BinOp::Sub,
            "*" => BinOp::Mul,
            "/" => BinOp::Div,
            "%" => BinOp::Rem,
            _ => return None,
        })
    }

    fn binary(&mut self, min_prec: u8) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.binary_op() {
            let prec = op.precedence();
            if prec < min_prec {
                break;
            }
            let pos = self.pos();
            self.advance();
            let rhs = self.binary(prec + 1)?;
            lhs = Expr::new(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), pos);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Expr> {
        let pos = self.pos();
        if self.eat_punct("!") {
            let inner = self.unary()?;
            return Ok(Expr::new(ExprKind::Unary(UnOp::Not, Box::new(inner)), pos));
        }
        if self.eat_punct("-") {
            let inner = self.unary()?;
            return Ok(Expr::new(ExprKind::Unary(UnOp::Neg, Box::new(inner)), pos));
        }
        self.postfix()
    }

    fn postfix(&mut self) -> PResult<Expr> {
        let mut e = self.primary()?;
        while self.check_punct(".") {
            let pos = self.pos();
            self.advance();
            let name = self.ident()?;
            if self.check_punct("(") {
                let args = self.args()?;
                e = Expr::new(
                    ExprKind::Call {
                        receiver: Some(Box::new(e)),
                        method: name,
                        args,
                    },
                    pos,
                );
            } else {
                e = Expr::new(ExprKind::Field(Box::new(e), name), pos);
            }
        }
        Ok(e)
    }

    fn args(&mut self) -> PResult<Vec<Expr>> {
        self.expect_punct("(")?;
        let mut args = Vec::new();
        if !self.eat_punct(")") {
            loop {
                args.push(self.expr()?);
                if self.eat_punct(")") {
                    break;
                }
                self.expect_punct(",")?;
            }
        }
        Ok(args)
    }

    fn primary(&mut self) -> PResult<Expr> {
        let pos = self.pos();
        let kind = match self.peek().clone() {
            Tok::Int(v) => {
                self.advance();
                ExprKind::Int(v)
            }
            Tok::Keyword("true") => {
                self.advance();
                ExprKind::Bool(true)
            }
            Tok::Keyword("false") => {
                self.advance();
                ExprKind::Bool(false)
            }
            Tok::Keyword("null") => {
                self.advance();
                ExprKind::Null
            }
            Tok::Keyword("this") => {
                self.advance();
                ExprKind::This
            }
            Tok::Keyword("new") => {
                self.advance();
                let class = self.ident()?;
                let args = self.args()?;
                ExprKind::New { class, args }
            }
            Tok::Punct("(") => {
                self.advance();
                let inner = self.expr()?;
                self.expect_punct(")")?;
                return Ok(inner);
            }
            Tok::Ident(name) => {
                self.advance();
                if self.eat_punct("::") {
                    let method = self.ident()?;
                    let args = self.args()?;
                    ExprKind::StaticCall {
                        class: name,
                        method,
                        args,
                    }
                } else if self.check_punct("(") {
                    let args = self.args()?;
                    ExprKind::Call {
                        receiver: None,
                        method: name,
                        args,
                    }
                } else {
                    ExprKind::Var(name)
                }
            }
            _ => return self.error(&["expression"]),
        };
        Ok(Expr::new(kind, pos))
    }
}
