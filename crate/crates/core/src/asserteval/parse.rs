use super::ast::*;
use super::AssertError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ATok {
    Int(i64),
    Ident(String),
    Kw(&'static str),
    Punct(&'static str),
    Eof,
}

impl ATok {
    pub fn describe(&self) -> String {
        match self {
            ATok::Int(v) => v.to_string(),
            ATok::Ident(s) => s.clone(),
            ATok::Kw(k) | ATok::Punct(k) => (*k).to_string(),
            ATok::Eof => "end of input".into(),
        }
    }

    /// Whether the token can end an operand, which makes a following `-` binary.
    fn ends_operand(&self) -> bool {
        matches!(
            self,
            ATok::Int(_) | ATok::Ident(_) | ATok::Punct(")") | ATok::Kw("true" | "false" | "null" | "result" | "this")
        )
    }
}

const KEYWORDS: [&str; 10] = ["all", "exists", "xor", "true", "false", "null", "result", "this", "old", "reach"];
const PUNCTS: [&str; 21] = [
    "<==>", "==>", "==", "!=", "<=", ">=", "&&", "||", "<", ">", "!", "+", "-", "*", "/", "%", "(", ")", ",", ".", ":",
];

/// Tokens paired with their 1-based column.
pub fn tokenize(text: &str) -> Result<Vec<(ATok, usize)>, AssertError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out: Vec<(ATok, usize)> = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let prev_operand = out.last().is_some_and(|(t, _)| t.ends_operand());
        let negative = c == '-' && !prev_operand && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit());
        if c.is_ascii_digit() || negative {
            i += 1;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let lit: String = chars[start..i].iter().collect();
            let v = lit.parse::<i64>().map_err(|_| AssertError::Syntax {
                col: start + 1,
                expected: vec!["64-bit integer".into()],
                found: lit.clone(),
            })?;
            out.push((ATok::Int(v), start + 1));
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            let tok = match KEYWORDS.iter().find(|k| **k == word) {
                Some(k) => ATok::Kw(k),
                None => ATok::Ident(word),
            };
            out.push((tok, start + 1));
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 4)].iter().collect();
        match PUNCTS.iter().find(|p| rest.starts_with(**p)) {
            Some(p) => {
                out.push((ATok::Punct(p), start + 1));
                i += p.chars().count();
            }
            None => {
                return Err(AssertError::Syntax {
                    col: start + 1,
                    expected: vec!["token".into()],
                    found: c.to_string(),
                })
            }
        }
    }
    out.push((ATok::Eof, chars.len() + 1));
    Ok(out)
}

/// Parses assertion text (syntax only; see `typecheck` for typing).
pub fn parse_expr(text: &str) -> Result<AExpr, AssertError> {
    let mut p = Parser {
        toks: tokenize(text)?,
        at: 0,
    };
    let e = p.expr()?;
    if p.peek() != &ATok::Eof {
        return p.fail(&["operator", "end of input"]);
    }
    Ok(e)
}

struct Parser {
    toks: Vec<(ATok, usize)>,
    at: usize,
}

type PResult<T> = Result<T, AssertError>;

impl Parser {
    fn peek(&self) -> &ATok {
        &self.toks[self.at].0
    }

    fn bump(&mut self) -> ATok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn fail<T>(&self, expected: &[&str]) -> PResult<T> {
        let (tok, col) = &self.toks[self.at];
        Err(AssertError::Syntax {
            col: *col,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: tok.describe(),
        })
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), ATok::Punct(q) if *q == p)
    }

    fn is_kw(&self, k: &str) -> bool {
        matches!(self.peek(), ATok::Kw(q) if *q == k)
    }

    fn expect_punct(&mut self, p: &'static str) -> PResult<()> {
        if self.is_punct(p) {
            self.bump();
            Ok(())
        } else {
            self.fail(&[p])
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek() {
            ATok::Ident(s) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => self.fail(&["identifier"]),
        }
    }

    fn expr(&mut self) -> PResult<AExpr> {
        let q = if self.is_kw("all") {
            Quantifier::All
        } else if self.is_kw("exists") {
            Quantifier::Exists
        } else {
            return self.iff();
        };
        self.bump();
        let class = self.ident()?;
        let var = self.ident()?;
        self.expect_punct(":")?;
        let body = self.expr()?;
        Ok(AExpr::Quant {
            q,
            class,
            var,
            body: Box::new(body),
        })
    }

    fn iff(&mut self) -> PResult<AExpr> {
        let mut l = self.implies()?;
        while self.is_punct("<==>") {
            self.bump();
            l = AExpr::bin(ABinOp::Iff, l, self.implies()?);
        }
        Ok(l)
    }

    fn implies(&mut self) -> PResult<AExpr> {
        let l = self.xor()?;
        if self.is_punct("==>") {
            self.bump();
            return Ok(AExpr::bin(ABinOp::Implies, l, self.implies()?));
        }
        Ok(l)
    }

    fn xor(&mut self) -> PResult<AExpr> {
        let mut l = self.or()?;
        while self.is_kw("xor") {
            self.bump();
            l = AExpr::bin(ABinOp::Xor, l, self.or()?);
        }
        Ok(l)
    }

    fn or(&mut self) -> PResult<AExpr> {
        let mut l = self.and()?;
        while self.is_punct("||") {
            self.bump();
            l = AExpr::bin(ABinOp::Or, l, self.and()?);
        }
        Ok(l)
    }

    fn and(&mut self) -> PResult<AExpr> {
        let mut l = self.not()?;
        while self.is_punct("&&") {
            self.bump();
            l = AExpr::bin(ABinOp::And, l, self.not()?);
        }
        Ok(l)
    }

    fn not(&mut self) -> PResult<AExpr> {
        if self.is_punct("!") {
            self.bump();
            return Ok(AExpr::not(self.not()?));
        }
        self.cmp()
    }

    fn cmp(&mut self) -> PResult<AExpr> {
        let l = self.add()?;
        let op = match self.peek() {
            ATok::Punct("==") => ABinOp::Eq,
            ATok::Punct("!=") => ABinOp::Ne,
            ATok::Punct("<") => ABinOp::Lt,
            ATok::Punct("<=") => ABinOp::Le,
            ATok::Punct(">") => ABinOp::Gt,
            ATok::Punct(">=") => ABinOp::Ge,
            _ => return Ok(l),
        };
        self.bump();
        let r = self.add()?;
        Ok(AExpr::bin(op, l, r))
    }

    fn add(&mut self) -> PResult<AExpr> {
        let mut l = self.mul()?;
        loop {
            let op = match self.peek() {
                ATok::Punct("+") => ABinOp::Add,
                ATok::Punct("-") => ABinOp::Sub,
                _ => return Ok(l),
            };
            self.bump();
            l = AExpr::bin(op, l, self.mul()?);
        }
    }

    fn mul(&mut self) -> PResult<AExpr> {
        let mut l = self.neg()?;
        loop {
            let op = match self.peek() {
                ATok::Punct("*") => ABinOp::Mul,
                ATok::Punct("/") => ABinOp::Div,
                ATok::Punct("%") => ABinOp::Rem,
                _ => return Ok(l),
            };
            self.bump();
            l = AExpr::bin(op, l, self.neg()?);
        }
    }

    fn neg(&mut self) -> PResult<AExpr> {
        if self.is_punct("-") {
            self.bump();
            return Ok(AExpr::Neg(Box::new(self.neg()?)));
        }
        self.postfix()
    }

    fn postfix(&mut self) -> PResult<AExpr> {
        let mut e = self.primary()?;
        while self.is_punct(".") {
            self.bump();
            let name = self.ident()?;
            if self.is_punct("(") {
                if name != "has" {
                    return self.fail(&["field name"]);
                }
                self.bump();
                let arg = self.expr()?;
                self.expect_punct(")")?;
                e = AExpr::Has(Box::new(e), Box::new(arg));
            } else {
                e = AExpr::Field(Box::new(e), name);
            }
        }
        Ok(e)
    }

    fn primary(&mut self) -> PResult<AExpr> {
        let e = match self.peek().clone() {
            ATok::Int(v) => AExpr::Int(v),
            ATok::Ident(s) => AExpr::Ident(s),
            ATok::Kw("true") => AExpr::Bool(true),
            ATok::Kw("false") => AExpr::Bool(false),
            ATok::Kw("null") => AExpr::Null,
            ATok::Kw("result") => AExpr::Result,
            ATok::Kw("this") => AExpr::This,
            ATok::Kw("old") => {
                self.bump();
                self.expect_punct("(")?;
                let inner = self.expr()?;
                self.expect_punct(")")?;
                return Ok(AExpr::Old(Box::new(inner)));
            }
            ATok::Kw("reach") => {
                self.bump();
                self.expect_punct("(")?;
                let start = self.expr()?;
                let mut fields = Vec::new();
                self.expect_punct(",")?;
                fields.push(self.ident()?);
                while self.is_punct(",") {
                    self.bump();
                    fields.push(self.ident()?);
                }
                self.expect_punct(")")?;
                return Ok(AExpr::Reach(Box::new(start), fields));
            }
            ATok::Punct("(") => {
                self.bump();
                let inner = self.expr()?;
                self.expect_punct(")")?;
                return Ok(inner);
            }
            _ => return self.fail(&["expression"]),
        };
        self.bump();
        Ok(e)
    }
}

/// Canonical spacing of assertion text: one space between tokens except
/// around calls, member access, parentheses, commas and the quantifier colon.
/// `None` if the text does not tokenize.
pub fn normalize(text: &str) -> Option<String> {
    let toks: Vec<ATok> = tokenize(text).ok()?.into_iter().map(|(t, _)| t).collect();
    let mut out = String::new();
    for (i, tok) in toks.iter().enumerate().filter(|(_, t)| **t != ATok::Eof) {
        if i > 0 {
            let p = &toks[i - 1];
            let unary_minus = *p == ATok::Punct("-") && (i < 2 || !toks[i - 2].ends_operand());
            let glue_after = matches!(p, ATok::Punct("(" | "." | "!")) || unary_minus;
            let glue_before = matches!(tok, ATok::Punct(")" | "," | "." | ":"))
                || (*tok == ATok::Punct("(") && matches!(p, ATok::Kw("reach" | "old")))
                || (*tok == ATok::Punct("(") && matches!(p, ATok::Ident(h) if h == "has"));
            if !glue_after && !glue_before {
                out.push(' ');
            }
        }
        out.push_str(&tok.describe());
    }
    Some(out)
}
