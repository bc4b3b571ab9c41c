use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quantifier {
    All,
    Exists,
}

impl Quantifier {
    pub fn keyword(self) -> &'static str {
        match self {
            Quantifier::All => "all",
            Quantifier::Exists => "exists",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ABinOp {
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
    Xor,
    Implies,
    Iff,
}

impl ABinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            ABinOp::Add => "+",
            ABinOp::Sub => "-",
            ABinOp::Mul => "*",
            ABinOp::Div => "/",
            ABinOp::Rem => "%",
            ABinOp::Eq => "==",
            ABinOp::Ne => "!=",
            ABinOp::Lt => "<",
            ABinOp::Le => "<=",
            ABinOp::Gt => ">",
            ABinOp::Ge => ">=",
            ABinOp::And => "&&",
            ABinOp::Or => "||",
            ABinOp::Xor => "xor",
            ABinOp::Implies => "==>",
            ABinOp::Iff => "<==>",
        }
    }

    /// Binding strength; larger binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            ABinOp::Iff => PREC_IFF,
            ABinOp::Implies => PREC_IMPLIES,
            ABinOp::Xor => PREC_XOR,
            ABinOp::Or => PREC_OR,
            ABinOp::And => PREC_AND,
            ABinOp::Eq | ABinOp::Ne | ABinOp::Lt | ABinOp::Le | ABinOp::Gt | ABinOp::Ge => PREC_CMP,
            ABinOp::Add | ABinOp::Sub => PREC_ADD,
            ABinOp::Mul | ABinOp::Div | ABinOp::Rem => PREC_MUL,
        }
    }

    pub fn is_arithmetic(self) -> bool {
        self.precedence() >= PREC_ADD
    }

    pub fn is_comparison(self) -> bool {
        self.precedence() == PREC_CMP
    }

    pub fn is_logical(self) -> bool {
        self.precedence() <= PREC_AND
    }
}

pub const PREC_QUANT: u8 = 1;
pub const PREC_IFF: u8 = 2;
pub const PREC_IMPLIES: u8 = 3;
pub const PREC_XOR: u8 = 4;
pub const PREC_OR: u8 = 5;
pub const PREC_AND: u8 = 6;
pub const PREC_NOT: u8 = 7;
pub const PREC_CMP: u8 = 8;
pub const PREC_ADD: u8 = 9;
pub const PREC_MUL: u8 = 10;
pub const PREC_NEG: u8 = 11;
pub const PREC_POSTFIX: u8 = 12;

/// Assertion-language expression.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum AExpr {
    Int(i64),
    Bool(bool),
    Null,
    This,
    Result,
    /// Parameter, class constant or quantified variable.
    Ident(String),
    Field(Box<AExpr>, String),
    Old(Box<AExpr>),
    Reach(Box<AExpr>, Vec<String>),
    Has(Box<AExpr>, Box<AExpr>),
    Neg(Box<AExpr>),
    Not(Box<AExpr>),
    Bin(ABinOp, Box<AExpr>, Box<AExpr>),
    Quant {
        q: Quantifier,
        class: String,
        var: String,
        body: Box<AExpr>,
    },
}

impl AExpr {
    pub fn precedence(&self) -> u8 {
        match self {
            AExpr::Quant { .. } => PREC_QUANT,
            AExpr::Bin(op, ..) => op.precedence(),
            AExpr::Not(_) => PREC_NOT,
            AExpr::Neg(_) => PREC_NEG,
            _ => PREC_POSTFIX,
        }
    }

    pub fn bin(op: ABinOp, l: AExpr, r: AExpr) -> AExpr {
        AExpr::Bin(op, Box::new(l), Box::new(r))
    }

    pub fn not(e: AExpr) -> AExpr {
        AExpr::Not(Box::new(e))
    }

    /// Pre-order visit of all sub-expressions.
    pub fn visit(&self, f: &mut dyn FnMut(&AExpr)) {
        f(self);
        match self {
            AExpr::Field(e, _) | AExpr::Old(e) | AExpr::Reach(e, _) | AExpr::Neg(e) | AExpr::Not(e) => e.visit(f),
            AExpr::Has(a, b) | AExpr::Bin(_, a, b) => {
                a.visit(f);
                b.visit(f);
            }
            AExpr::Quant { body, .. } => body.visit(f),
            _ => {}
        }
    }
}

impl fmt::Display for AExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&super::print::print_assertion(self))
    }
}

/// A parsed candidate assertion together with its source text.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Assertion {
    pub expr: AExpr,
    pub text: String,
}
