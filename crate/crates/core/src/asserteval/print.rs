use super::ast::*;

/// Canonical text: single spaces around binary operators and minimal parentheses.
pub fn print_assertion(e: &AExpr) -> String {
    match e {
        AExpr::Int(v) => v.to_string(),
        AExpr::Bool(b) => b.to_string(),
        AExpr::Null => "null".into(),
        AExpr::This => "this".into(),
        AExpr::Result => "result".into(),
        AExpr::Ident(s) => s.clone(),
        AExpr::Field(inner, f) => format!("{}.{f}", operand(inner, PREC_POSTFIX)),
        AExpr::Old(inner) => format!("old({})", print_assertion(inner)),
        AExpr::Reach(start, fields) => format!("reach({}, {})", print_assertion(start), fields.join(", ")),
        AExpr::Has(set, elem) => format!("{}.has({})", operand(set, PREC_POSTFIX), print_assertion(elem)),
        AExpr::Neg(inner) => format!("-{}", operand(inner, PREC_NEG)),
        AExpr::Not(inner) => format!("!{}", operand(inner, PREC_POSTFIX)),
        AExpr::Bin(op, l, r) => {
            let p = op.precedence();
            let (lp, rp) = match op {
                ABinOp::Implies => (p + 1, p),
                _ if op.is_comparison() => (p + 1, p + 1),
                _ => (p, p + 1),
            };
            format!("{} {} {}", operand(l, lp), op.symbol(), operand(r, rp))
        }
        AExpr::Quant { q, class, var, body } => {
            format!("{} {class} {var}: {}", q.keyword(), print_assertion(body))
        }
    }
}

fn operand(e: &AExpr, min_prec: u8) -> String {
    let s = print_assertion(e);
    let negative_literal = matches!(e, AExpr::Int(v) if *v < 0);
    if e.precedence() < min_prec || (negative_literal && min_prec >= PREC_NEG) {
        format!("({s})")
    } else {
        s
    }
}
