//! The base assertion grammar and its class-specific instantiation.

mod earley;
mod extract;

use std::collections::{BTreeSet, HashSet};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use earley::Recognizer;
pub use extract::{extract_grammar, DEFAULT_NAV_DEPTH};

pub const START: &str = "<FuzzedSpec>";

/// Context-free grammar. A symbol is a non-terminal iff it has the form `<Name>`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grammar {
    pub start: String,
    pub productions: IndexMap<String, Vec<Vec<String>>>,
    /// Class-derived terminals with their types. Empty for the base grammar.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub terminals: Vec<TypedTerminal>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Field,
    Parameter,
    Result,
    Old,
    Constant,
    Literal,
    Reach,
    QuantifiedVar,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypedTerminal {
    pub text: String,
    /// `Int`, `Bool`, a class name, or `<Class>_SetExpr`.
    #[serde(rename = "type")]
    pub ty: String,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GrammarError {
    #[error("unknown class `{0}`")]
    UnknownClass(String),
    #[error("non-terminal {0} has no productions")]
    Undefined(String),
    #[error("non-terminal {0} is unreachable from the start symbol")]
    Unreachable(String),
    #[error("non-terminal {0} derives no terminal string")]
    NonProductive(String),
    #[error("start symbol must be {START}, found {0}")]
    BadStart(String),
    #[error("invalid grammar file: {0}")]
    Format(String),
}

pub fn is_nonterminal(sym: &str) -> bool {
    let Some(inner) = sym.strip_prefix('<').and_then(|s| s.strip_suffix('>')) else {
        return false;
    };
    let mut chars = inner.chars();
    chars.next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn alts(items: &[&[&str]]) -> Vec<Vec<String>> {
    items.iter().map(|a| a.iter().map(|s| s.to_string()).collect()).collect()
}

/// The class-independent grammar B. Schema placeholders (`<NumVar>`,
/// `<BoolVar>`, `<Typed_Var>`, `<type_SetExpr>`, `<type_Var>`) have no
/// productions until a class instantiates them.
pub fn base_grammar() -> Grammar {
    let mut p = IndexMap::new();
    let mut add = |nt: &str, a: &[&[&str]]| {
        p.insert(nt.to_string(), alts(a));
    };
    add(START, &[&["<QuantifiedExpr>"], &["<BooleanExpr>"]]);
    add(
        "<QuantifiedExpr>",
        &[
            &["<Quantifier>", "<Typed_Var>", ":", "<BooleanExpr>"],
            &["exists", "<Typed_Var>", ":", "<MembershipExpr>", "&&", "<NumCmpExpr>"],
        ],
    );
    add("<Quantifier>", &[&["all"], &["exists"]]);
    add(
        "<BooleanExpr>",
        &[
            &["<NumCmpExpr>"],
            &["<LogicCmpExpr>"],
            &["<MembershipExpr>"],
            &["!", "(", "<BooleanExpr>", ")"],
            &["<RefCmpExpr>"],
        ],
    );
    add(
        "<NumCmpExpr>",
        &[
            &["<NumExpr>", "<NumCmpOp>", "<NumExpr>"],
            &["<NumExpr>", "<NumCmpOp>", "<NumExpr>", "<NumBinOp>", "<NumExpr>"],
        ],
    );
    add("<NumExpr>", &[&["<NumVar>"], &["<NumConst>"]]);
    add(
        "<LogicCmpExpr>",
        &[
            &["<BooleanExpr>", "<LogicOp>", "<NumCmpExpr>"],
            &["(", "<BoolVar>", "<LogicOp>", "<BoolVar>", ")", "<LogicOp>", "<NumCmpExpr>"],
            &["(", "<NumCmpExpr>", ")", "<LogicOp>", "(", "<NumCmpExpr>", ")"],
        ],
    );
    add("<MembershipExpr>", &[&["<type_SetExpr>", ".has(", "<type_Var>", ")"]]);
    add("<RefCmpExpr>", &[&["<RefExpr>", "<RefCmpOp>", "<RefExpr>"]]);
    add("<RefCmpOp>", &[&["=="], &["!="]]);
    add("<NumCmpOp>", &[&["=="], &["!="], &[">"], &["<"], &["<="], &[">="]]);
    add("<NumBinOp>", &[&["+"], &["-"], &["*"], &["/"], &["%"]]);
    add("<LogicOp>", &[&["||"], &["xor"], &["==>"], &["<==>"]]);
    add("<NumConst>", &[&["-1"], &["0"], &["1"]]);
    Grammar {
        start: START.to_string(),
        productions: p,
        terminals: Vec::new(),
    }
}

impl Grammar {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("grammar serializes")
    }

    pub fn from_json(text: &str) -> Result<Grammar, GrammarError> {
        serde_json::from_str(text).map_err(|e| GrammarError::Format(e.to_string()))
    }

    /// Distinct terminal symbols appearing in any alternative.
    pub fn terminal_symbols(&self) -> BTreeSet<&str> {
        self.productions
            .values()
            .flatten()
            .flatten()
            .filter(|s| !is_nonterminal(s))
            .map(String::as_str)
            .collect()
    }

    /// Non-terminals that derive some terminal string.
    fn productive(&self) -> HashSet<String> {
        let mut prod: HashSet<String> = HashSet::new();
        loop {
            let before = prod.len();
            for (nt, alts) in &self.productions {
                if !prod.contains(nt)
                    && alts
                        .iter()
                        .any(|a| a.iter().all(|s| !is_nonterminal(s) || prod.contains(s)))
                {
                    prod.insert(nt.clone());
                }
            }
            if prod.len() == before {
                return prod;
            }
        }
    }

    fn reachable(&self) -> Vec<String> {
        let mut seen = vec![self.start.clone()];
        let mut i = 0;
        while i < seen.len() {
            if let Some(alts) = self.productions.get(&seen[i]) {
                for s in alts.iter().flatten() {
                    if is_nonterminal(s) && !seen.contains(s) {
                        seen.push(s.clone());
                    }
                }
            }
            i += 1;
        }
        seen
    }

    /// Drops alternatives that mention non-productive symbols, then drops
    /// unreachable non-terminals, preserving order.
    pub fn prune(&mut self) {
        let productive = self.productive();
        for alts in self.productions.values_mut() {
            alts.retain(|a| a.iter().all(|s| !is_nonterminal(s) || productive.contains(s)));
        }
        self.productions.retain(|_, alts| !alts.is_empty());
        let reachable = self.reachable();
        self.productions.retain(|nt, _| reachable.contains(nt));
        let used = self.terminal_symbols().into_iter().map(str::to_string).collect::<HashSet<_>>();
        self.terminals.retain(|t| used.contains(&t.text));
    }

    /// Checks the well-formedness invariants: defined, reachable and productive
    /// non-terminals, and the expected start symbol.
    pub fn check(&self) -> Result<(), GrammarError> {
        if self.start != START {
            return Err(GrammarError::BadStart(self.start.clone()));
        }
        if !self.productions.contains_key(&self.start) {
            return Err(GrammarError::Undefined(self.start.clone()));
        }
        for s in self.productions.values().flatten().flatten() {
            if is_nonterminal(s) && !self.productions.contains_key(s) {
                return Err(GrammarError::Undefined(s.clone()));
            }
        }
        let reachable = self.reachable();
        if let Some(nt) = self.productions.keys().find(|nt| !reachable.contains(nt)) {
            return Err(GrammarError::Unreachable(nt.clone()));
        }
        let productive = self.productive();
        if let Some(nt) = self.productions.keys().find(|nt| !productive.contains(*nt)) {
            return Err(GrammarError::NonProductive(nt.clone()));
        }
        Ok(())
    }

    /// Minimum number of expansion steps each non-terminal needs to reach a
    /// terminal string.
    pub fn min_steps(&self) -> IndexMap<String, u32> {
        let mut cost: IndexMap<String, u32> = IndexMap::new();
        loop {
            let mut changed = false;
            for (nt, alts) in &self.productions {
                let best = alts
                    .iter()
                    .filter_map(|a| {
                        a.iter()
                            .filter(|s| is_nonterminal(s))
                            .map(|s| cost.get(s).copied())
                            .sum::<Option<u32>>()
                            .map(|c| c + 1)
                    })
                    .min();
                if let Some(b) = best {
                    if cost.get(nt).map_or(true, |c| b < *c) {
                        cost.insert(nt.clone(), b);
                        changed = true;
                    }
                }
            }
            if !changed {
                return cost;
            }
        }
    }
}

#[cfg(test)]
mod tests;
