use std::collections::HashSet;

use super::{is_nonterminal, Grammar, GrammarError};
use crate::asserteval::{tokenize, ATok};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Sym {
    N(usize),
    T(ATok),
}

/// Earley recognizer over assertion tokens. Multi-token terminals such as
/// `reach(this, next)` are split with the assertion tokenizer, so whitespace
/// in candidate text is irrelevant.
#[derive(Debug, Clone)]
pub struct Recognizer {
    start: usize,
    rules: Vec<(usize, Vec<Sym>)>,
    by_lhs: Vec<Vec<usize>>,
    nullable: Vec<bool>,
}

fn terminal_tokens(text: &str) -> Result<Vec<ATok>, GrammarError> {
    let toks = tokenize(text).map_err(|e| GrammarError::Format(format!("terminal `{text}`: {e}")))?;
    Ok(toks.into_iter().map(|(t, _)| t).filter(|t| *t != ATok::Eof).collect())
}

impl Recognizer {
    pub fn new(g: &Grammar) -> Result<Recognizer, GrammarError> {
        let names: Vec<&String> = g.productions.keys().collect();
        let index = |sym: &str| {
            names
                .iter()
                .position(|n| n.as_str() == sym)
                .ok_or_else(|| GrammarError::Undefined(sym.to_string()))
        };
        let start = index(&g.start)?;
        let mut rules = Vec::new();
        let mut by_lhs = vec![Vec::new(); names.len()];
        for (lhs, (_, alts)) in g.productions.iter().enumerate() {
            for alt in alts {
                let mut body = Vec::new();
                for sym in alt {
                    if is_nonterminal(sym) {
                        body.push(Sym::N(index(sym)?));
                    } else {
                        body.extend(terminal_tokens(sym)?.into_iter().map(Sym::T));
                    }
                }
                by_lhs[lhs].push(rules.len());
                rules.push((lhs, body));
            }
        }
        let mut nullable = vec![false; names.len()];
        loop {
            let mut changed = false;
            for (lhs, body) in &rules {
                if !nullable[*lhs] && body.iter().all(|s| matches!(s, Sym::N(n) if nullable[*n])) {
                    nullable[*lhs] = true;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        Ok(Recognizer {
            start,
            rules,
            by_lhs,
            nullable,
        })
    }

    pub fn recognizes(&self, text: &str) -> bool {
        let Ok(toks) = tokenize(text) else { return false };
        let input: Vec<ATok> = toks.into_iter().map(|(t, _)| t).filter(|t| *t != ATok::Eof).collect();
        // Items are (rule, dot, origin).
        let mut sets: Vec<Vec<(usize, usize, usize)>> = vec![Vec::new(); input.len() + 1];
        let mut seen: Vec<HashSet<(usize, usize, usize)>> = vec![HashSet::new(); input.len() + 1];
        for &r in &self.by_lhs[self.start] {
            if seen[0].insert((r, 0, 0)) {
                sets[0].push((r, 0, 0));
            }
        }
        for pos in 0..=input.len() {
            let mut i = 0;
            while i < sets[pos].len() {
                let (rule, dot, origin) = sets[pos][i];
                i += 1;
                let body = &self.rules[rule].1;
                let mut add = |set: usize, item: (usize, usize, usize), sets: &mut Vec<Vec<_>>| {
                    if seen[set].insert(item) {
                        sets[set].push(item);
                    }
                };
                match body.get(dot) {
                    Some(Sym::N(n)) => {
                        for &r in &self.by_lhs[*n] {
                            add(pos, (r, 0, pos), &mut sets);
                        }
                        if self.nullable[*n] {
                            add(pos, (rule, dot + 1, origin), &mut sets);
                        }
                    }
                    Some(Sym::T(t)) => {
                        if input.get(pos) == Some(t) {
                            add(pos + 1, (rule, dot + 1, origin), &mut sets);
                        }
                    }
                    None => {
                        let lhs = self.rules[rule].0;
                        let waiting: Vec<_> = sets[origin]
                            .iter()
                            .filter(|(r, d, _)| self.rules[*r].1.get(*d) == Some(&Sym::N(lhs)))
                            .copied()
                            .collect();
                        for (r, d, o) in waiting {
                            add(pos, (r, d + 1, o), &mut sets);
                        }
                    }
                }
            }
        }
        sets[input.len()]
            .iter()
            .any(|&(r, d, o)| o == 0 && self.rules[r].0 == self.start && d == self.rules[r].1.len())
    }
}

impl Grammar {
    /// Whether `text` is in the language of this grammar.
    pub fn recognizes(&self, text: &str) -> bool {
        Recognizer::new(self).is_ok_and(|r| r.recognizes(text))
    }
}
