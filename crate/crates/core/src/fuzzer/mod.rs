//! Random leftmost derivation of candidate assertions from a grammar, under a
//! bound on open non-terminals and on expansion steps.

use std::collections::HashSet;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::asserteval::normalize;
use crate::grammar::{is_nonterminal, Grammar, GrammarError};
use crate::seeds;

pub const MAX_NONTERMINALS: usize = 5;
pub const MAX_STEPS: usize = 100;

const BATCH: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum DerivationAbort {
    #[error("derivation exceeded {MAX_STEPS} expansion steps")]
    TooManySteps,
    #[error("no alternative keeps at most {MAX_NONTERMINALS} open non-terminals")]
    TooManyNonterminals,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Sym {
    N(usize),
    T(usize),
}

/// Grammar with interned symbols, ready for repeated derivation.
#[derive(Debug, Clone)]
pub struct Deriver {
    start: usize,
    terminals: Vec<String>,
    // Per non-terminal: alternatives paired with their non-terminal count.
    alts: Vec<Vec<(Vec<Sym>, usize)>>,
}

impl Deriver {
    pub fn new(g: &Grammar) -> Result<Deriver, GrammarError> {
        g.check()?;
        let names: Vec<&String> = g.productions.keys().collect();
        let index = |s: &str| names.iter().position(|n| n.as_str() == s).expect("checked grammar");
        let mut terminals: Vec<String> = Vec::new();
        let mut alts = Vec::with_capacity(names.len());
        for options in g.productions.values() {
            let mut compiled = Vec::with_capacity(options.len());
            for alt in options {
                let mut body = Vec::with_capacity(alt.len());
                for s in alt {
                    if is_nonterminal(s) {
                        body.push(Sym::N(index(s)));
                    } else {
                        let t = match terminals.iter().position(|t| t == s) {
                            Some(t) => t,
                            None => {
                                terminals.push(s.clone());
                                terminals.len() - 1
                            }
                        };
                        body.push(Sym::T(t));
                    }
                }
                let nts = body.iter().filter(|s| matches!(s, Sym::N(_))).count();
                compiled.push((body, nts));
            }
            alts.push(compiled);
        }
        Ok(Deriver {
            start: index(&g.start),
            terminals,
            alts,
        })
    }

    /// One derivation. `observe` sees the open non-terminal count after every
    /// accepted expansion.
    pub fn derive_observed(&self, seed: u64, observe: &mut dyn FnMut(usize)) -> Result<String, DerivationAbort> {
        let mut rng = seeds::rng(seed);
        let mut form = vec![Sym::N(self.start)];
        let mut open = 1usize;
        let mut steps = 0usize;
        let mut allowed: Vec<usize> = Vec::new();
        while let Some(pos) = form.iter().position(|s| matches!(s, Sym::N(_))) {
            if steps == MAX_STEPS {
                return Err(DerivationAbort::TooManySteps);
            }
            let Sym::N(nt) = form[pos] else { unreachable!() };
            let options = &self.alts[nt];
            let rest = open - 1;
            allowed.clear();
            allowed.extend((0..options.len()).filter(|&i| rest + options[i].1 <= MAX_NONTERMINALS));
            if allowed.is_empty() {
                // Closing phase: only the alternatives opening the fewest symbols.
                let least = options.iter().map(|(_, n)| *n).min().unwrap_or(0);
                if rest + least > MAX_NONTERMINALS {
                    return Err(DerivationAbort::TooManyNonterminals);
                }
                allowed.extend((0..options.len()).filter(|&i| options[i].1 == least));
            }
            let (body, nts) = &options[allowed[rng.gen_range(0..allowed.len())]];
            form.splice(pos..=pos, body.iter().copied());
            open = rest + nts;
            steps += 1;
            observe(open);
        }
        let text = form
            .iter()
            .map(|s| match s {
                Sym::T(t) => self.terminals[*t].as_str(),
                Sym::N(_) => unreachable!(),
            })
            .collect::<Vec<_>>()
            .join(" ");
        Ok(normalize(&text).unwrap_or(text))
    }

    pub fn derive(&self, seed: u64) -> Result<String, DerivationAbort> {
        self.derive_observed(seed, &mut |_| {})
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FuzzError {
    #[error(transparent)]
    Grammar(#[from] GrammarError),
    #[error(transparent)]
    Abort(#[from] DerivationAbort),
}

/// Derives one candidate from `grammar`; an abort means the caller should
/// retry with a fresh seed.
pub fn derive_one(grammar: &Grammar, seed: u64) -> Result<String, FuzzError> {
    Ok(Deriver::new(grammar)?.derive(seed)?)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FuzzOutput {
    /// Unique normalized candidates in generation order.
    pub candidates: Vec<String>,
    pub attempts: usize,
    pub aborted: usize,
    /// Set when fewer than the requested number of candidates were produced.
    pub exhausted: bool,
}

pub fn default_max_attempts(n: usize) -> usize {
    n.saturating_mul(10)
}

/// Up to `n` unique candidates from at most `max_attempts` derivations.
/// Attempt `i` uses the `i`-th child seed of `seed`; batches are derived in
/// parallel and merged in attempt order, so the output depends only on the
/// arguments.
pub fn fuzz_candidates(grammar: &Grammar, n: usize, seed: u64, max_attempts: usize) -> Result<FuzzOutput, GrammarError> {
    let deriver = Deriver::new(grammar)?;
    let mut out = FuzzOutput {
        candidates: Vec::new(),
        attempts: 0,
        aborted: 0,
        exhausted: false,
    };
    let mut seen: HashSet<String> = HashSet::new();
    while out.candidates.len() < n && out.attempts < max_attempts {
        let lo = out.attempts;
        let hi = (lo + BATCH).min(max_attempts);
        let batch: Vec<Result<String, DerivationAbort>> = (lo..hi)
            .into_par_iter()
            .map(|i| deriver.derive(seeds::child(seed, i as u64)))
            .collect();
        for result in batch {
            out.attempts += 1;
            match result {
                Ok(text) => {
                    if seen.insert(text.clone()) {
                        out.candidates.push(text);
                        if out.candidates.len() == n {
                            break;
                        }
                    }
                }
                Err(_) => out.aborted += 1,
            }
        }
    }
    out.exhausted = out.candidates.len() < n;
    Ok(out)
}
