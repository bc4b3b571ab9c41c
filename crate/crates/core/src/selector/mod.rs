//! Mutation-based selection: drop assertions no mutant falsifies, group the
//! rest by the set of mutants they kill, and report the most often falsified
//! member of each group.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::asserteval::{holds, parse_assertion, typecheck, AExpr, AssertError, TypeEnv};
use crate::detector::collect_records;
use crate::minilang::Program;
use crate::mutation::Mutant;
use crate::testgen::TestSuite;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SelectError {
    #[error("survivor `{text}` does not check against {class}.{method}: {error}")]
    BadSurvivor {
        text: String,
        class: String,
        method: String,
        error: AssertError,
    },
    #[error("unknown method `{0}`")]
    UnknownMethod(String),
}

/// Assertions (rows) against mutants (columns). Only mutants that completed
/// at least one call of the method are columns; the rest are listed in
/// `silent_mutants`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KillMatrix {
    pub assertions: Vec<String>,
    pub mutants: Vec<String>,
    pub records_per_mutant: Vec<usize>,
    pub silent_mutants: Vec<String>,
    /// `cells[a][m]`: ordinals of mutant `m`'s records on which assertion `a`
    /// is False or Error.
    pub cells: Vec<Vec<Vec<u32>>>,
}

impl KillMatrix {
    /// Column indices of the mutants row `a` kills.
    pub fn kill_vector(&self, a: usize) -> Vec<usize> {
        self.cells[a]
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_empty())
            .map(|(m, _)| m)
            .collect()
    }

    pub fn kill_ids(&self, a: usize) -> Vec<String> {
        self.kill_vector(a).into_iter().map(|m| self.mutants[m].clone()).collect()
    }

    /// F(a): falsified (mutant, record) pairs.
    pub fn failures(&self, a: usize) -> usize {
        self.cells[a].iter().map(Vec::len).sum()
    }
}

fn parse_rows(program: &Program, class: &str, method: &str, texts: &[String]) -> Result<Vec<AExpr>, SelectError> {
    let env = TypeEnv::new(program, class, Some(method)).map_err(|_| SelectError::UnknownMethod(method.to_string()))?;
    texts
        .iter()
        .map(|t| {
            parse_assertion(t)
                .and_then(|a| typecheck(&a.expr, &env).map(|_| a.expr))
                .map_err(|error| SelectError::BadSurvivor {
                    text: t.clone(),
                    class: class.to_string(),
                    method: method.to_string(),
                    error,
                })
        })
        .collect()
}

/// Replays the suite on every mutant and evaluates each survivor on every
/// completed call of `method`. Faulting calls leave no record, so crashes
/// earn no kill.
pub fn compute_kill_matrix(
    program: &Program,
    class: &str,
    method: &str,
    mutants: &[Mutant],
    suite: &TestSuite,
    survivors: &[String],
) -> Result<KillMatrix, SelectError> {
    let rows = parse_rows(program, class, method, survivors)?;
    let columns: Vec<(usize, Vec<Vec<u32>>)> = mutants
        .par_iter()
        .map(|m| {
            let records = collect_records(&m.program, class, suite, method, &m.info.id);
            let col = rows
                .iter()
                .map(|e| {
                    records
                        .iter()
                        .enumerate()
                        .filter(|(_, r)| !holds(e, r))
                        .map(|(i, _)| i as u32)
                        .collect()
                })
                .collect();
            (records.len(), col)
        })
        .collect();
    let mut matrix = KillMatrix {
        assertions: survivors.to_vec(),
        mutants: Vec::new(),
        records_per_mutant: Vec::new(),
        silent_mutants: Vec::new(),
        cells: vec![Vec::new(); survivors.len()],
    };
    for (m, (count, col)) in mutants.iter().zip(columns) {
        if count == 0 {
            matrix.silent_mutants.push(m.info.id.clone());
            continue;
        }
        matrix.mutants.push(m.info.id.clone());
        matrix.records_per_mutant.push(count);
        for (row, cell) in matrix.cells.iter_mut().zip(col) {
            row.push(cell);
        }
    }
    Ok(matrix)
}

/// Splits rows into (killed by some mutant, killed by none).
pub fn filter_weak(matrix: &KillMatrix) -> (Vec<usize>, Vec<usize>) {
    (0..matrix.assertions.len()).partition(|&a| matrix.cells[a].iter().any(|c| !c.is_empty()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ranked {
    pub text: String,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cluster {
    pub kill_vector: Vec<String>,
    pub representative: String,
    /// Rank order: failures descending, then shorter text, then lexicographic.
    pub members: Vec<Ranked>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub survivors: usize,
    pub irrelevant: usize,
    pub equivalent: usize,
    pub reported: usize,
    pub irrelevant_pct: f64,
    pub equivalent_pct: f64,
    pub reported_pct: f64,
}

impl Summary {
    pub fn new(survivors: usize, irrelevant: usize, reported: usize) -> Summary {
        let equivalent = survivors - irrelevant - reported;
        let pct = |k: usize| if survivors == 0 { 0.0 } else { 100.0 * k as f64 / survivors as f64 };
        Summary {
            survivors,
            irrelevant,
            equivalent,
            reported,
            irrelevant_pct: pct(irrelevant),
            equivalent_pct: pct(equivalent),
            reported_pct: pct(reported),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedReport {
    pub clusters: Vec<Cluster>,
    pub discarded_weak: Vec<String>,
    pub summary: Summary,
}

impl RankedReport {
    pub fn representatives(&self) -> Vec<&str> {
        self.clusters.iter().map(|c| c.representative.as_str()).collect()
    }
}

fn rank_key(r: &Ranked) -> (std::cmp::Reverse<usize>, usize, &str) {
    (std::cmp::Reverse(r.failures), r.text.chars().count(), r.text.as_str())
}

/// Groups `kept` rows by kill vector and ranks each group. Clusters are listed
/// in the rank order of their representatives.
pub fn cluster_and_rank(matrix: &KillMatrix, kept: &[usize]) -> RankedReport {
    let mut groups: BTreeMap<Vec<usize>, Vec<Ranked>> = BTreeMap::new();
    for &a in kept {
        groups.entry(matrix.kill_vector(a)).or_default().push(Ranked {
            text: matrix.assertions[a].clone(),
            failures: matrix.failures(a),
        });
    }
    let mut clusters: Vec<Cluster> = groups
        .into_iter()
        .map(|(kv, mut members)| {
            members.sort_by(|a, b| rank_key(a).cmp(&rank_key(b)));
            Cluster {
                kill_vector: kv.into_iter().map(|m| matrix.mutants[m].clone()).collect(),
                representative: members[0].text.clone(),
                members,
            }
        })
        .collect();
    clusters.sort_by(|a, b| {
        rank_key(&a.members[0])
            .cmp(&rank_key(&b.members[0]))
            .then_with(|| a.kill_vector.cmp(&b.kill_vector))
    });
    let reported = clusters.len();
    let all: std::collections::BTreeSet<usize> = kept.iter().copied().collect();
    let discarded_weak = (0..matrix.assertions.len())
        .filter(|a| !all.contains(a))
        .map(|a| matrix.assertions[a].clone())
        .collect::<Vec<_>>();
    RankedReport {
        summary: Summary::new(matrix.assertions.len(), discarded_weak.len(), reported),
        clusters,
        discarded_weak,
    }
}

/// Weak filter followed by clustering.
pub fn select(matrix: &KillMatrix) -> RankedReport {
    let (kept, _) = filter_weak(matrix);
    cluster_and_rank(matrix, &kept)
}
