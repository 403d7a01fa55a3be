//! 3-CNF formulas and DIMACS parsing.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::seeds::SeedTree;

/// Signed literal: `+v` is variable `v` (1-based), `-v` its negation.
pub type Literal = i32;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CnfFormula {
    vars: usize,
    clauses: Vec<[Literal; 3]>,
}

impl CnfFormula {
    pub fn new(vars: usize, clauses: Vec<[Literal; 3]>) -> Result<Self> {
        for c in &clauses {
            for &l in c {
                if l == 0 || l.unsigned_abs() as usize > vars {
                    return Err(input(format!("literal {l} outside variables 1..={vars}")));
                }
            }
        }
        Ok(Self { vars, clauses })
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn clauses(&self) -> &[[Literal; 3]] {
        &self.clauses
    }

    /// Parses DIMACS CNF: `c` comment lines, one `p cnf <vars> <clauses>`
    /// header, zero-terminated clauses of exactly three literals, and an
    /// optional `%` end marker.
    pub fn from_dimacs(text: &str) -> Result<Self> {
        let mut header: Option<(usize, usize)> = None;
        let mut clauses = Vec::new();
        let mut pending: Vec<(Literal, usize)> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('c') {
                continue;
            }
            if line.starts_with('%') {
                break;
            }
            let parse_err = |message: String| Error::Parse { line: line_no, message };
            if line.starts_with('p') {
                let parts: Vec<&str> = line.split_whitespace().collect();
                if header.is_some() || parts.len() != 4 || parts[1] != "cnf" {
                    return Err(parse_err(format!("bad problem line {line:?}")));
                }
                let n = parts[2].parse().map_err(|_| parse_err("bad variable count".into()))?;
                let m = parts[3].parse().map_err(|_| parse_err("bad clause count".into()))?;
                header = Some((n, m));
                continue;
            }
            if header.is_none() {
                return Err(parse_err("clause before the problem line".into()));
            }
            for tok in line.split_whitespace() {
                let lit: Literal = tok.parse().map_err(|_| parse_err(format!("bad literal {tok:?}")))?;
                if lit != 0 {
                    pending.push((lit, line_no));
                    continue;
                }
                if pending.len() != 3 {
                    return Err(parse_err(format!("clause has {} literals, expected 3", pending.len())));
                }
                clauses.push([pending[0].0, pending[1].0, pending[2].0]);
                pending.clear();
            }
        }
        let (n, m) = header.ok_or(Error::Parse {
            line: 0,
            message: "missing problem line".into(),
        })?;
        if let Some(&(_, line)) = pending.first() {
            return Err(Error::Parse {
                line,
                message: "unterminated clause".into(),
            });
        }
        if clauses.len() != m {
            return Err(Error::Parse {
                line: 0,
                message: format!("header promises {m} clauses, found {}", clauses.len()),
            });
        }
        Self::new(n, clauses).map_err(|e| Error::Parse {
            line: 0,
            message: e.to_string(),
        })
    }

    pub fn to_dimacs(&self) -> String {
        let mut out = format!("p cnf {} {}\n", self.vars, self.clauses.len());
        for c in &self.clauses {
            out.push_str(&format!("{} {} {} 0\n", c[0], c[1], c[2]));
        }
        out
    }

    /// Number of clauses satisfied; `assignment[v - 1]` is variable `v`.
    pub fn satisfied(&self, assignment: &[bool]) -> usize {
        self.clauses
            .iter()
            .filter(|c| c.iter().any(|&l| literal_true(l, assignment)))
            .count()
    }

    /// Exhaustive search for a satisfying assignment.
    pub fn brute_force_solution(&self) -> Result<Option<Vec<bool>>> {
        if self.vars > 24 {
            return Err(Error::Capability(format!("{} variables is too many to enumerate", self.vars)));
        }
        let m = self.clauses.len();
        Ok((0u64..1 << self.vars)
            .map(|bits| (0..self.vars).map(|v| bits >> v & 1 == 1).collect::<Vec<_>>())
            .find(|a| self.satisfied(a) == m))
    }

    /// Random formula with `clauses` clauses over distinct variables when
    /// `vars >= 3`.
    pub fn random(vars: usize, clauses: usize, seed: u64) -> Result<Self> {
        if vars == 0 {
            return Err(input("need at least one variable"));
        }
        let mut rng = SeedTree::new(seed).child("cnf").stream();
        let list = (0..clauses)
            .map(|_| {
                let mut picked: Vec<usize> = Vec::with_capacity(3);
                while picked.len() < 3 {
                    let v = rng.random_range(1..=vars);
                    if vars < 3 || !picked.contains(&v) {
                        picked.push(v);
                    }
                }
                let mut c = [0; 3];
                for (slot, v) in c.iter_mut().zip(picked) {
                    *slot = if rng.random::<bool>() { v as Literal } else { -(v as Literal) };
                }
                c
            })
            .collect();
        Self::new(vars, list)
    }
}

#[inline]
pub(crate) fn literal_true(lit: Literal, assignment: &[bool]) -> bool {
    let v = assignment[lit.unsigned_abs() as usize - 1];
    if lit > 0 { v } else { !v }
}
