//! Boolean form of the strategy constraints, a CDCL solver, the sequential
//! counter cardinality encoding and density minimization by binary search.

mod cardinality;
mod cdcl;
mod minimize;

use std::fmt::Write as _;

use thiserror::Error;

use crate::game::{MostPermissiveStrategy, Owner, PositionId, SafetyGame};

pub use cardinality::encode_at_most_k;
pub use cdcl::{sat_solve, sat_solve_with, SolverLimits};
pub use minimize::{sat_exact_extract, sat_exact_extract_with, SatExtraction};

/// A DIMACS-style literal: `v` for variable `v` (1-based), `-v` for its negation.
pub type Lit = i32;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Cnf {
    pub num_vars: usize,
    pub clauses: Vec<Vec<Lit>>,
}

impl Cnf {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn new_var(&mut self) -> Lit {
        self.num_vars += 1;
        self.num_vars as Lit
    }

    pub fn add_clause(&mut self, clause: Vec<Lit>) {
        debug_assert!(clause.iter().all(|&l| l != 0 && l.unsigned_abs() as usize <= self.num_vars));
        self.clauses.push(clause);
    }

    /// `p cnf` header followed by one zero-terminated clause per line.
    pub fn to_dimacs(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "p cnf {} {}", self.num_vars, self.clauses.len());
        for c in &self.clauses {
            for l in c {
                let _ = write!(out, "{l} ");
            }
            out.push_str("0\n");
        }
        out
    }

    /// True when `model` (indexed by variable − 1) satisfies every clause.
    pub fn satisfied_by(&self, model: &[bool]) -> bool {
        self.clauses.iter().all(|c| {
            c.iter()
                .any(|&l| model[l.unsigned_abs() as usize - 1] == (l > 0))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SatStatus {
    Sat,
    Unsat,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SatOutcome {
    pub status: SatStatus,
    /// Value of variable `v` at index `v − 1`, present iff satisfiable.
    pub model: Option<Vec<bool>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum SatError {
    #[error("conflict budget exhausted")]
    ConflictBudget,
    #[error("deadline exceeded")]
    Deadline,
}

/// Variable of each winning position in a strategy CNF.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarMap {
    pub positions: Vec<PositionId>,
    var_of: Vec<Option<Lit>>,
}

impl VarMap {
    pub fn var(&self, v: PositionId) -> Option<Lit> {
        self.var_of[v.index()]
    }

    /// Positions whose variable is true in `model`, as a membership mask.
    pub fn support(&self, num_positions: usize, model: &[bool]) -> Vec<bool> {
        let mut s = vec![false; num_positions];
        for (i, &v) in self.positions.iter().enumerate() {
            s[v.index()] = model[i];
        }
        s
    }
}

/// Unit clause for init, `¬v ∨ ⋁ targets` per winning player-0 position and
/// `¬v ∨ v′` per winning player-1 position and successor. Variables
/// `1..=|W|` follow position order.
pub fn build_cnf(game: &SafetyGame, mp: &MostPermissiveStrategy) -> (Cnf, VarMap) {
    let positions: Vec<PositionId> = mp.winning.iter().collect();
    let mut var_of = vec![None; game.num_positions()];
    let mut cnf = Cnf::new();
    for &v in &positions {
        var_of[v.index()] = Some(cnf.new_var());
    }
    let var = |v: PositionId| var_of[v.index()].expect("winning position");
    if let Some(i) = var_of[game.init().index()] {
        cnf.add_clause(vec![i]);
    } else {
        cnf.add_clause(vec![]);
    }
    for &v in &positions {
        match game.owner(v) {
            Owner::Zero => {
                let mut clause = vec![-var(v)];
                let mut targets: Vec<PositionId> = mp
                    .allowed(v)
                    .iter()
                    .map(|&a| game.target(v, a).expect("allowed is an edge"))
                    .collect();
                targets.sort_unstable();
                targets.dedup();
                clause.extend(targets.into_iter().map(var));
                cnf.add_clause(clause);
            }
            Owner::One => {
                for t in game.successors(v) {
                    cnf.add_clause(vec![-var(v), var(t)]);
                }
            }
        }
    }
    (cnf, VarMap { positions, var_of })
}
