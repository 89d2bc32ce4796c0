//! Real relaxation of the sparsest-strategy ILP, a bounded-variable simplex
//! solver and the repetitive fixing heuristic built on top of it.

mod replp;
mod simplex;

use std::fmt::Write as _;

use thiserror::Error;

use crate::game::{MostPermissiveStrategy, Owner, PositionId, SafetyGame};

pub use replp::{replp_extract, replp_extract_traced, RepLpTrace};
pub use simplex::lp_solve;
pub(crate) use simplex::lp_solve_until;

/// Values within this distance of 0 or 1 count as integral.
pub const INTEGRALITY_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("variable {0} has inconsistent bounds")]
    BadBounds(usize),
    #[error("constraint references unknown variable {0}")]
    UnknownVariable(usize),
    #[error("objective is unbounded (cannot happen for bounded problems)")]
    Unbounded,
    #[error("a fixing round left the relaxation infeasible")]
    InfeasibleAfterFix,
    #[error("deadline exceeded")]
    Deadline,
}

/// `Σ coef·x ≥ rhs`. Terms are sorted by variable and free of duplicates.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub terms: Vec<(usize, f64)>,
    pub rhs: f64,
}

impl Constraint {
    pub fn new(mut terms: Vec<(usize, f64)>, rhs: f64) -> Self {
        terms.sort_by_key(|&(j, _)| j);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(terms.len());
        for (j, c) in terms {
            match merged.last_mut() {
                Some((k, acc)) if *k == j => *acc += c,
                _ => merged.push((j, c)),
            }
        }
        Self { terms: merged, rhs }
    }

    pub fn activity(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|&(j, c)| c * x[j]).sum()
    }
}

/// Minimize `objective · x` subject to `constraints` and per-variable bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    /// Game position behind each variable.
    pub positions: Vec<PositionId>,
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    pub bounds: Vec<(f64, f64)>,
}

impl LpProblem {
    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn check(&self) -> Result<(), LpError> {
        for (j, &(lo, hi)) in self.bounds.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(LpError::BadBounds(j));
            }
        }
        for c in &self.constraints {
            if let Some(&(j, _)) = c.terms.iter().find(|&&(j, _)| j >= self.num_vars()) {
                return Err(LpError::UnknownVariable(j));
            }
        }
        Ok(())
    }

    /// Variable of a position, if it has one.
    pub fn var_of(&self, v: PositionId) -> Option<usize> {
        self.positions.binary_search(&v).ok()
    }

    /// Writes the problem in CPLEX LP text format.
    pub fn to_lp_format(&self, game: &SafetyGame) -> String {
        let mut out = String::new();
        let name = |j: usize| format!("x{j}");
        for (j, &v) in self.positions.iter().enumerate() {
            let _ = writeln!(out, "\\ {} = {}", name(j), game.position_name(v));
        }
        let linear = |terms: &mut dyn Iterator<Item = (usize, f64)>| {
            let mut s = String::new();
            for (j, c) in terms {
                let sign = if c < 0.0 { '-' } else { '+' };
                let mag = c.abs();
                if mag == 1.0 {
                    let _ = write!(s, " {sign} {}", name(j));
                } else {
                    let _ = write!(s, " {sign} {mag} {}", name(j));
                }
            }
            if s.is_empty() {
                s.push_str(" 0 x0");
            }
            s
        };
        out.push_str("Minimize\n obj:");
        let obj = linear(
            &mut self
                .objective
                .iter()
                .enumerate()
                .filter(|(_, &c)| c != 0.0)
                .map(|(j, &c)| (j, c)),
        );
        out.push_str(&obj);
        out.push_str("\nSubject To\n");
        for (i, c) in self.constraints.iter().enumerate() {
            let lhs = linear(&mut c.terms.iter().copied());
            let _ = writeln!(out, " c{i}:{lhs} >= {}", c.rhs);
        }
        out.push_str("Bounds\n");
        for (j, &(lo, hi)) in self.bounds.iter().enumerate() {
            let _ = writeln!(out, " {lo} <= {} <= {hi}", name(j));
        }
        out.push_str("End\n");
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub values: Vec<f64>,
    pub objective_value: f64,
    pub status: LpStatus,
}

/// One variable per winning position, objective 1 on player-0 positions,
/// `init ≥ 1`, a successor-sum row per player-0 position and one row per
/// player-1 position and successor.
pub fn build_relaxation(game: &SafetyGame, mp: &MostPermissiveStrategy) -> LpProblem {
    let positions: Vec<PositionId> = mp.winning.iter().collect();
    let var = |v: PositionId| positions.binary_search(&v).expect("winning position");
    let objective: Vec<f64> = positions
        .iter()
        .map(|&v| if game.owner(v) == Owner::Zero { 1.0 } else { 0.0 })
        .collect();
    let mut constraints = vec![Constraint::new(vec![(var(game.init()), 1.0)], 1.0)];
    for &v in &positions {
        match game.owner(v) {
            Owner::Zero => {
                let mut terms = vec![(var(v), -1.0)];
                for &a in mp.allowed(v) {
                    terms.push((var(game.target(v, a).expect("allowed is an edge")), 1.0));
                }
                constraints.push(Constraint::new(terms, 0.0));
            }
            Owner::One => {
                for t in game.successors(v) {
                    constraints.push(Constraint::new(vec![(var(v), -1.0), (var(t), 1.0)], 0.0));
                }
            }
        }
    }
    let bounds = vec![(0.0, 1.0); positions.len()];
    LpProblem { positions, objective, constraints, bounds }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::parse_game;
    use crate::solve::solve;

    #[test]
    fn self_loop_relaxation() {
        let g = parse_game(b"pos p 1\ninit p\nedge p u p\n").unwrap();
        let mp = solve(&g).unwrap();
        let lp = build_relaxation(&g, &mp);
        assert_eq!(lp.num_vars(), 1);
        assert_eq!(lp.objective, vec![0.0]);
        assert_eq!(lp.constraints.len(), 2);
        assert_eq!(lp.constraints[0], Constraint::new(vec![(0, 1.0)], 1.0));
        // −p + p merges into a zero coefficient.
        assert_eq!(lp.constraints[1].terms, vec![(0, 0.0)]);
        let sol = lp_solve(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_eq!(sol.objective_value, 0.0);
    }

    #[test]
    fn player0_init_with_two_successors() {
        let g = parse_game(
            b"pos i 0\npos a 1\npos b 1\ninit i\nedge i x a\nedge i y b\nedge a u i\nedge b u i\n",
        )
        .unwrap();
        let mp = solve(&g).unwrap();
        let lp = build_relaxation(&g, &mp);
        let var = |n: &str| lp.var_of(g.position_by_name(n).unwrap()).unwrap();
        let (i, a, b) = (var("i"), var("a"), var("b"));
        assert_eq!(lp.positions.len(), 3);
        assert!(lp.constraints.contains(&Constraint::new(vec![(i, 1.0)], 1.0)));
        assert!(lp
            .constraints
            .contains(&Constraint::new(vec![(i, -1.0), (a, 1.0), (b, 1.0)], 0.0)));
        assert!(lp.bounds.iter().all(|&b| b == (0.0, 1.0)));
    }

    #[test]
    fn losing_positions_get_no_variable() {
        let g = parse_game(b"pos i 0\npos l 0\npos r 1\ninit i\nedge i x r\nedge i y l\nedge r u i\n").unwrap();
        let mp = solve(&g).unwrap();
        let lp = build_relaxation(&g, &mp);
        assert_eq!(lp.num_vars(), 2);
        assert!(lp.var_of(g.position_by_name("l").unwrap()).is_none());
    }

    #[test]
    fn duplicate_targets_accumulate() {
        let c = Constraint::new(vec![(2, 1.0), (0, -1.0), (2, 1.0)], 0.0);
        assert_eq!(c.terms, vec![(0, -1.0), (2, 2.0)]);
    }

    #[test]
    fn lp_text_dump() {
        let g = parse_game(b"pos i 0\npos a 1\ninit i\nedge i x a\nedge a u i\n").unwrap();
        let lp = build_relaxation(&g, &solve(&g).unwrap());
        let text = lp.to_lp_format(&g);
        assert!(text.contains("Minimize\n obj: + x1\n"), "{text}");
        assert!(text.contains(" c0: + x1 >= 1\n"), "{text}");
        assert!(text.contains(" 0 <= x0 <= 1\n"));
        assert!(text.ends_with("End\n"));
    }
}
