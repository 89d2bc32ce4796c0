use std::time::Instant;

use super::simplex::lp_solve_until;
use super::{build_relaxation, LpError, LpStatus, INTEGRALITY_EPS};
use crate::game::{MostPermissiveStrategy, PositionalStrategy, SafetyGame};
use crate::solve::strategy_from_support;

/// Round-by-round record of a repetitive LP run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RepLpTrace {
    /// Number of LP solves.
    pub rounds: usize,
    /// Variables pinned to 0 and to 1 after each round.
    pub fixed_zero: Vec<Vec<usize>>,
    pub fixed_one: Vec<Vec<usize>>,
    /// Rounds that had to be re-solved without their new 0-fixings.
    pub zero_fix_retries: usize,
    pub first_objective: f64,
}

pub fn replp_extract(
    game: &SafetyGame,
    mp: &MostPermissiveStrategy,
) -> Result<PositionalStrategy, LpError> {
    replp_extract_traced(game, mp, None).map(|(s, _)| s)
}

/// Solves the relaxation, pins every integral variable and the largest
/// fractional one (smallest index on ties) to its value, and repeats until
/// the solution is integral. Pinned variables are never released.
pub fn replp_extract_traced(
    game: &SafetyGame,
    mp: &MostPermissiveStrategy,
    deadline: Option<Instant>,
) -> Result<(PositionalStrategy, RepLpTrace), LpError> {
    let mut lp = build_relaxation(game, mp);
    let mut trace = RepLpTrace::default();
    let mut sol = lp_solve_until(&lp, deadline)?;
    trace.rounds = 1;
    if sol.status == LpStatus::Infeasible {
        return Err(LpError::InfeasibleAfterFix);
    }
    trace.first_objective = sol.objective_value;

    loop {
        let mut fractional: Option<(usize, f64)> = None;
        let mut zeros = Vec::new();
        let mut ones = Vec::new();
        for (j, &x) in sol.values.iter().enumerate() {
            if x.abs() <= INTEGRALITY_EPS {
                zeros.push(j);
            } else if (x - 1.0).abs() <= INTEGRALITY_EPS {
                ones.push(j);
            } else if fractional.is_none_or(|(_, best)| x > best) {
                fractional = Some((j, x));
            }
        }
        let Some((pick, _)) = fractional else {
            let support: Vec<bool> = {
                let mut s = vec![false; game.num_positions()];
                for &j in &ones {
                    s[lp.positions[j].index()] = true;
                }
                s
            };
            trace.fixed_zero.push(zeros);
            trace.fixed_one.push(ones);
            return Ok((strategy_from_support(game, mp, &support), trace));
        };

        for &j in &ones {
            lp.bounds[j] = (1.0, 1.0);
        }
        lp.bounds[pick] = (1.0, 1.0);
        let upward = lp.bounds.clone();
        for &j in &zeros {
            lp.bounds[j] = (0.0, 0.0);
        }
        sol = lp_solve_until(&lp, deadline)?;
        trace.rounds += 1;
        if sol.status == LpStatus::Infeasible {
            // Only the upward fixings are guaranteed to keep a feasible point.
            trace.zero_fix_retries += 1;
            lp.bounds = upward;
            sol = lp_solve_until(&lp, deadline)?;
            trace.rounds += 1;
            if sol.status == LpStatus::Infeasible {
                return Err(LpError::InfeasibleAfterFix);
            }
        }
        trace.fixed_zero.push(pinned(&lp.bounds, 0.0));
        trace.fixed_one.push(pinned(&lp.bounds, 1.0));
    }
}

fn pinned(bounds: &[(f64, f64)], at: f64) -> Vec<usize> {
    bounds
        .iter()
        .enumerate()
        .filter(|(_, &(lo, hi))| lo == at && hi == at)
        .map(|(j, _)| j)
        .collect()
}
