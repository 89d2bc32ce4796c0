use std::time::Instant;

use super::{build_cnf, encode_at_most_k, sat_solve_with, SatError, SatStatus, SolverLimits};
use crate::game::{MostPermissiveStrategy, Owner, PositionalStrategy, SafetyGame};
use crate::heuristics::{smart_extract_with_order, smart_order};
use crate::lp::{build_relaxation, lp_solve_until, INTEGRALITY_EPS};
use crate::rng::RngSeed;
use crate::solve::{density, smallest_specialization, strategy_from_support};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SatExtraction {
    pub strategy: PositionalStrategy,
    /// True when the last bound was closed by an unsatisfiability proof, so
    /// the strategy has minimum density.
    pub certified: bool,
    /// Why the search stopped early, if it did.
    pub interrupted: Option<SatError>,
    /// Number of SAT calls made.
    pub calls: usize,
}

pub fn sat_exact_extract(game: &SafetyGame, mp: &MostPermissiveStrategy) -> SatExtraction {
    sat_exact_extract_with(game, mp, &SolverLimits::default())
}

/// Binary search on the density bound `k`. The range starts at the rounded-up
/// relaxation optimum and the density of the seed-0 local search; every
/// satisfying model is decoded and the upper end drops to its density.
pub fn sat_exact_extract_with(
    game: &SafetyGame,
    mp: &MostPermissiveStrategy,
    limits: &SolverLimits,
) -> SatExtraction {
    let order = smart_order(game, &mp.winning, RngSeed(0));
    let mut best = match smart_extract_with_order(game, &order, limits.deadline) {
        Ok(s) => s,
        Err(_) => {
            return SatExtraction {
                strategy: smallest_specialization(game, mp),
                certified: false,
                interrupted: Some(SatError::Deadline),
                calls: 0,
            }
        }
    };
    let mut hi = density(game, &best);
    let mut lo = match lp_solve_until(&build_relaxation(game, mp), limits.deadline) {
        Ok(sol) => ((sol.objective_value - INTEGRALITY_EPS).ceil().max(0.0)) as usize,
        Err(_) => 0,
    };
    let (base, map) = build_cnf(game, mp);
    let p0_vars: Vec<i32> = map
        .positions
        .iter()
        .filter(|&&v| game.owner(v) == Owner::Zero)
        .map(|&v| map.var(v).expect("winning"))
        .collect();

    let mut calls = 0;
    while lo < hi {
        if limits.deadline.is_some_and(|d| Instant::now() >= d) {
            return SatExtraction { strategy: best, certified: false, interrupted: Some(SatError::Deadline), calls };
        }
        let mid = lo + (hi - lo) / 2;
        let mut cnf = base.clone();
        encode_at_most_k(&mut cnf, &p0_vars, mid);
        calls += 1;
        match sat_solve_with(&cnf, limits) {
            Ok(out) if out.status == SatStatus::Sat => {
                let model = out.model.expect("sat model");
                let support = map.support(game.num_positions(), &model[..map.positions.len()]);
                let s = strategy_from_support(game, mp, &support);
                let d = density(game, &s);
                debug_assert!(d <= mid);
                best = s;
                hi = d;
            }
            Ok(_) => lo = mid + 1,
            Err(e) => {
                return SatExtraction { strategy: best, certified: false, interrupted: Some(e), calls }
            }
        }
    }
    SatExtraction { strategy: best, certified: true, interrupted: None, calls }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::parse_game;
    use crate::generators::gen_adversarial;
    use crate::solve::{solve, validate_strategy};

    #[test]
    fn adversarial_optimum_is_two_per_gadget() {
        for i in 1..=3 {
            let g = gen_adversarial(i);
            let mp = solve(&g).unwrap();
            let r = sat_exact_extract(&g, &mp);
            assert!(r.certified);
            assert!(validate_strategy(&g, &mp, &r.strategy).winning);
            assert_eq!(density(&g, &r.strategy), 2 * i);
        }
    }

    #[test]
    fn player1_init_with_no_player0_needed() {
        let g = parse_game(b"pos p 1\ninit p\nedge p u p\n").unwrap();
        let mp = solve(&g).unwrap();
        let r = sat_exact_extract(&g, &mp);
        assert!(r.certified);
        assert_eq!(density(&g, &r.strategy), 0);
    }
}
