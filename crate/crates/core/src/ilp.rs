//! Exact sparsest-strategy extraction by LP-based branch and bound.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use thiserror::Error;

use crate::game::{MostPermissiveStrategy, PositionalStrategy, SafetyGame};
use crate::heuristics::{smart_extract_with_order, smart_order};
use crate::lp::{build_relaxation, lp_solve_until, LpError, LpProblem, LpStatus, INTEGRALITY_EPS};
use crate::rng::RngSeed;
use crate::solve::{density, smallest_specialization, strategy_from_support};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IlpLimits {
    pub max_nodes: u64,
    pub deadline: Option<Instant>,
}

impl Default for IlpLimits {
    fn default() -> Self {
        Self { max_nodes: 1_000_000, deadline: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum IlpStop {
    #[error("node budget exhausted")]
    NodeBudget,
    #[error("deadline exceeded")]
    Deadline,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IlpExtraction {
    pub strategy: PositionalStrategy,
    /// True when the search tree was exhausted.
    pub certified: bool,
    pub interrupted: Option<IlpStop>,
    /// LP relaxations solved.
    pub nodes: u64,
}

/// An open subproblem with its solved relaxation.
#[derive(Debug, Clone)]
struct BnbNode {
    bound: f64,
    depth: usize,
    fixed_zero_last: bool,
    fixings: Vec<(usize, bool)>,
    values: Vec<f64>,
}

impl BnbNode {
    fn key(&self, other: &Self) -> Ordering {
        // BinaryHeap pops the maximum: smallest bound, then deepest, then the
        // 0-branch.
        other
            .bound
            .total_cmp(&self.bound)
            .then(self.depth.cmp(&other.depth))
            .then(self.fixed_zero_last.cmp(&other.fixed_zero_last))
    }
}

impl PartialEq for BnbNode {
    fn eq(&self, other: &Self) -> bool {
        self.key(other) == Ordering::Equal
    }
}

impl Eq for BnbNode {}

impl PartialOrd for BnbNode {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for BnbNode {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key(other)
    }
}

pub fn ilp_exact_extract(game: &SafetyGame, mp: &MostPermissiveStrategy) -> IlpExtraction {
    ilp_exact_extract_with(game, mp, &IlpLimits::default())
}

/// Best-first branch and bound on the most fractional variable. The seed-0
/// local search supplies the first incumbent; a node is pruned when its
/// rounded-up bound cannot beat the incumbent.
pub fn ilp_exact_extract_with(
    game: &SafetyGame,
    mp: &MostPermissiveStrategy,
    limits: &IlpLimits,
) -> IlpExtraction {
    let stopped = |strategy, why, nodes| IlpExtraction {
        strategy,
        certified: false,
        interrupted: Some(why),
        nodes,
    };
    let order = smart_order(game, &mp.winning, RngSeed(0));
    let Ok(mut best) = smart_extract_with_order(game, &order, limits.deadline) else {
        return stopped(smallest_specialization(game, mp), IlpStop::Deadline, 0);
    };
    let mut incumbent = density(game, &best);
    let base = build_relaxation(game, mp);
    let mut nodes = 0u64;

    let solve = |fixings: &[(usize, bool)], nodes: &mut u64| -> Result<Option<(f64, Vec<f64>)>, IlpStop> {
        let mut lp: LpProblem = base.clone();
        for &(j, one) in fixings {
            let b = if one { 1.0 } else { 0.0 };
            lp.bounds[j] = (b, b);
        }
        *nodes += 1;
        match lp_solve_until(&lp, limits.deadline) {
            Ok(sol) if sol.status == LpStatus::Optimal => Ok(Some((sol.objective_value, sol.values))),
            Ok(_) => Ok(None),
            Err(LpError::Deadline) => Err(IlpStop::Deadline),
            Err(e) => panic!("relaxation is well formed: {e}"),
        }
    };
    let prunable = |bound: f64, incumbent: usize| (bound - INTEGRALITY_EPS).ceil() >= incumbent as f64;

    let mut open = BinaryHeap::new();
    match solve(&[], &mut nodes) {
        Ok(Some((bound, values))) => open.push(BnbNode {
            bound,
            depth: 0,
            fixed_zero_last: false,
            fixings: Vec::new(),
            values,
        }),
        Ok(None) => {}
        Err(why) => return stopped(best, why, nodes),
    }

    while let Some(node) = open.pop() {
        if prunable(node.bound, incumbent) {
            continue;
        }
        let branch = node
            .values
            .iter()
            .enumerate()
            .filter(|(_, &x)| x > INTEGRALITY_EPS && x < 1.0 - INTEGRALITY_EPS)
            .map(|(j, &x)| (j, (x - 0.5).abs()))
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
            .map(|(j, _)| j);
        let Some(j) = branch else {
            let mut support = vec![false; game.num_positions()];
            for (k, &x) in node.values.iter().enumerate() {
                support[base.positions[k].index()] = x > 0.5;
            }
            let s = strategy_from_support(game, mp, &support);
            let d = density(game, &s);
            if d < incumbent {
                incumbent = d;
                best = s;
            }
            continue;
        };
        for one in [false, true] {
            if nodes >= limits.max_nodes {
                return stopped(best, IlpStop::NodeBudget, nodes);
            }
            let mut fixings = node.fixings.clone();
            fixings.push((j, one));
            match solve(&fixings, &mut nodes) {
                Ok(Some((bound, values))) if !prunable(bound, incumbent) => open.push(BnbNode {
                    bound,
                    depth: node.depth + 1,
                    fixed_zero_last: !one,
                    fixings,
                    values,
                }),
                Ok(_) => {}
                Err(why) => return stopped(best, why, nodes),
            }
        }
    }
    IlpExtraction { strategy: best, certified: true, interrupted: None, nodes }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::parse_game;
    use crate::generators::{gen_adversarial, gen_chain};
    use crate::solve::{solve, validate_strategy};

    #[test]
    fn chain_density_equals_length() {
        for n in 1..=5 {
            let g = gen_chain(n);
            let mp = solve(&g).unwrap();
            let r = ilp_exact_extract(&g, &mp);
            assert!(r.certified);
            assert_eq!(density(&g, &r.strategy), n);
        }
    }

    #[test]
    fn adversarial_optimum() {
        let g = gen_adversarial(3);
        let mp = solve(&g).unwrap();
        let r = ilp_exact_extract(&g, &mp);
        assert!(r.certified);
        assert!(validate_strategy(&g, &mp, &r.strategy).winning);
        assert_eq!(density(&g, &r.strategy), 6);
    }

    #[test]
    fn fractional_root_is_branched() {
        let g = parse_game(
            b"pos i 0\npos r 1\npos s 1\npos a 0\npos b 0\npos c 0\npos d 0\npos t 1\ninit i\n\
              edge i x r\nedge i y s\nedge r u a\nedge r v b\nedge s u c\nedge s v d\n\
              edge a x t\nedge b x t\nedge c x t\nedge d x t\nedge t u t\n",
        )
        .unwrap();
        let mp = solve(&g).unwrap();
        let r = ilp_exact_extract(&g, &mp);
        assert!(r.certified);
        assert_eq!(density(&g, &r.strategy), 3);
    }

    #[test]
    fn heap_prefers_low_bound_then_depth_then_zero() {
        let n = |bound, depth, z| BnbNode {
            bound,
            depth,
            fixed_zero_last: z,
            fixings: vec![],
            values: vec![],
        };
        let mut h = BinaryHeap::from(vec![n(2.0, 5, true), n(1.0, 1, false), n(1.0, 2, false), n(1.0, 2, true)]);
        let order: Vec<(f64, usize, bool)> =
            std::iter::from_fn(|| h.pop().map(|x| (x.bound, x.depth, x.fixed_zero_last))).collect();
        assert_eq!(order, vec![(1.0, 2, true), (1.0, 2, false), (1.0, 1, false), (2.0, 5, true)]);
    }
}
