//! Exhaustive ground truth for small games.

use std::collections::BTreeSet;

use rayon::prelude::*;
use thiserror::Error;

use crate::game::{ActionId, MostPermissiveStrategy, Owner, PositionId, PositionalStrategy, SafetyGame};
use crate::heuristics::residual_strategy;
use crate::solve::{density, permissive_reachable, restrict_to_reachable, winning_region_with};

pub const MAX_ORACLE_BITS: f64 = 24.0;
pub const MAX_LOCAL_OPTIMA_POSITIONS: usize = 24;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("search space of {0:.2} bits exceeds the oracle limit")]
    SearchSpaceTooLarge(f64),
    #[error("{0} winning player-0 positions exceed the enumeration limit")]
    TooManyPositions(usize),
}

/// Minimum density over every specialization of `mp`.
///
/// Only player-0 positions reachable under `mp` are enumerated (the rest never
/// influence density), so the guard applies to the pruned search space. The
/// witness is the minimizer with the lexicographically smallest action tuple
/// over those positions in id order.
pub fn brute_force_min_density(
    game: &SafetyGame,
    mp: &MostPermissiveStrategy,
) -> Result<(usize, PositionalStrategy), OracleError> {
    let reach = permissive_reachable(game, mp);
    let domain: Vec<PositionId> = mp.domain().filter(|&v| reach.contains(v)).collect();
    let bits: f64 = domain.iter().map(|&v| (mp.allowed(v).len() as f64).log2()).sum();
    if bits > MAX_ORACLE_BITS + 1e-9 {
        return Err(OracleError::SearchSpaceTooLarge(bits));
    }
    let radix: Vec<u64> = domain.iter().map(|&v| mp.allowed(v).len() as u64).collect();
    let total: u64 = radix.iter().product();

    let decode = |mut idx: u64, choice: &mut Vec<Option<ActionId>>| {
        for (k, &v) in domain.iter().enumerate().rev() {
            let r = radix[k];
            choice[v.index()] = Some(mp.allowed(v)[(idx % r) as usize]);
            idx /= r;
        }
    };
    let (best_density, best_idx) = (0..total)
        .into_par_iter()
        .map_init(
            || (vec![None; game.num_positions()], Scratch::new(game.num_positions())),
            |(choice, scratch), idx| {
                decode(idx, choice);
                (scratch.density(game, choice), idx)
            },
        )
        .min()
        .expect("at least one specialization");

    let mut choice = vec![None; game.num_positions()];
    decode(best_idx, &mut choice);
    let mut strat = PositionalStrategy::empty(game);
    for v in &domain {
        strat.set(*v, choice[v.index()].expect("decoded"));
    }
    let strat = restrict_to_reachable(game, &strat);
    debug_assert_eq!(density(game, &strat), best_density);
    Ok((best_density, strat))
}

/// Reusable buffers for counting reachable player-0 positions.
struct Scratch {
    seen: Vec<bool>,
    stack: Vec<PositionId>,
}

impl Scratch {
    fn new(n: usize) -> Self {
        Self { seen: vec![false; n], stack: Vec::new() }
    }

    fn density(&mut self, game: &SafetyGame, choice: &[Option<ActionId>]) -> usize {
        self.seen.iter_mut().for_each(|s| *s = false);
        let mut count = 0;
        self.stack.push(game.init());
        self.seen[game.init().index()] = true;
        while let Some(v) = self.stack.pop() {
            match game.owner(v) {
                Owner::Zero => {
                    count += 1;
                    if let Some(t) = choice[v.index()].and_then(|a| game.target(v, a)) {
                        if !self.seen[t.index()] {
                            self.seen[t.index()] = true;
                            self.stack.push(t);
                        }
                    }
                }
                Owner::One => {
                    for &(_, t) in game.edges(v) {
                        if !self.seen[t.index()] {
                            self.seen[t.index()] = true;
                            self.stack.push(t);
                        }
                    }
                }
            }
        }
        count
    }
}

/// Densities of all locally optimal deletion sets.
///
/// A set `Z` of winning player-0 positions is deletable when init stays
/// winning after removing the outgoing edges of every position in `Z`.
/// Deletable sets are closed under subsets, so a depth-first search adding
/// positions in increasing id order visits each one once; an element that
/// cannot be added to a set cannot be added to any superset either.
pub fn enumerate_local_optima(game: &SafetyGame) -> Result<BTreeSet<usize>, OracleError> {
    let (winning, init_winning) = winning_region_with(game, &vec![false; game.num_positions()], false);
    let candidates: Vec<PositionId> = winning
        .iter()
        .filter(|&v| game.owner(v) == Owner::Zero)
        .collect();
    if candidates.len() > MAX_LOCAL_OPTIMA_POSITIONS {
        return Err(OracleError::TooManyPositions(candidates.len()));
    }
    let mut out = BTreeSet::new();
    if !init_winning {
        return Ok(out);
    }
    let mut deleted = vec![false; game.num_positions()];
    let all: Vec<usize> = (0..candidates.len()).collect();
    explore(game, &candidates, &mut deleted, 0, &all, &mut out);
    Ok(out)
}

fn explore(
    game: &SafetyGame,
    candidates: &[PositionId],
    deleted: &mut [bool],
    next: usize,
    addable_before: &[usize],
    out: &mut BTreeSet<usize>,
) {
    let addable: Vec<usize> = addable_before
        .iter()
        .copied()
        .filter(|&k| {
            let v = candidates[k].index();
            if deleted[v] {
                return false;
            }
            deleted[v] = true;
            let (_, ok) = winning_region_with(game, deleted, true);
            deleted[v] = false;
            ok
        })
        .collect();
    if addable.is_empty() {
        out.insert(density(game, &residual_strategy(game, deleted)));
        return;
    }
    for &k in addable.iter().filter(|&&k| k >= next) {
        let v = candidates[k].index();
        deleted[v] = true;
        explore(game, candidates, deleted, k + 1, &addable, out);
        deleted[v] = false;
    }
}
