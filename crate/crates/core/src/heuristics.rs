//! Randomized extraction: uniform random specialization of the most
//! permissive strategy, and the local search that grows a maximal set `Z` of
//! player-0 positions whose moves stay undefined.

use std::time::Instant;

use crate::game::{
    MostPermissiveStrategy, Owner, PositionId, PositionSet, PositionalStrategy, SafetyGame,
};
use crate::rng::{RngSeed, SplitMix64};
use crate::solve::{
    most_permissive_unchecked, restrict_to_reachable, smallest_specialization,
    strategy_reachable, winning_region_with,
};

/// The wall-clock limit was hit before the extraction finished.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DeadlineExceeded;

pub fn random_extract(
    game: &SafetyGame,
    mp: &MostPermissiveStrategy,
    seed: RngSeed,
) -> PositionalStrategy {
    let mut rng = SplitMix64::new(seed);
    let mut strat = PositionalStrategy::empty(game);
    for v in mp.domain() {
        let allowed = mp.allowed(v);
        strat.set(v, allowed[rng.index(allowed.len())]);
    }
    restrict_to_reachable(game, &strat)
}

/// Winning player-0 positions, shuffled with the seeded Fisher–Yates.
pub fn smart_order(game: &SafetyGame, winning: &PositionSet, seed: RngSeed) -> Vec<PositionId> {
    let mut order: Vec<PositionId> = winning
        .iter()
        .filter(|&v| game.owner(v) == Owner::Zero)
        .collect();
    SplitMix64::new(seed).shuffle(&mut order);
    order
}

pub fn smart_random_extract(
    game: &SafetyGame,
    winning: &PositionSet,
    seed: RngSeed,
) -> PositionalStrategy {
    let order = smart_order(game, winning, seed);
    smart_extract_with_order(game, &order, None).expect("no deadline")
}

/// Local search over an explicit candidate order: each candidate's outgoing
/// edges are deleted for good when init stays winning without them.
pub fn smart_extract_with_order(
    game: &SafetyGame,
    order: &[PositionId],
    deadline: Option<Instant>,
) -> Result<PositionalStrategy, DeadlineExceeded> {
    let mut deleted = vec![false; game.num_positions()];
    for &v in order {
        if deadline.is_some_and(|d| Instant::now() >= d) {
            return Err(DeadlineExceeded);
        }
        deleted[v.index()] = true;
        let (_, init_winning) = winning_region_with(game, &deleted, true);
        if !init_winning {
            deleted[v.index()] = false;
        }
    }
    Ok(residual_strategy(game, &deleted))
}

/// The smallest-id specialization of the residual game's most permissive
/// strategy after deleting the edges of every flagged position.
pub(crate) fn residual_strategy(game: &SafetyGame, deleted: &[bool]) -> PositionalStrategy {
    let (winning, init_winning) = winning_region_with(game, deleted, false);
    assert!(init_winning, "deleted set must keep init winning");
    let mp = most_permissive_unchecked(game, &winning);
    smallest_specialization(game, &mp)
}

/// True when no reachable choice of `strat` can be dropped: with every other
/// player-0 position left undefined, deleting the edges of any position in
/// the reachable domain makes init losing.
pub fn is_locally_optimal(game: &SafetyGame, strat: &PositionalStrategy) -> bool {
    let reach = strategy_reachable(game, strat);
    let domain: Vec<PositionId> = strat.domain().map(|(v, _)| v).filter(|&v| reach.contains(v)).collect();
    let mut deleted: Vec<bool> = game.positions().map(|v| game.owner(v) == Owner::Zero).collect();
    for &v in &domain {
        deleted[v.index()] = false;
    }
    domain.iter().all(|&v| {
        deleted[v.index()] = true;
        let (_, init_winning) = winning_region_with(game, &deleted, true);
        deleted[v.index()] = false;
        !init_winning
    })
}
