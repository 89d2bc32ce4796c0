//! Winning-region fixpoint, most permissive strategy and the strategy checks
//! that every extraction method is measured against.

use std::collections::VecDeque;

use thiserror::Error;

use crate::game::{
    ActionId, MostPermissiveStrategy, Owner, PlayWitness, PositionId, PositionSet,
    PositionalStrategy, SafetyGame, ValidationVerdict,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("the initial position is losing for player 0")]
    InitLosing,
}

/// Greatest set of positions satisfying the safety conditions, computed with
/// per-position counters of remaining winning successors.
pub fn compute_winning_region(game: &SafetyGame) -> PositionSet {
    winning_region_with(game, &[], false).0
}

/// Winning region of the game in which every position flagged in `disabled`
/// has lost all of its outgoing edges. An empty slice disables nothing.
///
/// With `stop_at_init`, the computation returns as soon as the initial
/// position is removed; the returned flag reports whether init is winning.
pub(crate) fn winning_region_with(
    game: &SafetyGame,
    disabled: &[bool],
    stop_at_init: bool,
) -> (PositionSet, bool) {
    let n = game.num_positions();
    let is_disabled = |v: PositionId| disabled.get(v.index()).copied().unwrap_or(false);
    let mut winning = PositionSet::full(n);
    let mut counters: Vec<u32> = game
        .positions()
        .map(|v| if is_disabled(v) { 0 } else { game.edges(v).len() as u32 })
        .collect();
    let mut queue: Vec<PositionId> = game
        .positions()
        .filter(|&v| game.owner(v) == Owner::Zero && counters[v.index()] == 0)
        .collect();
    for &v in &queue {
        winning.remove(v);
    }
    let init = game.init();
    while let Some(v) = queue.pop() {
        if stop_at_init && v == init {
            return (winning, false);
        }
        for &u in game.predecessors(v) {
            if !winning.contains(u) || is_disabled(u) {
                continue;
            }
            let remove = match game.owner(u) {
                Owner::Zero => {
                    counters[u.index()] -= 1;
                    counters[u.index()] == 0
                }
                Owner::One => true,
            };
            if remove {
                winning.remove(u);
                queue.push(u);
            }
        }
    }
    let init_winning = winning.contains(init);
    (winning, init_winning)
}

pub fn most_permissive(
    game: &SafetyGame,
    winning: &PositionSet,
) -> Result<MostPermissiveStrategy, SolveError> {
    if !winning.contains(game.init()) {
        return Err(SolveError::InitLosing);
    }
    Ok(most_permissive_unchecked(game, winning))
}

pub(crate) fn most_permissive_unchecked(
    game: &SafetyGame,
    winning: &PositionSet,
) -> MostPermissiveStrategy {
    let allowed = game
        .positions()
        .map(|v| {
            if game.owner(v) == Owner::Zero && winning.contains(v) {
                game.edges(v)
                    .iter()
                    .filter(|&&(_, t)| winning.contains(t))
                    .map(|&(a, _)| a)
                    .collect()
            } else {
                Vec::new()
            }
        })
        .collect();
    MostPermissiveStrategy { winning: winning.clone(), allowed }
}

/// Solves the game and returns its most permissive strategy.
pub fn solve(game: &SafetyGame) -> Result<MostPermissiveStrategy, SolveError> {
    most_permissive(game, &compute_winning_region(game))
}

/// Positions reachable from init when player 0 ranges over `mp.allowed`.
pub fn permissive_reachable(game: &SafetyGame, mp: &MostPermissiveStrategy) -> PositionSet {
    let mut seen = PositionSet::empty(game.num_positions());
    let mut stack = vec![game.init()];
    seen.insert(game.init());
    while let Some(v) = stack.pop() {
        let mut visit = |t: PositionId| {
            if seen.insert(t) {
                stack.push(t);
            }
        };
        match game.owner(v) {
            Owner::Zero => {
                for &a in mp.allowed(v) {
                    visit(game.target(v, a).expect("allowed actions are edges"));
                }
            }
            Owner::One => {
                for &(_, t) in game.edges(v) {
                    visit(t);
                }
            }
        }
    }
    seen
}

pub fn prune_reachable(game: &SafetyGame, mp: &MostPermissiveStrategy) -> SafetyGame {
    let keep = permissive_reachable(game, mp);
    game.restrict(keep.as_mask())
}

/// Positions reachable from init under `strat` with player 1 unconstrained.
/// Exploration stops at player-0 positions without a usable choice.
pub fn strategy_reachable(game: &SafetyGame, strat: &PositionalStrategy) -> PositionSet {
    let mut seen = PositionSet::empty(game.num_positions());
    let mut stack = vec![game.init()];
    seen.insert(game.init());
    while let Some(v) = stack.pop() {
        let mut visit = |t: PositionId| {
            if seen.insert(t) {
                stack.push(t);
            }
        };
        match game.owner(v) {
            Owner::Zero => {
                if let Some(t) = strat.choice(v).and_then(|a| game.target(v, a)) {
                    visit(t);
                }
            }
            Owner::One => {
                for &(_, t) in game.edges(v) {
                    visit(t);
                }
            }
        }
    }
    seen
}

/// Drops every choice at a position that the strategy itself never reaches.
pub fn restrict_to_reachable(game: &SafetyGame, strat: &PositionalStrategy) -> PositionalStrategy {
    let reach = strategy_reachable(game, strat);
    let mut out = PositionalStrategy::empty(game);
    for (v, a) in strat.domain() {
        if reach.contains(v) {
            out.set(v, a);
        }
    }
    out
}

/// Checks `strat` by breadth-first exploration from init. On failure the
/// witness is a shortest play reaching the violation.
pub fn validate_strategy(
    game: &SafetyGame,
    mp: &MostPermissiveStrategy,
    strat: &PositionalStrategy,
) -> ValidationVerdict {
    let n = game.num_positions();
    let init = game.init();
    let mut parent: Vec<Option<(PositionId, ActionId)>> = vec![None; n];
    let mut seen = vec![false; n];

    let path_to = |parent: &[Option<(PositionId, ActionId)>], v: PositionId| {
        let mut trace = vec![v];
        let mut decisions = Vec::new();
        let mut cur = v;
        while let Some((p, a)) = parent[cur.index()] {
            trace.push(p);
            decisions.push(a);
            cur = p;
        }
        trace.reverse();
        decisions.reverse();
        PlayWitness { trace, decisions }
    };
    let fail = |w: PlayWitness| ValidationVerdict { winning: false, witness: Some(w) };

    if !mp.winning.contains(init) {
        return fail(PlayWitness { trace: vec![init], decisions: vec![] });
    }
    let mut queue = VecDeque::from([init]);
    seen[init.index()] = true;
    while let Some(v) = queue.pop_front() {
        let moves: Vec<(ActionId, PositionId)> = match game.owner(v) {
            Owner::Zero => {
                let Some(a) = strat.choice(v) else {
                    return fail(path_to(&parent, v));
                };
                let Some(t) = game.target(v, a) else {
                    return fail(path_to(&parent, v));
                };
                vec![(a, t)]
            }
            Owner::One => game.edges(v).to_vec(),
        };
        for (a, t) in moves {
            if !mp.winning.contains(t) {
                let mut w = path_to(&parent, v);
                w.trace.push(t);
                w.decisions.push(a);
                return fail(w);
            }
            if !seen[t.index()] {
                seen[t.index()] = true;
                parent[t.index()] = Some((v, a));
                queue.push_back(t);
            }
        }
    }
    ValidationVerdict { winning: true, witness: None }
}

/// Number of player-0 positions reachable from init under `strat`.
pub fn density(game: &SafetyGame, strat: &PositionalStrategy) -> usize {
    strategy_reachable(game, strat)
        .iter()
        .filter(|&v| game.owner(v) == Owner::Zero)
        .count()
}

/// `Σ log₂ |allowed(v)|` over the domain of the most permissive strategy.
pub fn search_space_bits(mp: &MostPermissiveStrategy) -> f64 {
    mp.allowed
        .iter()
        .filter(|a| !a.is_empty())
        .map(|a| (a.len() as f64).log2())
        .sum()
}

/// Reads a strategy off a 0/1 valuation of the positions: every player-0
/// position valued 1 takes the allowed action with the smallest id whose
/// target is valued 1. The result is restricted to its reachable part.
pub fn strategy_from_support(
    game: &SafetyGame,
    mp: &MostPermissiveStrategy,
    support: &[bool],
) -> PositionalStrategy {
    let mut strat = PositionalStrategy::empty(game);
    for v in mp.domain() {
        if !support[v.index()] {
            continue;
        }
        let pick = mp
            .allowed(v)
            .iter()
            .copied()
            .find(|&a| support[game.target(v, a).expect("allowed is an edge").index()]);
        if let Some(a) = pick {
            strat.set(v, a);
        }
    }
    restrict_to_reachable(game, &strat)
}

/// The specialization of `mp` picking the smallest allowed action everywhere,
/// restricted to its reachable part.
pub fn smallest_specialization(game: &SafetyGame, mp: &MostPermissiveStrategy) -> PositionalStrategy {
    let mut strat = PositionalStrategy::empty(game);
    for v in mp.domain() {
        strat.set(v, mp.allowed(v)[0]);
    }
    restrict_to_reachable(game, &strat)
}
