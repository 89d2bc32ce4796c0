//! Explicit two-player safety games and the strategy types built on top of them.
//!
//! Position and action names are interned into dense indices when a game is
//! built. Names are sorted before interning, so index order is name order and
//! every "smallest id" rule elsewhere in the crate is a comparison on indices.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

/// Which player moves from a position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Owner {
    /// The safety player.
    Zero,
    /// The environment.
    One,
}

impl Owner {
    pub fn as_digit(self) -> u8 {
        match self {
            Owner::Zero => 0,
            Owner::One => 1,
        }
    }
}

impl fmt::Display for Owner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_digit())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PositionId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ActionId(pub u32);

impl PositionId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl ActionId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GameError {
    #[error("position `{0}` declared twice")]
    DuplicatePosition(String),
    #[error("undeclared position `{0}`")]
    UndeclaredPosition(String),
    #[error("duplicate edge from `{0}` with action `{1}`")]
    DuplicateEdge(String, String),
    #[error("action `{0}` is used from positions of both players")]
    ActionOwnerMismatch(String),
    #[error("no initial position declared")]
    MissingInit,
    #[error("initial position declared twice")]
    DuplicateInit,
    #[error("invalid identifier `{0}`")]
    InvalidIdentifier(String),
}

/// A safety game `(V⁰, V¹, Σ⁰, Σ¹, E⁰, E¹, v_init)`.
///
/// Edges are stored per source position, sorted by action id. A reverse
/// adjacency (one entry per edge, so multiplicities are kept) backs the
/// fixpoint computations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SafetyGame {
    position_names: Vec<String>,
    owners: Vec<Owner>,
    action_names: Vec<String>,
    action_owners: Vec<Owner>,
    edges: Vec<Vec<(ActionId, PositionId)>>,
    preds: Vec<Vec<PositionId>>,
    init: PositionId,
}

impl SafetyGame {
    pub fn num_positions(&self) -> usize {
        self.owners.len()
    }

    pub fn num_actions(&self) -> usize {
        self.action_names.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.iter().map(Vec::len).sum()
    }

    pub fn positions(&self) -> impl Iterator<Item = PositionId> + '_ {
        (0..self.owners.len() as u32).map(PositionId)
    }

    pub fn positions_of(&self, owner: Owner) -> impl Iterator<Item = PositionId> + '_ {
        self.positions().filter(move |&v| self.owner(v) == owner)
    }

    pub fn actions_of(&self, owner: Owner) -> impl Iterator<Item = ActionId> + '_ {
        (0..self.action_names.len() as u32)
            .map(ActionId)
            .filter(move |&a| self.action_owners[a.index()] == owner)
    }

    pub fn count_positions(&self, owner: Owner) -> usize {
        self.owners.iter().filter(|&&o| o == owner).count()
    }

    pub fn count_actions(&self, owner: Owner) -> usize {
        self.action_owners.iter().filter(|&&o| o == owner).count()
    }

    #[inline]
    pub fn owner(&self, v: PositionId) -> Owner {
        self.owners[v.index()]
    }

    #[inline]
    pub fn init(&self) -> PositionId {
        self.init
    }

    pub fn position_name(&self, v: PositionId) -> &str {
        &self.position_names[v.index()]
    }

    pub fn action_name(&self, a: ActionId) -> &str {
        &self.action_names[a.index()]
    }

    pub fn action_owner(&self, a: ActionId) -> Owner {
        self.action_owners[a.index()]
    }

    pub fn position_by_name(&self, name: &str) -> Option<PositionId> {
        self.position_names
            .binary_search_by(|n| n.as_str().cmp(name))
            .ok()
            .map(|i| PositionId(i as u32))
    }

    pub fn action_by_name(&self, name: &str) -> Option<ActionId> {
        self.action_names
            .binary_search_by(|n| n.as_str().cmp(name))
            .ok()
            .map(|i| ActionId(i as u32))
    }

    /// Outgoing edges of `v`, sorted by action id.
    #[inline]
    pub fn edges(&self, v: PositionId) -> &[(ActionId, PositionId)] {
        &self.edges[v.index()]
    }

    /// Source of every edge entering `v`, once per edge.
    #[inline]
    pub fn predecessors(&self, v: PositionId) -> &[PositionId] {
        &self.preds[v.index()]
    }

    pub fn target(&self, v: PositionId, a: ActionId) -> Option<PositionId> {
        let out = &self.edges[v.index()];
        out.binary_search_by_key(&a, |&(x, _)| x)
            .ok()
            .map(|i| out[i].1)
    }

    /// Distinct successors of `v` in ascending id order.
    pub fn successors(&self, v: PositionId) -> Vec<PositionId> {
        let mut s: Vec<PositionId> = self.edges(v).iter().map(|&(_, t)| t).collect();
        s.sort_unstable();
        s.dedup();
        s
    }

    /// Returns true when every edge connects positions of different owners.
    pub fn is_alternating(&self) -> bool {
        self.positions()
            .all(|v| self.edges(v).iter().all(|&(_, t)| self.owner(t) != self.owner(v)))
    }

    /// Builds a new game over the named subset of positions, keeping exactly
    /// the edges whose endpoints are both retained.
    pub fn restrict(&self, keep: &[bool]) -> SafetyGame {
        debug_assert!(keep[self.init.index()]);
        let mut b = GameBuilder::new();
        for v in self.positions().filter(|v| keep[v.index()]) {
            b.add_position(self.position_name(v), self.owner(v))
                .expect("names are unique in the source game");
        }
        for v in self.positions().filter(|v| keep[v.index()]) {
            for &(a, t) in self.edges(v) {
                if keep[t.index()] {
                    b.add_edge(self.position_name(v), self.action_name(a), self.position_name(t))
                        .expect("edges are consistent in the source game");
                }
            }
        }
        b.set_init(self.position_name(self.init))
            .expect("init is retained");
        b.build().expect("restriction of a valid game is valid")
    }
}

/// Name-based game construction. Ids are assigned at [`GameBuilder::build`].
#[derive(Debug, Default, Clone)]
pub struct GameBuilder {
    positions: BTreeMap<String, Owner>,
    edges: BTreeMap<(String, String), String>,
    init: Option<String>,
}

pub(crate) fn valid_identifier(s: &str) -> bool {
    !s.is_empty() && !s.starts_with('#') && !s.chars().any(char::is_whitespace)
}

impl GameBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_position(&mut self, name: &str, owner: Owner) -> Result<&mut Self, GameError> {
        if !valid_identifier(name) {
            return Err(GameError::InvalidIdentifier(name.to_string()));
        }
        if self.positions.contains_key(name) {
            return Err(GameError::DuplicatePosition(name.to_string()));
        }
        self.positions.insert(name.to_string(), owner);
        Ok(self)
    }

    pub fn has_position(&self, name: &str) -> bool {
        self.positions.contains_key(name)
    }

    pub fn add_edge(&mut self, src: &str, action: &str, dst: &str) -> Result<&mut Self, GameError> {
        if !valid_identifier(action) {
            return Err(GameError::InvalidIdentifier(action.to_string()));
        }
        for p in [src, dst] {
            if !self.positions.contains_key(p) {
                return Err(GameError::UndeclaredPosition(p.to_string()));
            }
        }
        let key = (src.to_string(), action.to_string());
        if self.edges.contains_key(&key) {
            return Err(GameError::DuplicateEdge(key.0, key.1));
        }
        self.edges.insert(key, dst.to_string());
        Ok(self)
    }

    pub fn set_init(&mut self, name: &str) -> Result<&mut Self, GameError> {
        if !self.positions.contains_key(name) {
            return Err(GameError::UndeclaredPosition(name.to_string()));
        }
        if self.init.is_some() {
            return Err(GameError::DuplicateInit);
        }
        self.init = Some(name.to_string());
        Ok(self)
    }

    pub fn build(&self) -> Result<SafetyGame, GameError> {
        let init_name = self.init.as_ref().ok_or(GameError::MissingInit)?;

        let position_names: Vec<String> = self.positions.keys().cloned().collect();
        let owners: Vec<Owner> = self.positions.values().copied().collect();
        let pos_index: HashMap<&str, u32> = position_names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.as_str(), i as u32))
            .collect();

        let mut action_owner_map: BTreeMap<&str, Owner> = BTreeMap::new();
        for (src, action) in self.edges.keys() {
            let owner = self.positions[src];
            match action_owner_map.get(action.as_str()) {
                Some(&o) if o != owner => {
                    return Err(GameError::ActionOwnerMismatch(action.clone()));
                }
                _ => {
                    action_owner_map.insert(action, owner);
                }
            }
        }
        let action_names: Vec<String> = action_owner_map.keys().map(|s| s.to_string()).collect();
        let action_owners: Vec<Owner> = action_owner_map.values().copied().collect();
        let act_index: HashMap<&str, u32> = action_names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.as_str(), i as u32))
            .collect();

        let n = position_names.len();
        let mut edges = vec![Vec::new(); n];
        let mut preds = vec![Vec::new(); n];
        for ((src, action), dst) in &self.edges {
            let s = PositionId(pos_index[src.as_str()]);
            let t = PositionId(pos_index[dst.as_str()]);
            edges[s.index()].push((ActionId(act_index[action.as_str()]), t));
            preds[t.index()].push(s);
        }
        for out in &mut edges {
            out.sort_unstable();
        }
        for p in &mut preds {
            p.sort_unstable();
        }

        let init = PositionId(pos_index[init_name.as_str()]);
        drop(pos_index);
        drop(act_index);
        Ok(SafetyGame {
            position_names,
            owners,
            action_names,
            action_owners,
            edges,
            preds,
            init,
        })
    }
}

/// A set of positions of one particular game, stored as a membership vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PositionSet {
    members: Vec<bool>,
    len: usize,
}

impl PositionSet {
    pub fn empty(n: usize) -> Self {
        Self { members: vec![false; n], len: 0 }
    }

    pub fn full(n: usize) -> Self {
        Self { members: vec![true; n], len: n }
    }

    pub fn from_mask(members: Vec<bool>) -> Self {
        let len = members.iter().filter(|&&b| b).count();
        Self { members, len }
    }

    #[inline]
    pub fn contains(&self, v: PositionId) -> bool {
        self.members[v.index()]
    }

    pub fn insert(&mut self, v: PositionId) -> bool {
        let slot = &mut self.members[v.index()];
        let fresh = !*slot;
        *slot = true;
        self.len += fresh as usize;
        fresh
    }

    pub fn remove(&mut self, v: PositionId) -> bool {
        let slot = &mut self.members[v.index()];
        let present = *slot;
        *slot = false;
        self.len -= present as usize;
        present
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn capacity(&self) -> usize {
        self.members.len()
    }

    pub fn as_mask(&self) -> &[bool] {
        &self.members
    }

    pub fn iter(&self) -> impl Iterator<Item = PositionId> + '_ {
        self.members
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| PositionId(i as u32))
    }
}

/// The most permissive winning strategy `f′` together with the winning region.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MostPermissiveStrategy {
    pub winning: PositionSet,
    /// Allowed actions per position, ascending. Empty outside `winning ∩ V⁰`.
    pub allowed: Vec<Vec<ActionId>>,
}

impl MostPermissiveStrategy {
    pub fn allowed(&self, v: PositionId) -> &[ActionId] {
        &self.allowed[v.index()]
    }

    /// Player-0 positions in the domain, ascending.
    pub fn domain(&self) -> impl Iterator<Item = PositionId> + '_ {
        self.allowed
            .iter()
            .enumerate()
            .filter(|(_, a)| !a.is_empty())
            .map(|(i, _)| PositionId(i as u32))
    }
}

/// A partial map from player-0 positions to actions.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PositionalStrategy {
    choice: Vec<Option<ActionId>>,
}

impl PositionalStrategy {
    pub fn empty(game: &SafetyGame) -> Self {
        Self { choice: vec![None; game.num_positions()] }
    }

    #[inline]
    pub fn choice(&self, v: PositionId) -> Option<ActionId> {
        self.choice.get(v.index()).copied().flatten()
    }

    pub fn set(&mut self, v: PositionId, a: ActionId) {
        self.choice[v.index()] = Some(a);
    }

    pub fn unset(&mut self, v: PositionId) {
        self.choice[v.index()] = None;
    }

    /// Positions with a defined choice, ascending.
    pub fn domain(&self) -> impl Iterator<Item = (PositionId, ActionId)> + '_ {
        self.choice
            .iter()
            .enumerate()
            .filter_map(|(i, c)| c.map(|a| (PositionId(i as u32), a)))
    }

    pub fn domain_len(&self) -> usize {
        self.choice.iter().filter(|c| c.is_some()).count()
    }

    /// Re-expresses the strategy over another game by position and action name.
    /// Choices whose names are missing in `to` are dropped.
    pub fn translate(&self, from: &SafetyGame, to: &SafetyGame) -> PositionalStrategy {
        let mut out = PositionalStrategy::empty(to);
        for (v, a) in self.domain() {
            let (Some(v2), Some(a2)) = (
                to.position_by_name(from.position_name(v)),
                to.action_by_name(from.action_name(a)),
            ) else {
                continue;
            };
            out.set(v2, a2);
        }
        out
    }

    pub fn choices_by_name<'g>(&self, game: &'g SafetyGame) -> BTreeSet<(&'g str, &'g str)> {
        self.domain()
            .map(|(v, a)| (game.position_name(v), game.action_name(a)))
            .collect()
    }
}

/// A finite play `π` with its decision sequence `ρ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlayWitness {
    pub trace: Vec<PositionId>,
    pub decisions: Vec<ActionId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationVerdict {
    pub winning: bool,
    pub witness: Option<PlayWitness>,
}
