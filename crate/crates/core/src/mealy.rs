//! Mealy machines from positional strategies and from strategy automata.
//!
//! A DFA file uses the game grammar plus `accepting <id>` lines. The owner of
//! a `pos` line is the owner of the letters leaving that state; an
//! `action <name> <owner>` line tags a letter explicitly, which is needed
//! when one state reads letters of both players. Without any `accepting`
//! line every state accepts.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;

use thiserror::Error;

use crate::format::{records, ParseError};
use crate::game::{Owner, PositionalStrategy, SafetyGame};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MealyError {
    #[error("game is not strictly alternating")]
    NotAlternating,
    #[error("initial position must belong to player 1")]
    InitNotPlayer1,
    #[error("strategy has no choice at reachable position `{0}`")]
    UndefinedChoice(String),
    #[error("automaton does not alternate player-1 and player-0 letters at state `{0}`")]
    NonAlternatingDfa(String),
    #[error("input `{1}` at state `{0}` has no player-0 continuation")]
    DeadEnd(String, String),
}

/// Which player-0 letter to emit when the automaton offers several.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum OutputPick {
    #[default]
    Smallest,
    Largest,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dfa {
    pub states: Vec<String>,
    pub initial: usize,
    pub accepting: BTreeSet<usize>,
    /// Letter name → owner.
    pub actions: BTreeMap<String, Owner>,
    /// `(state, letter) → state`.
    pub transitions: BTreeMap<(usize, String), usize>,
}

impl Dfa {
    fn out(&self, q: usize, owner: Owner) -> impl Iterator<Item = (&str, usize)> + '_ {
        self.transitions
            .range((q, String::new())..)
            .take_while(move |((s, _), _)| *s == q)
            .filter(move |((_, a), _)| self.actions[a] == owner)
            .map(|((_, a), &t)| (a.as_str(), t))
    }

    pub fn accepts_word(&self, word: &[&str]) -> bool {
        let mut q = self.initial;
        for &a in word {
            match self.transitions.get(&(q, a.to_string())) {
                Some(&t) => q = t,
                None => return false,
            }
        }
        self.accepting.contains(&q)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MealyMachine {
    /// Source state (game position or DFA state) behind each machine state.
    pub origin: Vec<String>,
    pub initial: usize,
    /// `(state, input) → (output, target)`.
    pub transitions: BTreeMap<(usize, String), (String, usize)>,
}

impl MealyMachine {
    pub fn num_states(&self) -> usize {
        self.origin.len()
    }

    pub fn state_name(i: usize) -> String {
        format!("s{i}")
    }

    pub fn step(&self, state: usize, input: &str) -> Option<(&str, usize)> {
        self.transitions
            .get(&(state, input.to_string()))
            .map(|(o, t)| (o.as_str(), *t))
    }

    /// Text form: `mealy <states> <initial>` then sorted `trans` lines.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "mealy {} {}", self.num_states(), Self::state_name(self.initial));
        for ((s, i), (o, t)) in &self.transitions {
            let _ = writeln!(out, "trans {} {i} {o} {}", Self::state_name(*s), Self::state_name(*t));
        }
        out
    }
}

/// One machine state per player-1 position reached from init, found in
/// breadth-first order with inputs in action order. Each state other than
/// the initial one is the successor of a distinct reachable player-0
/// position, so there are at most `density + 1` states.
pub fn strategy_to_mealy(
    game: &SafetyGame,
    strat: &PositionalStrategy,
) -> Result<MealyMachine, MealyError> {
    if !game.is_alternating() {
        return Err(MealyError::NotAlternating);
    }
    if game.owner(game.init()) != Owner::One {
        return Err(MealyError::InitNotPlayer1);
    }
    let mut index = vec![None; game.num_positions()];
    let mut origin = Vec::new();
    let mut queue = VecDeque::new();
    index[game.init().index()] = Some(0);
    origin.push(game.position_name(game.init()).to_string());
    queue.push_back(game.init());
    let mut transitions = BTreeMap::new();
    while let Some(p) = queue.pop_front() {
        let s = index[p.index()].expect("queued states are indexed");
        for &(u, v) in game.edges(p) {
            let x = strat
                .choice(v)
                .ok_or_else(|| MealyError::UndefinedChoice(game.position_name(v).to_string()))?;
            let next = game.target(v, x).expect("choices are edges");
            let t = match index[next.index()] {
                Some(t) => t,
                None => {
                    let t = origin.len();
                    index[next.index()] = Some(t);
                    origin.push(game.position_name(next).to_string());
                    queue.push_back(next);
                    t
                }
            };
            transitions.insert(
                (s, game.action_name(u).to_string()),
                (game.action_name(x).to_string(), t),
            );
        }
    }
    Ok(MealyMachine { origin, initial: 0, transitions })
}

pub fn dfa_to_mealy(dfa: &Dfa) -> Result<MealyMachine, MealyError> {
    dfa_to_mealy_with(dfa, OutputPick::Smallest)
}

/// Contracts each input step `q −u→ q′` and the chosen output step
/// `q′ −x→ q″` into one transition `q −u/x→ q″`. Letters leading into
/// rejecting states are ignored.
pub fn dfa_to_mealy_with(dfa: &Dfa, pick: OutputPick) -> Result<MealyMachine, MealyError> {
    let name = |q: usize| dfa.states[q].clone();
    let accepting = |q: &usize| dfa.accepting.contains(q);
    let mut index: BTreeMap<usize, usize> = BTreeMap::new();
    let mut origin = Vec::new();
    let mut queue = VecDeque::new();
    let mut transitions = BTreeMap::new();
    if accepting(&dfa.initial) {
        index.insert(dfa.initial, 0);
        origin.push(name(dfa.initial));
        queue.push_back(dfa.initial);
    }
    while let Some(q) = queue.pop_front() {
        let s = index[&q];
        let inputs: Vec<(&str, usize)> = dfa.out(q, Owner::One).filter(|(_, t)| accepting(t)).collect();
        if inputs.is_empty() && dfa.out(q, Owner::Zero).next().is_some() {
            return Err(MealyError::NonAlternatingDfa(name(q)));
        }
        for (u, mid) in inputs {
            let outputs: Vec<(&str, usize)> =
                dfa.out(mid, Owner::Zero).filter(|(_, t)| accepting(t)).collect();
            let chosen = match pick {
                OutputPick::Smallest => outputs.first(),
                OutputPick::Largest => outputs.last(),
            };
            let Some(&(x, next)) = chosen else {
                if dfa.out(mid, Owner::One).next().is_some() {
                    return Err(MealyError::NonAlternatingDfa(name(mid)));
                }
                return Err(MealyError::DeadEnd(name(q), u.to_string()));
            };
            let t = *index.entry(next).or_insert_with(|| {
                origin.push(name(next));
                queue.push_back(next);
                origin.len() - 1
            });
            transitions.insert((s, u.to_string()), (x.to_string(), t));
        }
    }
    Ok(MealyMachine { origin, initial: 0, transitions })
}

fn syntax(line: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax { line, message: message.into() }
}

pub fn parse_dfa(text: &[u8]) -> Result<Dfa, ParseError> {
    let text = std::str::from_utf8(text).map_err(|_| ParseError::Encoding)?;
    let owner_of = |line: usize, s: &str| match s {
        "0" => Ok(Owner::Zero),
        "1" => Ok(Owner::One),
        other => Err(syntax(line, format!("owner must be 0 or 1, found `{other}`"))),
    };
    let mut states: BTreeMap<String, Owner> = BTreeMap::new();
    let mut declared: BTreeMap<String, Owner> = BTreeMap::new();
    let mut edges: Vec<(usize, String, String, String)> = Vec::new();
    let mut init: Option<(usize, String)> = None;
    let mut accepting: Vec<(usize, String)> = Vec::new();
    for rec in records(text) {
        let arity = |n: usize| {
            if rec.tokens.len() == n {
                Ok(())
            } else {
                Err(syntax(rec.line, format!("`{}` expects {} arguments", rec.tokens[0], n - 1)))
            }
        };
        match rec.tokens[0] {
            "pos" => {
                arity(3)?;
                let o = owner_of(rec.line, rec.tokens[2])?;
                if states.insert(rec.tokens[1].to_string(), o).is_some() {
                    return Err(syntax(rec.line, format!("state `{}` declared twice", rec.tokens[1])));
                }
            }
            "action" => {
                arity(3)?;
                let o = owner_of(rec.line, rec.tokens[2])?;
                if declared.insert(rec.tokens[1].to_string(), o).is_some() {
                    return Err(syntax(rec.line, format!("letter `{}` declared twice", rec.tokens[1])));
                }
            }
            "init" => {
                arity(2)?;
                if init.is_some() {
                    return Err(syntax(rec.line, "initial state declared twice"));
                }
                init = Some((rec.line, rec.tokens[1].to_string()));
            }
            "accepting" => {
                arity(2)?;
                accepting.push((rec.line, rec.tokens[1].to_string()));
            }
            "edge" => {
                arity(4)?;
                edges.push((
                    rec.line,
                    rec.tokens[1].to_string(),
                    rec.tokens[2].to_string(),
                    rec.tokens[3].to_string(),
                ));
            }
            other => return Err(syntax(rec.line, format!("unknown keyword `{other}`"))),
        }
    }

    let names: Vec<String> = states.keys().cloned().collect();
    let id = |line: usize, s: &str| {
        names
            .binary_search_by(|n| n.as_str().cmp(s))
            .map_err(|_| syntax(line, format!("undeclared state `{s}`")))
    };
    let mut actions = declared.clone();
    let mut transitions = BTreeMap::new();
    for (line, src, a, dst) in &edges {
        let (q, t) = (id(*line, src)?, id(*line, dst)?);
        if !declared.contains_key(a) {
            let o = states[src];
            if *actions.entry(a.clone()).or_insert(o) != o {
                return Err(syntax(*line, format!("letter `{a}` is read by states of both players")));
            }
        }
        if transitions.insert((q, a.clone()), t).is_some() {
            return Err(syntax(*line, format!("two transitions from `{src}` on `{a}`")));
        }
    }
    let (line, init) = init.ok_or(ParseError::Structure(crate::game::GameError::MissingInit))?;
    let initial = id(line, &init)?;
    let accepting: BTreeSet<usize> = if accepting.is_empty() {
        (0..names.len()).collect()
    } else {
        accepting
            .iter()
            .map(|(line, s)| id(*line, s))
            .collect::<Result<_, _>>()?
    };
    Ok(Dfa { states: names, initial, accepting, actions, transitions })
}
