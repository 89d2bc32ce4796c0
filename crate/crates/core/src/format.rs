//! Line-oriented text formats for games and strategies.
//!
//! ```text
//! # comment
//! pos <id> <owner>
//! init <id>
//! edge <src> <action> <dst>
//! ```
//!
//! Strategies are written as `choice <pos> <action>` lines sorted by position.

use std::fmt::Write as _;

use thiserror::Error;

use crate::game::{GameBuilder, GameError, Owner, PositionalStrategy, SafetyGame};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: {source}")]
    Game {
        line: usize,
        #[source]
        source: GameError,
    },
    #[error(transparent)]
    Structure(#[from] GameError),
    #[error("input is not valid UTF-8")]
    Encoding,
}

impl ParseError {
    pub fn line(&self) -> Option<usize> {
        match self {
            ParseError::Syntax { line, .. } | ParseError::Game { line, .. } => Some(*line),
            _ => None,
        }
    }
}

/// One non-blank, non-comment line split into whitespace tokens.
pub(crate) struct Record<'a> {
    pub line: usize,
    pub tokens: Vec<&'a str>,
}

pub(crate) fn records(text: &str) -> impl Iterator<Item = Record<'_>> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let content = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        };
        let tokens: Vec<&str> = content.split_whitespace().collect();
        (!tokens.is_empty()).then_some(Record { line: i + 1, tokens })
    })
}

fn syntax(line: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax { line, message: message.into() }
}

/// Applies one game record to a builder. Returns `Ok(false)` for an unknown
/// keyword so callers with extended grammars can handle it.
pub(crate) fn apply_game_record(b: &mut GameBuilder, rec: &Record<'_>) -> Result<bool, ParseError> {
    let wrap = |source| ParseError::Game { line: rec.line, source };
    let arity = |n: usize| {
        if rec.tokens.len() != n {
            Err(syntax(
                rec.line,
                format!("`{}` expects {} arguments, found {}", rec.tokens[0], n - 1, rec.tokens.len() - 1),
            ))
        } else {
            Ok(())
        }
    };
    match rec.tokens[0] {
        "pos" => {
            arity(3)?;
            let owner = match rec.tokens[2] {
                "0" => Owner::Zero,
                "1" => Owner::One,
                other => return Err(syntax(rec.line, format!("owner must be 0 or 1, found `{other}`"))),
            };
            b.add_position(rec.tokens[1], owner).map_err(wrap)?;
        }
        "init" => {
            arity(2)?;
            b.set_init(rec.tokens[1]).map_err(wrap)?;
        }
        "edge" => {
            arity(4)?;
            b.add_edge(rec.tokens[1], rec.tokens[2], rec.tokens[3]).map_err(wrap)?;
        }
        _ => return Ok(false),
    }
    Ok(true)
}

pub fn parse_game(text: &[u8]) -> Result<SafetyGame, ParseError> {
    let text = std::str::from_utf8(text).map_err(|_| ParseError::Encoding)?;
    let mut b = GameBuilder::new();
    for rec in records(text) {
        if !apply_game_record(&mut b, &rec)? {
            return Err(syntax(rec.line, format!("unknown keyword `{}`", rec.tokens[0])));
        }
    }
    Ok(b.build()?)
}

pub fn serialize_game(game: &SafetyGame) -> Vec<u8> {
    let mut out = String::new();
    for v in game.positions() {
        let _ = writeln!(out, "pos {} {}", game.position_name(v), game.owner(v));
    }
    let _ = writeln!(out, "init {}", game.position_name(game.init()));
    let mut lines: Vec<String> = game
        .positions()
        .flat_map(|v| {
            game.edges(v).iter().map(move |&(a, t)| {
                format!(
                    "edge {} {} {}",
                    game.position_name(v),
                    game.action_name(a),
                    game.position_name(t)
                )
            })
        })
        .collect();
    lines.sort();
    for l in lines {
        out.push_str(&l);
        out.push('\n');
    }
    out.into_bytes()
}

pub fn serialize_strategy(game: &SafetyGame, strat: &PositionalStrategy) -> String {
    let mut out = String::new();
    for (v, a) in strat.domain() {
        let _ = writeln!(out, "choice {} {}", game.position_name(v), game.action_name(a));
    }
    out
}

pub fn parse_strategy(game: &SafetyGame, text: &str) -> Result<PositionalStrategy, ParseError> {
    let mut strat = PositionalStrategy::empty(game);
    for rec in records(text) {
        if rec.tokens[0] != "choice" || rec.tokens.len() != 3 {
            return Err(syntax(rec.line, "expected `choice <pos> <action>`"));
        }
        let v = game
            .position_by_name(rec.tokens[1])
            .ok_or_else(|| syntax(rec.line, format!("unknown position `{}`", rec.tokens[1])))?;
        let a = game
            .action_by_name(rec.tokens[2])
            .ok_or_else(|| syntax(rec.line, format!("unknown action `{}`", rec.tokens[2])))?;
        if game.owner(v) != Owner::Zero || game.target(v, a).is_none() {
            return Err(syntax(rec.line, "choice is not an edge of a player-0 position"));
        }
        if strat.choice(v).is_some() {
            return Err(syntax(rec.line, "position chosen twice"));
        }
        strat.set(v, a);
    }
    Ok(strat)
}
