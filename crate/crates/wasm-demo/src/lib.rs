//! WebAssembly bindings for the static page in `www/`.
//!
//! Each export takes game or automaton text and returns a JSON string. The
//! `*_json` functions hold the logic so they can be tested natively.

use serde_json::{json, Value};
use sparsegame::harness::{solve_report, Method, UnknownMethod};
use sparsegame::heuristics::{random_extract, smart_random_extract};
use sparsegame::lp::{replp_extract, LpError};
use sparsegame::mealy::{dfa_to_mealy_with, parse_dfa, strategy_to_mealy, OutputPick};
use sparsegame::sat::sat_exact_extract;
use sparsegame::{
    density, parse_game, serialize_strategy, solve as solve_game, validate_strategy, ParseError, RngSeed,
};
use thiserror::Error;
use wasm_bindgen::prelude::*;

#[derive(Debug, Error)]
pub enum DemoError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Method(#[from] UnknownMethod),
    #[error("the initial position is losing for player 0")]
    InitLosing,
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Mealy(#[from] sparsegame::mealy::MealyError),
}

pub fn solve_json(game_text: &str) -> Result<Value, DemoError> {
    let game = parse_game(game_text.as_bytes())?;
    let report = solve_report(&game);
    let winning: Vec<&str> = sparsegame::compute_winning_region(&game)
        .iter()
        .map(|v| game.position_name(v))
        .collect();
    let mut out = serde_json::to_value(&report).expect("serializable");
    out["winning_positions"] = json!(winning);
    Ok(out)
}

/// Runs one extraction without a deadline; the browser has no monotonic
/// clock available through `std`.
pub fn extract_json(game_text: &str, method: &str, seed: u64) -> Result<Value, DemoError> {
    let game = parse_game(game_text.as_bytes())?;
    let method: Method = method.parse()?;
    let mp = solve_game(&game).map_err(|_| DemoError::InitLosing)?;
    let seed = RngSeed(seed);
    let (strategy, certified) = match method {
        Method::Random => (random_extract(&game, &mp, seed), false),
        Method::Smart => (smart_random_extract(&game, &mp.winning, seed), false),
        Method::RepLp => (replp_extract(&game, &mp)?, false),
        Method::Ilp => {
            let r = sparsegame::ilp::ilp_exact_extract(&game, &mp);
            (r.strategy, r.certified)
        }
        Method::Sat => {
            let r = sat_exact_extract(&game, &mp);
            (r.strategy, r.certified)
        }
    };
    let mealy = if game.is_alternating() {
        strategy_to_mealy(&game, &strategy).ok().map(|m| m.to_text())
    } else {
        None
    };
    Ok(json!({
        "method": method.name(),
        "density": density(&game, &strategy),
        "certified": certified,
        "valid": validate_strategy(&game, &mp, &strategy).winning,
        "strategy": serialize_strategy(&game, &strategy),
        "mealy": mealy,
    }))
}

pub fn dfa_mealy_json(dfa_text: &str, largest: bool) -> Result<Value, DemoError> {
    let dfa = parse_dfa(dfa_text.as_bytes())?;
    let pick = if largest { OutputPick::Largest } else { OutputPick::Smallest };
    let m = dfa_to_mealy_with(&dfa, pick)?;
    Ok(json!({ "states": m.num_states(), "mealy": m.to_text() }))
}

fn to_js(r: Result<Value, DemoError>) -> Result<String, JsError> {
    r.map(|v| v.to_string()).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn solve(game_text: &str) -> Result<String, JsError> {
    to_js(solve_json(game_text))
}

#[wasm_bindgen]
pub fn extract(game_text: &str, method: &str, seed: u64) -> Result<String, JsError> {
    to_js(extract_json(game_text, method, seed))
}

#[wasm_bindgen(js_name = dfaToMealy)]
pub fn dfa_to_mealy(dfa_text: &str, largest: bool) -> Result<String, JsError> {
    to_js(dfa_mealy_json(dfa_text, largest))
}

#[cfg(test)]
mod tests {
    use super::*;
    use sparsegame::generators::gen_adversarial;
    use sparsegame::serialize_game;

    const TWO_STATE_DFA: &str = "pos q0 1\npos q1 0\npos q2 1\npos q3 0\ninit q0\n\
        edge q0 u q1\nedge q0 v q1\nedge q1 y q2\nedge q1 z q2\n\
        edge q2 u q3\nedge q3 x q0\nedge q2 v q1\n";

    #[test]
    fn solve_lists_winning_positions() {
        let v = solve_json("pos a 0\npos b 1\npos c 0\ninit a\nedge a x b\nedge a y c\nedge b u a\n").unwrap();
        assert_eq!(v["winning"], 2);
        assert_eq!(v["init_winning"], true);
        assert_eq!(v["winning_positions"], json!(["a", "b"]));
    }

    #[test]
    fn extraction_reports_density_and_mealy() {
        let text = String::from_utf8(serialize_game(&gen_adversarial(2))).unwrap();
        for m in ["random", "smart", "replp", "ilp", "sat"] {
            let v = extract_json(&text, m, 3).unwrap();
            assert_eq!(v["valid"], true, "{m}");
            assert!(v["density"].as_u64().unwrap() >= 4, "{m}");
        }
        assert_eq!(extract_json(&text, "sat", 0).unwrap()["density"], 4);
        let v = extract_json(TWO_STATE_DFA, "ilp", 0).unwrap();
        assert_eq!(v["certified"], true);
        assert!(v["mealy"].as_str().unwrap().starts_with("mealy 2 s0"));
    }

    #[test]
    fn errors_are_reported() {
        assert!(matches!(extract_json(TWO_STATE_DFA, "greedy", 0), Err(DemoError::Method(_))));
        assert!(matches!(extract_json("pos a 0\ninit a\n", "smart", 0), Err(DemoError::InitLosing)));
        assert!(matches!(solve_json("pos a 7\n"), Err(DemoError::Parse(_))));
    }

    #[test]
    fn two_state_automaton() {
        let v = dfa_mealy_json(TWO_STATE_DFA, true).unwrap();
        assert_eq!(v["states"], 2);
        assert_eq!(v["mealy"], "mealy 2 s0\ntrans s0 u z s1\ntrans s0 v z s1\ntrans s1 u x s0\ntrans s1 v z s1\n");
    }
}
