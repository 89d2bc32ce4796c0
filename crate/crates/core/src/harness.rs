//! Seeded trials, summary statistics and benchmark tables.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::game::{MostPermissiveStrategy, Owner, PositionalStrategy, SafetyGame};
use crate::heuristics::{random_extract, smart_extract_with_order, smart_order};
use crate::ilp::{ilp_exact_extract_with, IlpLimits, IlpStop};
use crate::lp::{replp_extract_traced, LpError};
use crate::oracle::brute_force_min_density;
use crate::rng::RngSeed;
use crate::sat::{sat_exact_extract_with, SatError, SolverLimits};
use crate::solve::{density, permissive_reachable, solve, validate_strategy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Random,
    Smart,
    RepLp,
    Ilp,
    Sat,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::Random, Method::Smart, Method::RepLp, Method::Ilp, Method::Sat];

    pub fn name(self) -> &'static str {
        match self {
            Method::Random => "random",
            Method::Smart => "smart",
            Method::RepLp => "replp",
            Method::Ilp => "ilp",
            Method::Sat => "sat",
        }
    }

    /// Exact methods ignore the seed.
    pub fn is_randomized(self) -> bool {
        matches!(self, Method::Random | Method::Smart)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown method `{0}` (expected random, smart, replp, ilp or sat)")]
pub struct UnknownMethod(pub String);

impl FromStr for Method {
    type Err = UnknownMethod;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| UnknownMethod(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Wall clock per trial.
    pub timeout: Duration,
    pub max_conflicts: u64,
    pub max_nodes: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Self { timeout: Duration::from_secs(600), max_conflicts: 10_000_000, max_nodes: 1_000_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TrialStatus {
    /// A validated strategy; `certified` tells whether an exact method proved
    /// minimality.
    Ok,
    /// The wall clock or an internal budget ran out before minimality was
    /// proved.
    Timeout,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trial {
    pub seed: u64,
    pub status: TrialStatus,
    pub density: Option<usize>,
    pub seconds: f64,
    pub certified: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HarnessError {
    #[error("initial position is losing")]
    InitLosing,
    #[error("{method} produced a strategy that fails validation (seed {seed})")]
    InvalidStrategy { method: Method, seed: u64 },
}

/// One extraction with the given method. The strategy is validated before it
/// is returned.
pub fn extract(
    game: &SafetyGame,
    mp: &MostPermissiveStrategy,
    method: Method,
    seed: RngSeed,
    limits: &Limits,
) -> Result<(Option<PositionalStrategy>, Trial), HarnessError> {
    let start = Instant::now();
    let deadline = Some(start + limits.timeout);
    let (strategy, certified) = match method {
        Method::Random => (Some(random_extract(game, mp, seed)), false),
        Method::Smart => {
            let order = smart_order(game, &mp.winning, seed);
            (smart_extract_with_order(game, &order, deadline).ok(), false)
        }
        Method::RepLp => match replp_extract_traced(game, mp, deadline) {
            Ok((s, _)) => (Some(s), false),
            Err(LpError::Deadline) => (None, false),
            Err(e) => panic!("relaxation rounding failed: {e}"),
        },
        Method::Ilp => {
            let r = ilp_exact_extract_with(
                game,
                mp,
                &IlpLimits { max_nodes: limits.max_nodes, deadline },
            );
            match r.interrupted {
                Some(IlpStop::Deadline) => (None, false),
                _ => (Some(r.strategy), r.certified),
            }
        }
        Method::Sat => {
            let r = sat_exact_extract_with(
                game,
                mp,
                &SolverLimits { max_conflicts: limits.max_conflicts, deadline },
            );
            match r.interrupted {
                Some(SatError::Deadline) => (None, false),
                _ => (Some(r.strategy), r.certified),
            }
        }
    };
    let seconds = start.elapsed().as_secs_f64();
    let timed_out = strategy.is_none() || (!method.is_randomized() && method != Method::RepLp && !certified);
    if let Some(s) = &strategy {
        if !validate_strategy(game, mp, s).winning {
            return Err(HarnessError::InvalidStrategy { method, seed: seed.0 });
        }
    }
    let trial = Trial {
        seed: seed.0,
        status: if timed_out { TrialStatus::Timeout } else { TrialStatus::Ok },
        density: strategy.as_ref().filter(|_| !timed_out).map(|s| density(game, s)),
        seconds,
        certified,
    };
    Ok((strategy, trial))
}

/// Mean and sample standard deviation (divisor `n − 1`, 0 for a single value).
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtractReport {
    pub method: Method,
    pub trials: Vec<Trial>,
    /// `None` when any trial timed out.
    pub density_mean: Option<f64>,
    pub density_std: Option<f64>,
    pub time_mean: f64,
    pub time_std: f64,
}

impl ExtractReport {
    pub fn timed_out(&self) -> bool {
        self.trials.iter().any(|t| t.status == TrialStatus::Timeout)
    }
}

/// Runs `runs` trials with seeds `seed, seed + 1, …`.
pub fn run_trials(
    game: &SafetyGame,
    mp: &MostPermissiveStrategy,
    method: Method,
    seed: u64,
    runs: usize,
    limits: &Limits,
    parallel: bool,
) -> Result<ExtractReport, HarnessError> {
    run_trials_keeping(game, mp, method, seed, runs, limits, parallel).map(|(r, _)| r)
}

/// Like [`run_trials`], also returning each trial's strategy.
pub fn run_trials_keeping(
    game: &SafetyGame,
    mp: &MostPermissiveStrategy,
    method: Method,
    seed: u64,
    runs: usize,
    limits: &Limits,
    parallel: bool,
) -> Result<(ExtractReport, Vec<Option<PositionalStrategy>>), HarnessError> {
    let one = |k: usize| extract(game, mp, method, RngSeed(seed.wrapping_add(k as u64)), limits);
    let results: Vec<(Option<PositionalStrategy>, Trial)> = if parallel {
        (0..runs).into_par_iter().map(one).collect::<Result<_, _>>()?
    } else {
        (0..runs).map(one).collect::<Result<_, _>>()?
    };
    let (strategies, trials): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    Ok((summarize(method, trials), strategies))
}

/// Per-trial records as CSV: `seed,status,density,seconds,certified`.
pub fn trials_csv(report: &ExtractReport) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["seed", "status", "density", "seconds", "certified"]).expect("in-memory write");
    for t in &report.trials {
        let status = match t.status {
            TrialStatus::Ok => "ok",
            TrialStatus::Timeout => "t/o",
        };
        let density = t.density.map_or(String::new(), |d| d.to_string());
        w.write_record([
            t.seed.to_string(),
            status.to_string(),
            density,
            t.seconds.to_string(),
            t.certified.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}

pub fn summarize(method: Method, trials: Vec<Trial>) -> ExtractReport {
    let times: Vec<f64> = trials.iter().map(|t| t.seconds).collect();
    let (time_mean, time_std) = mean_std(&times);
    let all_ok = trials.iter().all(|t| t.status == TrialStatus::Ok);
    let (density_mean, density_std) = if all_ok {
        let ds: Vec<f64> = trials.iter().map(|t| t.density.expect("ok trial") as f64).collect();
        let (m, s) = mean_std(&ds);
        (Some(m), Some(s))
    } else {
        (None, None)
    };
    ExtractReport { method, trials, density_mean, density_std, time_mean, time_std }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub v0: usize,
    pub v1: usize,
    pub sigma0: usize,
    pub sigma1: usize,
    pub winning: usize,
    pub init_winning: bool,
    /// Over the positions reachable under the most permissive strategy.
    pub search_space_bits: Option<f64>,
}

pub fn solve_report(game: &SafetyGame) -> SolveReport {
    let mp = solve(game).ok();
    let winning = crate::solve::compute_winning_region(game).len();
    SolveReport {
        v0: game.count_positions(Owner::Zero),
        v1: game.count_positions(Owner::One),
        sigma0: game.count_actions(Owner::Zero),
        sigma1: game.count_actions(Owner::One),
        winning,
        init_winning: mp.is_some(),
        search_space_bits: mp.as_ref().map(|mp| pruned_bits(game, mp)),
    }
}

/// Search space of the most permissive strategy on the pruned game.
pub fn pruned_bits(game: &SafetyGame, mp: &MostPermissiveStrategy) -> f64 {
    let reach = permissive_reachable(game, mp);
    mp.domain()
        .filter(|&v| reach.contains(v))
        .map(|v| (mp.allowed(v).len() as f64).log2())
        .sum()
}

/// Games at or below this many bits get an oracle column in tables.
pub const BENCH_ORACLE_BITS: f64 = 16.0;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub benchmark: String,
    pub solve: SolveReport,
    pub oracle: Option<usize>,
    pub reports: Vec<ExtractReport>,
}

pub fn bench_game(
    name: &str,
    game: &SafetyGame,
    methods: &[Method],
    seed: u64,
    runs: usize,
    limits: &Limits,
    parallel: bool,
) -> Result<BenchRow, HarnessError> {
    let solve = solve_report(game);
    let Ok(mp) = crate::solve::solve(game) else {
        return Ok(BenchRow { benchmark: name.to_string(), solve, oracle: None, reports: Vec::new() });
    };
    let oracle = solve
        .search_space_bits
        .filter(|&b| b <= BENCH_ORACLE_BITS)
        .and_then(|_| brute_force_min_density(game, &mp).ok())
        .map(|(d, _)| d);
    let reports = methods
        .iter()
        .map(|&m| run_trials(game, &mp, m, seed, runs, limits, parallel))
        .collect::<Result<_, _>>()?;
    Ok(BenchRow { benchmark: name.to_string(), solve, oracle, reports })
}

pub fn bench_header(methods: &[Method]) -> Vec<String> {
    let mut h: Vec<String> = ["benchmark", "V0", "V1", "Sigma0", "Sigma1", "bits", "oracle"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    for m in methods {
        for col in ["density", "time", "density_std", "time_std"] {
            h.push(format!("{m}_{col}"));
        }
    }
    h
}

/// Row cells as JSON values; strings are used for `t/o` and empty cells.
pub fn bench_cells(row: &BenchRow, methods: &[Method]) -> Vec<Value> {
    let opt = |x: Option<f64>| x.map_or(Value::String(String::new()), |v| json!(v));
    let mut cells = vec![
        json!(row.benchmark),
        json!(row.solve.v0),
        json!(row.solve.v1),
        json!(row.solve.sigma0),
        json!(row.solve.sigma1),
        opt(row.solve.search_space_bits),
        row.oracle.map_or(Value::String(String::new()), |d| json!(d)),
    ];
    for m in methods {
        match row.reports.iter().find(|r| r.method == *m) {
            None => cells.extend(std::iter::repeat_n(Value::String(String::new()), 4)),
            Some(r) if r.timed_out() => {
                cells.extend(std::iter::repeat_n(Value::String("t/o".into()), 4))
            }
            Some(r) => cells.extend([
                opt(r.density_mean),
                json!(r.time_mean),
                opt(r.density_std),
                json!(r.time_std),
            ]),
        }
    }
    cells
}

pub fn bench_json(rows: &[BenchRow], methods: &[Method]) -> Value {
    let header = bench_header(methods);
    Value::Array(
        rows.iter()
            .map(|r| {
                let obj: Map<String, Value> = header.iter().cloned().zip(bench_cells(r, methods)).collect();
                Value::Object(obj)
            })
            .collect(),
    )
}

pub fn bench_csv(rows: &[BenchRow], methods: &[Method]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(bench_header(methods)).expect("in-memory write");
    for r in rows {
        let cells: Vec<String> = bench_cells(r, methods)
            .into_iter()
            .map(|v| match v {
                Value::String(s) => s,
                other => other.to_string(),
            })
            .collect();
        w.write_record(cells).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}
