//! `sparsegame` command line.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sparsegame::generators::{gen_adversarial, gen_chain, gen_random, gen_random_alternating};
use sparsegame::harness::{
    bench_csv, bench_game, bench_json, extract, run_trials_keeping, solve_report, trials_csv, ExtractReport,
    HarnessError, Limits, Method, SolveReport, TrialStatus,
};
use sparsegame::lp::build_relaxation;
use sparsegame::mealy::{dfa_to_mealy_with, parse_dfa, strategy_to_mealy, MealyError, OutputPick};
use sparsegame::oracle::{brute_force_min_density, enumerate_local_optima, OracleError};
use sparsegame::sat::build_cnf;
use sparsegame::{parse_game, parse_strategy, serialize_game, serialize_strategy, solve, ParseError, RngSeed, SafetyGame};
use thiserror::Error;

#[derive(Debug, Error)]
enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: ParseError },
    #[error("init losing")]
    InitLosing,
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error(transparent)]
    Mealy(#[from] MealyError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::InitLosing | CliError::Harness(HarnessError::InitLosing) => 2,
            _ => 1,
        }
    }
}

#[derive(Parser)]
#[command(name = "sparsegame", version, about = "Solve safety games and extract sparse winning strategies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a game and print its size, winning region and search space.
    Solve {
        game: PathBuf,
        /// Write the report as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Extract positional strategies with one method over seeded trials.
    Extract(ExtractArgs),
    /// Run methods over every `*.game` file of a directory.
    Bench(BenchArgs),
    /// Write a generated game to stdout or `--out`.
    Gen {
        #[command(subcommand)]
        family: Family,
        #[arg(long, short, global = true)]
        out: Option<PathBuf>,
    },
    /// Mealy machine of a positional strategy on an alternating game.
    Mealy {
        game: PathBuf,
        /// Strategy file; without it one is extracted with `--method`.
        #[arg(long)]
        strategy: Option<PathBuf>,
        #[arg(long, default_value = "smart")]
        method: Method,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Mealy machine of a strategy automaton.
    DfaMealy {
        dfa: PathBuf,
        #[arg(long, value_enum, default_value_t = Pick::Smallest)]
        pick: Pick,
    },
    /// Exhaustive minimum density and local optima (small games only).
    #[command(hide = true)]
    Oracle { game: PathBuf },
}

#[derive(Args)]
struct TrialArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    runs: usize,
    /// Wall clock per trial.
    #[arg(long, default_value_t = 600)]
    timeout_secs: u64,
    /// Conflict budget per SAT call.
    #[arg(long, default_value_t = 10_000_000)]
    max_conflicts: u64,
    /// Node budget for branch and bound.
    #[arg(long, default_value_t = 1_000_000)]
    max_nodes: u64,
    /// Run trials on all cores.
    #[arg(long)]
    parallel: bool,
}

impl TrialArgs {
    fn limits(&self) -> Limits {
        Limits {
            timeout: Duration::from_secs(self.timeout_secs),
            max_conflicts: self.max_conflicts,
            max_nodes: self.max_nodes,
        }
    }
}

#[derive(Args)]
struct ExtractArgs {
    game: PathBuf,
    #[arg(long)]
    method: Method,
    #[command(flatten)]
    trials: TrialArgs,
    #[arg(long)]
    json: Option<PathBuf>,
    /// Per-trial records.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Boolean encoding without the cardinality bound, in DIMACS.
    #[arg(long)]
    dump_cnf: Option<PathBuf>,
    /// Linear relaxation in LP format.
    #[arg(long)]
    dump_lp: Option<PathBuf>,
    /// Strategy of the first trial.
    #[arg(long)]
    strategy: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    corpus: PathBuf,
    /// Comma separated.
    #[arg(long, value_delimiter = ',', default_value = "random,smart,replp,ilp,sat")]
    method: Vec<Method>,
    #[command(flatten)]
    trials: TrialArgs,
    #[arg(long)]
    json: Option<PathBuf>,
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Family {
    Chain { n: usize },
    Adversarial { i: usize },
    Random {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        n0: usize,
        #[arg(long)]
        n1: usize,
        /// Maximum out-degree.
        #[arg(long, short, default_value_t = 3)]
        k: usize,
        #[arg(long)]
        alternating: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Pick {
    Smallest,
    Largest,
}

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn load_game(path: &Path) -> Result<SafetyGame, CliError> {
    parse_game(&read(path)?).map_err(|source| CliError::Parse { path: path.to_path_buf(), source })
}

fn json_string(v: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

fn print_solve(r: &SolveReport) {
    println!("V0 {}", r.v0);
    println!("V1 {}", r.v1);
    println!("Sigma0 {}", r.sigma0);
    println!("Sigma1 {}", r.sigma1);
    println!("W {}", r.winning);
    match r.search_space_bits {
        Some(bits) => {
            println!("init winning");
            println!("bits {bits:.3}");
        }
        None => println!("init losing"),
    }
}

fn print_extract(r: &ExtractReport) {
    println!("method {}", r.method);
    for t in &r.trials {
        let density = match (t.status, t.density) {
            (TrialStatus::Ok, Some(d)) => d.to_string(),
            _ => "t/o".to_string(),
        };
        let cert = if t.certified { " certified" } else { "" };
        println!("trial seed {} density {density} time {:.6}{cert}", t.seed, t.seconds);
    }
    match (r.density_mean, r.density_std) {
        (Some(m), Some(s)) => println!("density mean {m:.3} std {s:.3}"),
        _ => println!("density t/o"),
    }
    println!("time mean {:.6} std {:.6}", r.time_mean, r.time_std);
}

fn cmd_extract(a: &ExtractArgs) -> Result<ExitCode, CliError> {
    let game = load_game(&a.game)?;
    let mp = solve(&game).map_err(|_| CliError::InitLosing)?;
    if let Some(p) = &a.dump_cnf {
        write(p, build_cnf(&game, &mp).0.to_dimacs())?;
    }
    if let Some(p) = &a.dump_lp {
        write(p, build_relaxation(&game, &mp).to_lp_format(&game))?;
    }
    let t = &a.trials;
    let (report, strategies) = run_trials_keeping(&game, &mp, a.method, t.seed, t.runs, &t.limits(), t.parallel)?;
    print_extract(&report);
    if let Some(p) = &a.json {
        write(p, json_string(&report))?;
    }
    if let Some(p) = &a.csv {
        write(p, trials_csv(&report))?;
    }
    if let Some(p) = &a.strategy {
        match strategies.first() {
            Some(Some(s)) => write(p, serialize_strategy(&game, s))?,
            _ => return Err(CliError::Usage("no strategy to write".into())),
        }
    }
    Ok(if report.trials.iter().any(|t| t.status == TrialStatus::Timeout) {
        ExitCode::from(3)
    } else {
        ExitCode::SUCCESS
    })
}

fn cmd_bench(a: &BenchArgs) -> Result<(), CliError> {
    let entries = fs::read_dir(&a.corpus).map_err(|source| CliError::Io { path: a.corpus.clone(), source })?;
    let mut files = Vec::new();
    for e in entries {
        let path = e.map_err(|source| CliError::Io { path: a.corpus.clone(), source })?.path();
        if path.extension().is_some_and(|x| x == "game") {
            files.push(path);
        }
    }
    files.sort();
    let t = &a.trials;
    let mut rows = Vec::new();
    for path in &files {
        let game = load_game(path)?;
        let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        eprintln!("{name}");
        rows.push(bench_game(&name, &game, &a.method, t.seed, t.runs, &t.limits(), t.parallel)?);
    }
    let csv = bench_csv(&rows, &a.method);
    if let Some(p) = &a.json {
        write(p, json_string(&bench_json(&rows, &a.method)))?;
    }
    match &a.csv {
        Some(p) => write(p, &csv)?,
        None if a.json.is_none() => print!("{csv}"),
        None => {}
    }
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Solve { game, json } => {
            let r = solve_report(&load_game(&game)?);
            print_solve(&r);
            if let Some(p) = json {
                write(&p, json_string(&r))?;
            }
            if !r.init_winning {
                return Ok(ExitCode::from(2));
            }
        }
        Command::Extract(a) => return cmd_extract(&a),
        Command::Bench(a) => cmd_bench(&a)?,
        Command::Gen { family, out } => {
            let g = match family {
                Family::Chain { n } => gen_chain(n),
                Family::Adversarial { i } => gen_adversarial(i),
                Family::Random { seed, n0, n1, k, alternating: false } => gen_random(RngSeed(seed), n0, n1, k),
                Family::Random { seed, n0, n1, k, alternating: true } => {
                    gen_random_alternating(RngSeed(seed), n0, n1, k)
                }
            };
            let text = serialize_game(&g);
            match out {
                Some(p) => write(&p, text)?,
                None => print!("{}", String::from_utf8_lossy(&text)),
            }
        }
        Command::Mealy { game, strategy, method, seed } => {
            let g = load_game(&game)?;
            let mp = solve(&g).map_err(|_| CliError::InitLosing)?;
            let s = match strategy {
                Some(p) => {
                    let text = String::from_utf8(read(&p)?)
                        .map_err(|_| CliError::Parse { path: p.clone(), source: ParseError::Encoding })?;
                    parse_strategy(&g, &text).map_err(|source| CliError::Parse { path: p, source })?
                }
                None => match extract(&g, &mp, method, RngSeed(seed), &Limits::default())? {
                    (Some(s), _) => s,
                    (None, _) => return Ok(ExitCode::from(3)),
                },
            };
            print!("{}", strategy_to_mealy(&g, &s)?.to_text());
        }
        Command::DfaMealy { dfa, pick } => {
            let d = parse_dfa(&read(&dfa)?).map_err(|source| CliError::Parse { path: dfa, source })?;
            let pick = match pick {
                Pick::Smallest => OutputPick::Smallest,
                Pick::Largest => OutputPick::Largest,
            };
            print!("{}", dfa_to_mealy_with(&d, pick)?.to_text());
        }
        Command::Oracle { game } => {
            let g = load_game(&game)?;
            let mp = solve(&g).map_err(|_| CliError::InitLosing)?;
            let (d, s) = brute_force_min_density(&g, &mp)?;
            println!("min-density {d}");
            print!("{}", serialize_strategy(&g, &s));
            let optima: Vec<String> = enumerate_local_optima(&g)?.iter().map(usize::to_string).collect();
            println!("local-optima {}", optima.join(","));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
