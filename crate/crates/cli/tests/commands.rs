use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use sparsegame::generators::{gen_adversarial, gen_chain};
use sparsegame::oracle::enumerate_local_optima;
use sparsegame::serialize_game;
use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sparsegame")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited")
}

fn write_game(dir: &Path, name: &str, text: &[u8]) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn densities(out: &str) -> Vec<usize> {
    out.lines()
        .filter(|l| l.starts_with("trial "))
        .map(|l| l.split_whitespace().nth(4).unwrap().parse().unwrap())
        .collect()
}

#[test]
fn solve_prints_the_report() {
    let dir = TempDir::new().unwrap();
    let g = write_game(dir.path(), "m.game", b"pos a 0\npos b 1\ninit a\nedge a x b\nedge a y b\nedge b u a\n");
    let o = run(&["solve", &g]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "V0 1\nV1 1\nSigma0 2\nSigma1 1\nW 2\ninit winning\nbits 1.000\n");
    assert_eq!(run(&["solve", &g]).stdout, o.stdout);
}

#[test]
fn losing_game_exits_with_two() {
    let dir = TempDir::new().unwrap();
    let g = write_game(dir.path(), "l.game", b"pos a 0\npos b 0\ninit a\nedge a x b\n");
    let o = run(&["solve", &g]);
    assert_eq!(code(&o), 2);
    assert!(stdout(&o).contains("init losing"));
    let o = run(&["extract", &g, "--method", "smart"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("init losing"));
}

#[test]
fn usage_and_io_errors_exit_with_one() {
    assert_eq!(code(&run(&["extract", "nowhere.game", "--method", "bogus"])), 1);
    assert_eq!(code(&run(&["solve", "/nonexistent/x.game"])), 1);
    let dir = TempDir::new().unwrap();
    let g = write_game(dir.path(), "bad.game", b"pos a 2\n");
    let o = run(&["solve", &g]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 1"));
}

#[test]
fn smart_trials_land_on_local_optima() {
    let dir = TempDir::new().unwrap();
    let game = gen_adversarial(3);
    let g = write_game(dir.path(), "a3.game", &serialize_game(&game));
    let o = run(&["extract", &g, "--method", "smart", "--runs", "25", "--seed", "7"]);
    assert_eq!(code(&o), 0);
    let ds = densities(&stdout(&o));
    assert_eq!(ds.len(), 25);
    let optima = enumerate_local_optima(&game).unwrap();
    assert!(ds.iter().all(|d| optima.contains(d)), "{ds:?} vs {optima:?}");
}

#[test]
fn exact_methods_agree_with_zero_spread() {
    let dir = TempDir::new().unwrap();
    let g = write_game(dir.path(), "a3.game", &serialize_game(&gen_adversarial(3)));
    let mut seen = BTreeSet::new();
    for m in ["ilp", "sat"] {
        let o = run(&["extract", &g, "--method", m, "--runs", "3"]);
        assert_eq!(code(&o), 0);
        let out = stdout(&o);
        assert!(out.contains("std 0.000\n"), "{out}");
        seen.extend(densities(&out));
    }
    assert_eq!(seen, BTreeSet::from([6]));
}

#[test]
fn fixed_seed_reproduces_files_byte_for_byte() {
    let dir = TempDir::new().unwrap();
    let g = write_game(dir.path(), "a4.game", &serialize_game(&gen_adversarial(4)));
    let files = |tag: &str| {
        let s = dir.path().join(format!("s{tag}.txt"));
        let c = dir.path().join(format!("t{tag}.csv"));
        let o = run(&[
            "extract", &g, "--method", "random", "--runs", "4", "--seed", "11",
            "--strategy", s.to_str().unwrap(), "--csv", c.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0);
        let densities: Vec<String> =
            fs::read_to_string(&c).unwrap().lines().map(|l| l.split(',').take(3).collect::<Vec<_>>().join(",")).collect();
        (fs::read(&s).unwrap(), densities)
    };
    assert_eq!(files("a"), files("b"));
}

#[test]
fn exhausted_budget_exits_with_three() {
    let dir = TempDir::new().unwrap();
    let g = write_game(dir.path(), "a3.game", &serialize_game(&gen_adversarial(3)));
    for m in ["ilp", "sat"] {
        let o = run(&["extract", &g, "--method", m, "--timeout-secs", "0"]);
        assert_eq!(code(&o), 3);
        assert!(stdout(&o).contains("density t/o"));
    }
}

#[test]
fn dumps_are_written() {
    let dir = TempDir::new().unwrap();
    let g = write_game(dir.path(), "c.game", &serialize_game(&gen_chain(3)));
    let cnf = dir.path().join("c.cnf");
    let lp = dir.path().join("c.lp");
    let o = run(&[
        "extract", &g, "--method", "replp",
        "--dump-cnf", cnf.to_str().unwrap(), "--dump-lp", lp.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let cnf = fs::read_to_string(cnf).unwrap();
    assert!(cnf.starts_with("p cnf "));
    assert!(cnf.lines().skip(1).all(|l| l.ends_with(" 0") || l == "0"));
    assert!(fs::read_to_string(lp).unwrap().contains("Minimize"));
}

#[test]
fn empty_corpus_gives_a_header_only_table() {
    let dir = TempDir::new().unwrap();
    let o = run(&["bench", dir.path().to_str().unwrap(), "--method", "smart,sat"]);
    assert_eq!(code(&o), 0);
    assert_eq!(
        stdout(&o),
        "benchmark,V0,V1,Sigma0,Sigma1,bits,oracle,smart_density,smart_time,smart_density_std,smart_time_std,\
         sat_density,sat_time,sat_density_std,sat_time_std\n"
    );
}

#[test]
fn bench_tables_agree_and_match_the_oracle() {
    let dir = TempDir::new().unwrap();
    let corpus = dir.path().join("corpus");
    fs::create_dir(&corpus).unwrap();
    for n in 1..=3 {
        write_game(&corpus, &format!("chain{n}.game"), &serialize_game(&gen_chain(n)));
        write_game(&corpus, &format!("adv{n}.game"), &serialize_game(&gen_adversarial(n)));
    }
    write_game(&corpus, "notes.txt", b"ignored");
    let csv = dir.path().join("t.csv");
    let json = dir.path().join("t.json");
    let o = run(&[
        "bench", corpus.to_str().unwrap(), "--method", "smart,ilp,sat", "--runs", "2",
        "--csv", csv.to_str().unwrap(), "--json", json.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let csv = fs::read_to_string(csv).unwrap();
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(json).unwrap()).unwrap();
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let rows = json.as_array().unwrap();
    let names: Vec<&str> = rows.iter().map(|r| r["benchmark"].as_str().unwrap()).collect();
    assert_eq!(names, ["adv1", "adv2", "adv3", "chain1", "chain2", "chain3"]);
    for (line, row) in lines.zip(rows) {
        let obj = row.as_object().unwrap();
        assert_eq!(obj.keys().map(String::as_str).collect::<Vec<_>>(), header);
        for (cell, key) in line.split(',').zip(&header) {
            let v = &row[*key];
            match v {
                serde_json::Value::String(s) => assert_eq!(cell, s),
                other => assert_eq!(cell.parse::<f64>().unwrap(), other.as_f64().unwrap(), "{key}"),
            }
        }
        let oracle = row["oracle"].as_f64().unwrap();
        assert_eq!(row["ilp_density"].as_f64().unwrap(), oracle);
        assert_eq!(row["sat_density"].as_f64().unwrap(), oracle);
        assert!(row["smart_density"].as_f64().unwrap() >= oracle);
    }
}

#[test]
fn generators_round_trip_through_the_cli() {
    let o = run(&["gen", "chain", "4"]);
    assert_eq!(code(&o), 0);
    assert_eq!(o.stdout, serialize_game(&gen_chain(4)));
    let a = run(&["gen", "random", "--seed", "5", "--n0", "6", "--n1", "6", "--alternating"]);
    let b = run(&["gen", "random", "--seed", "5", "--n0", "6", "--n1", "6", "--alternating"]);
    assert_eq!(a.stdout, b.stdout);
    assert!(!a.stdout.is_empty());
}

const TWO_STATE_DFA: &[u8] = b"pos q0 1\npos q1 0\npos q2 1\npos q3 0\ninit q0\n\
    edge q0 u q1\nedge q0 v q1\nedge q1 y q2\nedge q1 z q2\n\
    edge q2 u q3\nedge q3 x q0\nedge q2 v q1\n";

#[test]
fn dfa_contraction_from_the_command_line() {
    let dir = TempDir::new().unwrap();
    let d = write_game(dir.path(), "two.dfa", TWO_STATE_DFA);
    let o = run(&["dfa-mealy", &d, "--pick", "largest"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "mealy 2 s0\ntrans s0 u z s1\ntrans s0 v z s1\ntrans s1 u x s0\ntrans s1 v z s1\n");
    let o = run(&["dfa-mealy", &d]);
    assert!(stdout(&o).contains("trans s0 u y s1"));
}

#[test]
fn mealy_from_a_strategy_file() {
    let dir = TempDir::new().unwrap();
    let g = write_game(dir.path(), "two.game", TWO_STATE_DFA);
    let s = write_game(dir.path(), "two.strat", b"choice q1 z\nchoice q3 x\n");
    let o = run(&["mealy", &g, "--strategy", &s]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "mealy 2 s0\ntrans s0 u z s1\ntrans s0 v z s1\ntrans s1 u x s0\ntrans s1 v z s1\n");
    let o = run(&["mealy", &g, "--method", "sat"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("mealy 2 s0\n"));
}
