use std::process::{Command, Output};

use modenergy::{energy_naive, EnergyQuery};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_modenergy")).args(args).output().expect("spawn modenergy")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn naive(m: u64, n: u64) -> u128 {
    energy_naive(EnergyQuery::new(m, n).unwrap())
}

#[test]
fn eval_prints_the_value() {
    let out = run(&["eval", "--m", "5", "--n", "12"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "2\n");
    for algo in ["naive", "grouped", "block", "divisor-batch", "diagonal"] {
        let out = run(&["eval", "--m", "7", "--n", "7", "--algo", algo]);
        assert_eq!(stdout(&out).trim(), naive(7, 7).to_string(), "{algo}");
    }
}

#[test]
fn eval_formats_round_trip() {
    let out = run(&["--format", "csv", "eval", "--m", "6", "--n", "7", "--algo", "grouped"]);
    let mut rdr = csv::Reader::from_reader(out.stdout.as_slice());
    assert_eq!(rdr.headers().unwrap(), vec!["m", "n", "value", "algo", "elapsed_ns"]);
    let row = rdr.records().next().unwrap().unwrap();
    assert_eq!((&row[0], &row[1], &row[2]), ("6", "7", "8"));
    assert_eq!(&row[3], "grouped");

    let out = run(&["--format", "json", "eval", "--m", "1000000000", "--n", "1000000000"]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["value"], "177532965887639372");
    assert_eq!(v["algo"], "grouped");
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["eval", "--m", "0", "--n", "3"]).status.code(), Some(2));
    assert_eq!(run(&["eval", "--m", "3", "--n", "9223372036854775808"]).status.code(), Some(2));
    assert_eq!(run(&["eval", "--m", "3", "--n", "3", "--algo", "magic"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "--suites", "nope"]).status.code(), Some(2));
    assert_eq!(run(&["range", "--m", "3", "--n-start", "9", "--n-end", "2"]).status.code(), Some(2));
    let big = run(&["--sieve-bound", "1000", "eval", "--m", "5000", "--n", "5000", "--algo", "diagonal"]);
    assert_eq!(big.status.code(), Some(3));
    assert_eq!(run(&["--sieve-bound", "1000000000", "prime", "--n", "7"]).status.code(), Some(3));
    assert_eq!(run(&["verify", "--suites", "bounds,symmetry", "--max-m", "8", "--max-n", "8"]).status.code(), Some(0));
}

#[test]
fn range_matches_naive_at_seeded_points() {
    let out = run(&["--format", "csv", "range", "--m", "37", "--n-start", "500", "--n-end", "60000"]);
    assert_eq!(out.status.code(), Some(0));
    let rows: Vec<(u64, u64, String)> =
        csv::Reader::from_reader(out.stdout.as_slice()).deserialize().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 59_501);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let (m, n, value) = &rows[rng.random_range(0..rows.len())];
        assert_eq!(*m, 37);
        assert_eq!(value, &naive(37, *n).to_string(), "n = {n}");
    }
}

#[test]
fn verify_json_is_reproducible() {
    let args = ["--format", "json", "--seed", "9", "verify", "--max-m", "16", "--max-n", "16", "--max-t", "5"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["seed"], 9);
    assert_eq!(v["totals"].as_object().unwrap().len(), 12);
    assert!(v["totals"].as_object().unwrap().values().all(|t| t["failed"] == 0));
}

#[test]
fn prime_subcommand() {
    let out = run(&["prime", "--n", "13"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).starts_with("13: prime"));
    assert!(stdout(&run(&["prime", "--n", "9991"])).starts_with("9991: composite"));
    let v: Value = serde_json::from_slice(&run(&["--format", "json", "prime", "--n", "97"]).stdout).unwrap();
    assert_eq!(v["prime"], true);
}

#[test]
fn bench_csv_schema() {
    let out = run(&["--format", "csv", "bench", "--sizes", "300,20x50", "--reps", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("algo,m,n,reps,median_ns,work"));
    let rows: Vec<Vec<String>> = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    assert_eq!(rows.len(), 5 + 4);
    assert!(rows.iter().all(|r| r.len() == 6 && r[3] == "3"));
}
