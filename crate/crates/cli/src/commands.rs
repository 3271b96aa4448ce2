use std::fmt;
use std::io::{self, Write};
use std::time::Instant;

use modenergy::energy::{energy_naive, evaluate};
use modenergy::identities::{
    diagonal_difference, is_prime_via_energy, run_suite, IdentityCheck, IdentityId, SuiteConfig, VerificationReport,
};
use modenergy::sieve::{energy_range_incremental, SieveTables, SpfTable, DEFAULT_SIEVE_CAP};
use modenergy::{energy_diagonal, Algorithm, EnergyQuery};
use serde::Serialize;

use crate::bench::{self, BenchRow};
use crate::output::{csv_writer, write_json, Format, OutputRecord};
use crate::published::published;
use crate::{Cli, Command, GlobalOpts};

/// Longest stream `range` will produce.
pub const RANGE_MAX_LEN: u64 = 100_000_000;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Capacity(String),
    /// A cross-check inside a command disagreed.
    Failed(String),
    Io(io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Failed(_) | CliError::Io(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Capacity(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) | CliError::Capacity(msg) | CliError::Failed(msg) => f.write_str(msg),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl From<modenergy::Error> for CliError {
    fn from(e: modenergy::Error) -> Self {
        if e.is_capacity() {
            CliError::Capacity(e.to_string())
        } else {
            CliError::Usage(e.to_string())
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.into())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.into())
    }
}

type CmdResult = Result<u8, CliError>;

pub fn run<W: Write>(cli: &Cli, out: &mut W) -> CmdResult {
    let g = &cli.global;
    if g.sieve_bound > DEFAULT_SIEVE_CAP {
        return Err(CliError::Capacity(format!(
            "--sieve-bound {} exceeds the hard cap {DEFAULT_SIEVE_CAP}",
            g.sieve_bound
        )));
    }
    match &cli.command {
        Command::Eval { m, n, algo } => eval(g, out, *m, *n, algo.as_deref()),
        Command::Range { m, n_start, n_end } => range(g, out, *m, *n_start, *n_end),
        Command::Verify { suites, max_m, max_n, max_t, samples, omit_passing } => {
            let config = SuiteConfig {
                suites: IdentityId::parse_list(suites)?,
                max_m: *max_m,
                max_n: *max_n,
                max_t: *max_t,
                samples: *samples,
                seed: g.seed,
                ..SuiteConfig::default()
            };
            verify(g, out, &config, *omit_passing)
        }
        Command::Prime { n } => prime(g, out, *n),
        Command::Table { n_max } => table(g, out, *n_max),
        Command::Bench { sizes, reps } => run_bench(g, out, sizes, *reps),
    }
}

fn sieve_limit(g: &GlobalOpts, need: u64) -> Result<(), CliError> {
    if need > g.sieve_bound {
        return Err(CliError::Capacity(format!(
            "{need} exceeds the sieve bound {} (raise --sieve-bound, hard cap {DEFAULT_SIEVE_CAP})",
            g.sieve_bound
        )));
    }
    Ok(())
}

fn build_tables(g: &GlobalOpts, need: u64) -> Result<SieveTables, CliError> {
    sieve_limit(g, need)?;
    Ok(SieveTables::build_capped(need.max(2), DEFAULT_SIEVE_CAP)?)
}

fn eval<W: Write>(g: &GlobalOpts, out: &mut W, m: u64, n: u64, algo: Option<&str>) -> CmdResult {
    let q = EnergyQuery::new(m, n)?;
    let algo = match algo {
        None | Some("auto") => Algorithm::auto(m, n, false),
        Some(name) => name.parse::<Algorithm>()?,
    };
    let tables = if algo.needs_sieve() { Some(build_tables(g, n)?) } else { None };
    let start = Instant::now();
    let value = evaluate(algo, q, tables.as_ref())?;
    let elapsed = start.elapsed().as_nanos() as u64;
    let record = OutputRecord { algo: Some(algo), elapsed_ns: Some(elapsed), ..OutputRecord::new(m, n, value) };
    match g.format {
        Format::Text => writeln!(out, "{value}")?,
        Format::Csv => {
            let mut w = csv_writer(out);
            w.serialize(&record)?;
            w.flush()?;
        }
        Format::Json => write_json(out, &record)?,
    }
    Ok(0)
}

#[derive(Serialize)]
struct RangeRow {
    m: u64,
    n: u64,
    value: String,
}

fn range<W: Write>(g: &GlobalOpts, out: &mut W, m: u64, n_start: u64, n_end: u64) -> CmdResult {
    if n_start > n_end {
        return Err(CliError::Usage(format!("--n-start {n_start} is above --n-end {n_end}")));
    }
    if n_end - n_start >= RANGE_MAX_LEN {
        return Err(CliError::Capacity(format!("range length exceeds {RANGE_MAX_LEN}")));
    }
    sieve_limit(g, n_end)?;
    let spf = SpfTable::with_cap(n_end.max(2), DEFAULT_SIEVE_CAP)?;
    let series = energy_range_incremental(m, n_start, n_end, &spf)?;
    match g.format {
        Format::Text => {
            for (n, v) in series.iter() {
                writeln!(out, "{n}\t{v}")?;
            }
        }
        Format::Csv => {
            let mut w = csv_writer(out);
            w.write_record(["m", "n", "value"])?;
            for (n, v) in series.iter() {
                w.write_record([m.to_string(), n.to_string(), v.to_string()])?;
            }
            w.flush()?;
        }
        Format::Json => {
            let rows: Vec<RangeRow> = series.iter().map(|(n, v)| RangeRow { m, n, value: v.to_string() }).collect();
            write_json(out, &rows)?;
        }
    }
    Ok(0)
}

fn verify<W: Write>(g: &GlobalOpts, out: &mut W, config: &SuiteConfig, omit_passing: bool) -> CmdResult {
    if config.max_t == 0 {
        return Err(CliError::Usage("--max-t must be at least 1".into()));
    }
    let tables = build_tables(g, config.required_sieve_bound())?;
    let mut report = run_suite(config, &tables)?;
    let clean = report.is_clean();
    if omit_passing {
        report.checks.retain(|c| !c.passed);
    }
    match g.format {
        Format::Json => write_json(out, &report)?,
        Format::Csv => {
            let mut w = csv_writer(out);
            w.write_record(["id", "params", "passed", "relation", "lhs", "rhs"])?;
            for c in &report.checks {
                let (relation, lhs, rhs) = match &c.witness {
                    Some(wt) => (wt.relation.as_str(), wt.lhs.as_str(), wt.rhs.as_str()),
                    None => ("", "", ""),
                };
                let passed = if c.passed { "true" } else { "false" };
                w.write_record([c.id.name(), &c.params.to_string(), passed, relation, lhs, rhs])?;
            }
            w.flush()?;
        }
        Format::Text => write_report_text(out, &report)?,
    }
    Ok(if clean { 0 } else { 1 })
}

fn write_report_text<W: Write>(out: &mut W, report: &VerificationReport) -> io::Result<()> {
    writeln!(out, "seed {}", report.seed)?;
    writeln!(out, "{:<14} {:>8} {:>8}", "suite", "passed", "failed")?;
    for (id, t) in &report.totals {
        writeln!(out, "{:<14} {:>8} {:>8}", id.name(), t.passed, t.failed)?;
    }
    let failures: Vec<&IdentityCheck> = report.failures().collect();
    for c in &failures {
        if let Some(w) = &c.witness {
            writeln!(out, "FAIL {}({}): {} [lhs {}, rhs {}]", c.id, c.params, w.relation, w.lhs, w.rhs)?;
        }
    }
    for f in &report.findings {
        writeln!(out, "FINDING {} ({}): E = {}, residue {}", f.claim, f.params, f.energy, f.residue)?;
    }
    writeln!(out, "implementation failures: {}; findings: {}", report.failure_count(), report.findings.len())
}

#[derive(Serialize)]
struct PrimeVerdict {
    n: u64,
    prime: bool,
    sigma: String,
    diagonal_difference: String,
    target: String,
}

fn prime<W: Write>(g: &GlobalOpts, out: &mut W, n: u64) -> CmdResult {
    let tables = build_tables(g, n)?;
    let prime = is_prime_via_energy(n, &tables.sigma)?;
    let v = PrimeVerdict {
        n,
        prime,
        sigma: tables.sigma.sigma(n)?.to_string(),
        diagonal_difference: diagonal_difference(n, &tables.sigma)?.to_string(),
        target: (n - 2).to_string(),
    };
    let word = if prime { "prime" } else { "composite" };
    match g.format {
        Format::Text => writeln!(
            out,
            "{n}: {word} (sigma = {}, E_n(n) - E_(n-1)(n-1) = {}, n - 2 = {})",
            v.sigma, v.diagonal_difference, v.target
        )?,
        Format::Csv => {
            let mut w = csv_writer(out);
            w.write_record(["n", "verdict", "sigma", "diagonal_difference"])?;
            w.write_record([&n.to_string(), word, &v.sigma, &v.diagonal_difference])?;
            w.flush()?;
        }
        Format::Json => write_json(out, &v)?,
    }
    Ok(0)
}

#[derive(Debug, Clone, Serialize)]
pub struct TableRow {
    pub n: u64,
    pub computed: String,
    pub published: Option<u64>,
    pub status: Option<&'static str>,
}

#[derive(Serialize)]
struct TableAudit<'a> {
    rows: &'a [TableRow],
    published_rows: usize,
    mismatches: Vec<u64>,
}

/// Diagonal values from the sieve route, each certified against direct
/// summation.
pub fn table_rows(tables: &SieveTables, n_max: u64) -> Result<Vec<TableRow>, CliError> {
    let mut rows = Vec::with_capacity(n_max as usize);
    for n in 1..=n_max {
        let computed = energy_diagonal(n, &tables.sigma)?;
        let direct = energy_naive(EnergyQuery::new(n, n)?);
        if computed != direct {
            return Err(CliError::Failed(format!(
                "diagonal route gives {computed} at n = {n}, direct sum gives {direct}"
            )));
        }
        let published = published(n);
        let status = published.map(|p| if p as u128 == computed { "MATCH" } else { "MISMATCH" });
        rows.push(TableRow { n, computed: computed.to_string(), published, status });
    }
    Ok(rows)
}

fn table<W: Write>(g: &GlobalOpts, out: &mut W, n_max: u64) -> CmdResult {
    let tables = build_tables(g, n_max)?;
    let rows = table_rows(&tables, n_max)?;
    let published_rows = rows.iter().filter(|r| r.published.is_some()).count();
    let mismatches: Vec<u64> = rows.iter().filter(|r| r.status == Some("MISMATCH")).map(|r| r.n).collect();
    match g.format {
        Format::Text => {
            writeln!(out, "{:>6} {:>12} {:>10}  status", "n", "computed", "published")?;
            for r in &rows {
                let published = r.published.map(|p| p.to_string()).unwrap_or_else(|| "-".into());
                writeln!(out, "{:>6} {:>12} {:>10}  {}", r.n, r.computed, published, r.status.unwrap_or("-"))?;
            }
            writeln!(out, "summary: {} of {published_rows} published values MISMATCH", mismatches.len())?;
        }
        Format::Csv => {
            let mut w = csv_writer(out);
            w.write_record(["n", "computed", "published", "status"])?;
            for r in &rows {
                let published = r.published.map(|p| p.to_string()).unwrap_or_default();
                w.write_record([&r.n.to_string(), &r.computed, &published, r.status.unwrap_or("")])?;
            }
            w.flush()?;
        }
        Format::Json => write_json(out, &TableAudit { rows: &rows, published_rows, mismatches })?,
    }
    Ok(0)
}

#[derive(Serialize)]
struct BenchJsonRow<'a> {
    #[serde(flatten)]
    row: &'a BenchRow,
    value: String,
}

fn run_bench<W: Write>(g: &GlobalOpts, out: &mut W, sizes: &str, reps: u32) -> CmdResult {
    if reps < 3 {
        return Err(CliError::Usage(format!("--reps must be at least 3, got {reps}")));
    }
    let sizes = bench::parse_sizes(sizes)?;
    let tables = match bench::sieve_need(&sizes, g.sieve_bound) {
        Some(need) => Some(build_tables(g, need)?),
        None => None,
    };
    let resident = tables.as_ref().map(SieveTables::bound);
    let mut rows = Vec::new();
    for &(m, n) in &sizes {
        let q = EnergyQuery::new(m, n)?;
        for algo in bench::plan(m, n, resident) {
            rows.push(bench::measure(algo, q, tables.as_ref(), reps)?);
        }
    }
    match g.format {
        Format::Text => {
            writeln!(
                out,
                "{:<14} {:>12} {:>12} {:>5} {:>14} {:>12}  value",
                "algo", "m", "n", "reps", "median_ns", "work"
            )?;
            for r in &rows {
                writeln!(
                    out,
                    "{:<14} {:>12} {:>12} {:>5} {:>14} {:>12}  {}",
                    r.algo.tag(),
                    r.m,
                    r.n,
                    r.reps,
                    r.median_ns,
                    r.work,
                    r.value
                )?;
            }
        }
        Format::Csv => {
            let mut w = csv_writer(out);
            w.write_record(["algo", "m", "n", "reps", "median_ns", "work"])?;
            for r in &rows {
                w.write_record([
                    r.algo.tag().to_string(),
                    r.m.to_string(),
                    r.n.to_string(),
                    r.reps.to_string(),
                    r.median_ns.to_string(),
                    r.work.to_string(),
                ])?;
            }
            w.flush()?;
        }
        Format::Json => {
            let json: Vec<BenchJsonRow> =
                rows.iter().map(|row| BenchJsonRow { row, value: row.value.to_string() }).collect();
            write_json(out, &json)?;
        }
    }
    for &(m, n) in &sizes {
        let mut values = rows.iter().filter(|r| (r.m, r.n) == (m, n)).map(|r| r.value);
        let first = values.next();
        if values.any(|v| Some(v) != first) {
            return Err(CliError::Failed(format!("routes disagree at m = {m}, n = {n}")));
        }
    }
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_rows_audit() {
        let tables = SieveTables::build(30).unwrap();
        let rows = table_rows(&tables, 30).unwrap();
        let status = |n: usize| rows[n - 1].status;
        assert_eq!((status(1), status(2), status(3)), (Some("MATCH"), Some("MATCH"), Some("MATCH")));
        assert_eq!(status(4), Some("MISMATCH"));
        assert_eq!(rows[3].computed, "1");
        assert_eq!(rows[3].published, Some(4));
        assert_eq!(rows[4].computed, "4");
        assert_eq!(rows[6].computed, "8");
        assert_eq!(status(21), None);
    }

    #[test]
    fn error_exit_codes() {
        assert_eq!(CliError::from(modenergy::Error::Overflow("x")).exit_code(), 3);
        assert_eq!(CliError::from(modenergy::Error::InvalidInput("x".into())).exit_code(), 2);
        assert_eq!(CliError::Failed("x".into()).exit_code(), 1);
    }
}
