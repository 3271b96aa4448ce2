//! `modenergy`: evaluate, stream, verify and benchmark remainder sums.
//!
//! Exit codes: 0 success, 1 identity-check failure, 2 usage error,
//! 3 capacity or limit error.

mod bench;
mod commands;
mod output;
mod published;

use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::output::Format;

/// Default sieve bound for commands that need divisor tables.
pub const DEFAULT_SIEVE_BOUND: u64 = 10_000_000;

const INPUT_MAX: u64 = i64::MAX as u64;

#[derive(Debug, Parser)]
#[command(name = "modenergy", version, about = "Remainder sums E_m(n) = sum_{k<=m} (n mod k)")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalOpts {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Largest sieve (SPF / summatory sigma) a command may build.
    #[arg(long, global = true, default_value_t = DEFAULT_SIEVE_BOUND)]
    pub sieve_bound: u64,
    /// Seed for sampled checks and spot points.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate E_m(n) once.
    Eval {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..=INPUT_MAX))]
        m: u64,
        #[arg(long, value_parser = clap::value_parser!(u64).range(0..=INPUT_MAX))]
        n: u64,
        /// naive | grouped | block | divisor-batch | diagonal; automatic when omitted.
        #[arg(long)]
        algo: Option<String>,
    },
    /// Stream E_m(n) for consecutive n by finite differences.
    Range {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..=INPUT_MAX))]
        m: u64,
        #[arg(long)]
        n_start: u64,
        #[arg(long)]
        n_end: u64,
    },
    /// Run identity suites and print a verification report.
    Verify {
        /// Comma-separated suites, or `all`.
        #[arg(long, default_value = "all")]
        suites: String,
        #[arg(long, default_value_t = 64)]
        max_m: u64,
        #[arg(long, default_value_t = 64)]
        max_n: u64,
        /// Largest residue modulus for the congruence suite.
        #[arg(long, default_value_t = 12)]
        max_t: u64,
        /// Seeded samples per suite on top of the exhaustive grid.
        #[arg(long, default_value_t = 32)]
        samples: u32,
        /// Leave passing checks out of the serialized report.
        #[arg(long)]
        omit_passing: bool,
    },
    /// Primality of n through the diagonal energy difference.
    Prime {
        #[arg(long, value_parser = clap::value_parser!(u64).range(2..=INPUT_MAX))]
        n: u64,
    },
    /// Diagonal values E_n(n) audited against the published table (n <= 20).
    Table {
        #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
        n_max: u64,
    },
    /// Median timings and work counters per algorithm.
    Bench {
        /// Comma-separated sizes: `N` for m = n = N, or `MxN`.
        #[arg(long, default_value = "100,10000,1000000")]
        sizes: String,
        #[arg(long, default_value_t = 5)]
        reps: u32,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let result = commands::run(&cli, &mut out);
    let flushed = out.flush();
    match result {
        Ok(code) => match flushed {
            Err(e) if e.kind() != io::ErrorKind::BrokenPipe => {
                eprintln!("error: {e}");
                ExitCode::from(1)
            }
            _ => ExitCode::from(code),
        },
        Err(commands::CliError::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
