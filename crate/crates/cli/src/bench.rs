//! Timing harness behind `modenergy bench`.
//!
//! Each route runs `reps` times on the same query; the row keeps the median
//! wall time and a work counter: loop iterations for naive, quotient blocks
//! for grouped, moduli for block, sieve arguments for divisor-batch, and one
//! table lookup for diagonal. Sieve construction is not timed.

use std::time::Instant;

use modenergy::energy::{energy_grouped_counted, evaluate};
use modenergy::sieve::SieveTables;
use modenergy::{Algorithm, EnergyQuery, WideInt};
use serde::Serialize;

use crate::commands::CliError;

/// Largest `m` for which the `O(m)` routes (naive, block) are timed.
pub const LINEAR_ROUTE_MAX: u64 = 100_000_000;

/// Largest `n` for which the divisor-sum batch is timed.
pub const DIVISOR_BATCH_MAX: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BenchRow {
    pub algo: Algorithm,
    pub m: u64,
    pub n: u64,
    pub reps: u32,
    pub median_ns: u64,
    pub work: u64,
    #[serde(skip_serializing)]
    pub value: WideInt,
}

/// `N` means `m = n = N`; `MxN` sets both.
pub fn parse_sizes(list: &str) -> Result<Vec<(u64, u64)>, CliError> {
    let parse = |s: &str| -> Result<u64, CliError> {
        let v: u64 = s.trim().replace('_', "").parse().map_err(|_| CliError::Usage(format!("malformed size `{s}`")))?;
        if v > i64::MAX as u64 {
            return Err(CliError::Usage(format!("size {v} exceeds 2^63 - 1")));
        }
        Ok(v)
    };
    let mut sizes = Vec::new();
    for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (m, n) = match item.split_once(['x', 'X']) {
            Some((m, n)) => (parse(m)?, parse(n)?),
            None => {
                let v = parse(item)?;
                (v, v)
            }
        };
        if m == 0 {
            return Err(CliError::Usage(format!("size `{item}` needs m >= 1")));
        }
        sizes.push((m, n));
    }
    if sizes.is_empty() {
        return Err(CliError::Usage("no sizes given".into()));
    }
    Ok(sizes)
}

/// Routes measured for one size given the resident sieve bound.
pub fn plan(m: u64, n: u64, sieve_bound: Option<u64>) -> Vec<Algorithm> {
    let covered = |x: u64| sieve_bound.is_some_and(|b| x <= b);
    let mut algos = Vec::new();
    if m <= LINEAR_ROUTE_MAX {
        algos.push(Algorithm::Naive);
    }
    algos.push(Algorithm::Grouped);
    if m <= LINEAR_ROUTE_MAX {
        algos.push(Algorithm::Block);
    }
    if (1..=DIVISOR_BATCH_MAX).contains(&n) && covered(n) {
        algos.push(Algorithm::DivisorBatch);
    }
    if m == n && n >= 1 && covered(n) {
        algos.push(Algorithm::Diagonal);
    }
    algos
}

/// Largest `n` among the sizes that a sieve-backed route would use.
pub fn sieve_need(sizes: &[(u64, u64)], sieve_bound: u64) -> Option<u64> {
    sizes.iter().filter(|&&(m, n)| n <= sieve_bound && (n <= DIVISOR_BATCH_MAX || m == n)).map(|&(_, n)| n).max()
}

pub fn work(algo: Algorithm, q: EnergyQuery) -> Result<u64, CliError> {
    Ok(match algo {
        Algorithm::Naive => q.m.min(q.n),
        Algorithm::Grouped => energy_grouped_counted(q)?.1,
        Algorithm::Block => q.m,
        Algorithm::DivisorBatch => q.n,
        Algorithm::Diagonal => 1,
    })
}

pub fn measure(algo: Algorithm, q: EnergyQuery, tables: Option<&SieveTables>, reps: u32) -> Result<BenchRow, CliError> {
    let mut samples = Vec::with_capacity(reps as usize);
    let mut value = 0;
    for _ in 0..reps {
        let start = Instant::now();
        value = std::hint::black_box(evaluate(algo, std::hint::black_box(q), tables)?);
        samples.push(start.elapsed().as_nanos() as u64);
    }
    Ok(BenchRow { algo, m: q.m, n: q.n, reps, median_ns: median(&mut samples), work: work(algo, q)?, value })
}

fn median(samples: &mut [u64]) -> u64 {
    samples.sort_unstable();
    let mid = samples.len() / 2;
    if samples.len() % 2 == 1 {
        samples[mid]
    } else {
        (samples[mid - 1] + samples[mid]) / 2
    }
}
