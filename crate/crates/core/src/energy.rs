//! Evaluation strategies for `E_m(n)`.
//!
//! | route      | cost                  | notes                                  |
//! |------------|-----------------------|----------------------------------------|
//! | naive      | `O(m)`                | the defining sum                       |
//! | grouped    | `O(sqrt(min(m, n)))`  | floor-sum over quotient blocks         |
//! | block      | `O(m)` per `n`        | `n = qm + r`, amortises `E_m(m)`       |
//! | diagonal   | `O(1)` after a sieve  | `E_n(n) = n^2 - sum_{d<=n} sigma(d)`   |
//! | signed     | `O(m)`                | Euclidean remainders of negative `n`   |
//!
//! The divisor-sum batch route lives in [`crate::sieve`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::arith::{check_input, euclid_mod, max_energy, range_sum, SignedInt, WideInt};
use crate::par::{map_collect, Parallelism};
use crate::sieve::{energy_divisor_batch, SieveTables, SummatorySigma};
use crate::{Error, Result};

/// Moduli count at or below which direct summation is the default route.
pub const NAIVE_THRESHOLD: u64 = 4096;

/// A validated `(m, n)` pair: `1 <= m`, both at most `2^63 - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EnergyQuery {
    pub m: u64,
    pub n: u64,
}

impl EnergyQuery {
    pub fn new(m: u64, n: u64) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidInput("m must be at least 1".into()));
        }
        check_input("m", m)?;
        check_input("n", n)?;
        Ok(EnergyQuery { m, n })
    }
}

/// Maximal run `k_lo..=k_hi` of moduli sharing the quotient `q = n / k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuotientBlock {
    pub k_lo: u64,
    pub k_hi: u64,
    pub q: u64,
}

/// Iterator over the quotient blocks partitioning `1..=min(m, n)`.
#[derive(Debug, Clone)]
pub struct QuotientBlocks {
    n: u64,
    limit: u64,
    k: u64,
}

impl QuotientBlocks {
    pub fn new(m: u64, n: u64) -> Self {
        QuotientBlocks { n, limit: m.min(n), k: 1 }
    }
}

impl Iterator for QuotientBlocks {
    type Item = QuotientBlock;

    fn next(&mut self) -> Option<QuotientBlock> {
        if self.k > self.limit {
            return None;
        }
        let k_lo = self.k;
        let q = self.n / k_lo;
        // largest K with n / K == q
        let k_hi = (self.n / q).min(self.limit);
        self.k = k_hi + 1;
        Some(QuotientBlock { k_lo, k_hi, q })
    }
}

pub fn quotient_blocks(m: u64, n: u64) -> Vec<QuotientBlock> {
    QuotientBlocks::new(m, n).collect()
}

/// `2 * ceil(sqrt(n)) + 2`, an upper bound on the number of quotient blocks.
pub fn block_count_bound(n: u64) -> u64 {
    let s = n.isqrt();
    let ceil = if s * s == n { s } else { s + 1 };
    2 * ceil + 2
}

/// Direct summation of `n mod k` for `k = 1..=m`.
pub fn energy_naive(q: EnergyQuery) -> WideInt {
    let EnergyQuery { m, n } = q;
    // k > n contributes n itself; skip the divisions there.
    let head = m.min(n);
    let mut total: u128 = 0;
    for k in 1..=head {
        total += (n % k) as u128;
    }
    total + (m - head) as u128 * n as u128
}

/// Floor-sum over quotient blocks: `E_m(n) = mn - sum_k k * floor(n / k)`.
pub fn energy_grouped(q: EnergyQuery) -> Result<WideInt> {
    energy_grouped_counted(q).map(|(value, _)| value)
}

/// [`energy_grouped`] together with the number of blocks visited.
pub fn energy_grouped_counted(q: EnergyQuery) -> Result<(WideInt, u64)> {
    let EnergyQuery { m, n } = q;
    let head = m.min(n);
    let mut total = head as u128 * n as u128;
    let mut blocks = 0u64;
    for block in QuotientBlocks::new(m, n) {
        let part = (block.q as u128)
            .checked_mul(range_sum(block.k_lo, block.k_hi)?)
            .ok_or(Error::Overflow("quotient block product"))?;
        total -= part;
        blocks += 1;
    }
    // moduli above n all leave remainder n
    let tail = (m - head) as u128 * n as u128;
    Ok((total + tail, blocks))
}

/// Residues `b_k = m mod k` of a fixed `m`, reused across arguments
/// `n = qm + r`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockDecomposition {
    m: u64,
    residues: Vec<u64>,
}

impl BlockDecomposition {
    pub fn new(m: u64) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidInput("m must be at least 1".into()));
        }
        check_input("m", m)?;
        let residues = (1..=m).map(|k| m % k).collect();
        Ok(BlockDecomposition { m, residues })
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    /// `b_k` for `k = 1..=m`, i.e. `self.residues()[k - 1] == m % k`.
    pub fn residues(&self) -> &[u64] {
        &self.residues
    }

    /// `a_k = floor(m / k)`.
    pub fn quotient(&self, k: u64) -> u64 {
        (self.m - self.residues[(k - 1) as usize]) / k
    }

    /// `E_m(m)` from the stored residues.
    pub fn diagonal_energy(&self) -> WideInt {
        self.residues.iter().map(|&b| b as u128).sum()
    }

    /// `E_m(qm + r) = q E_m(m) + mr - sum_k k * floor((q b_k + r) / k)`.
    ///
    /// `e_mm` must be `E_m(m)`.
    pub fn energy(&self, q: u64, r: u64, e_mm: WideInt) -> Result<WideInt> {
        let m = self.m;
        if r >= m {
            return Err(Error::InvalidInput(format!("block residue r = {r} must be below m = {m}")));
        }
        let n = (q as u128) * (m as u128) + r as u128;
        if n > crate::INPUT_CAP as u128 {
            return Err(Error::Overflow("q*m + r exceeds the input cap"));
        }
        let mut correction: u128 = 0;
        for (k, &b) in (1u128..).zip(&self.residues) {
            let shifted = q as u128 * b as u128 + r as u128;
            correction += k * (shifted / k);
        }
        let lead = (q as u128).checked_mul(e_mm).ok_or(Error::Overflow("q * E_m(m)"))? + m as u128 * r as u128;
        lead.checked_sub(correction).ok_or_else(|| Error::InvalidInput("e_mm is not E_m(m)".into()))
    }
}

/// Block recursion at `n = qm + r`; builds the residues of `m` on each call.
/// Prefer [`BlockDecomposition`] when evaluating many arguments.
pub fn energy_block(m: u64, q: u64, r: u64, e_mm: WideInt) -> Result<WideInt> {
    BlockDecomposition::new(m)?.energy(q, r, e_mm)
}

/// `E_n(n) = n^2 - sum_{d <= n} sigma(d)`.
pub fn energy_diagonal(n: u64, s: &SummatorySigma) -> Result<WideInt> {
    if n == 0 {
        return Err(Error::InvalidInput("diagonal needs n >= 1".into()));
    }
    let prefix = s.prefix(n)?;
    Ok((n as u128 * n as u128) - prefix)
}

/// Sum of Euclidean remainders; accepts negative `n`.
pub fn energy_signed(m: u64, n: SignedInt) -> WideInt {
    (1..=m).map(|k| euclid_mod(n, k) as u128).sum()
}

/// Default route for a single query: naive up to [`NAIVE_THRESHOLD`] moduli,
/// grouped above.
pub fn energy_auto(q: EnergyQuery) -> Result<WideInt> {
    if q.m <= NAIVE_THRESHOLD {
        Ok(energy_naive(q))
    } else {
        energy_grouped(q)
    }
}

/// Upper bound `m (m - 1) / 2` re-exported for callers checking bounds.
pub fn energy_upper_bound(m: u64) -> WideInt {
    max_energy(m)
}

/// Closed set of evaluation routes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Naive,
    Grouped,
    Block,
    DivisorBatch,
    Diagonal,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] =
        [Algorithm::Naive, Algorithm::Grouped, Algorithm::Block, Algorithm::DivisorBatch, Algorithm::Diagonal];

    pub fn tag(self) -> &'static str {
        match self {
            Algorithm::Naive => "naive",
            Algorithm::Grouped => "grouped",
            Algorithm::Block => "block",
            Algorithm::DivisorBatch => "divisor-batch",
            Algorithm::Diagonal => "diagonal",
        }
    }

    /// Selection policy: diagonal only on `m == n` with a resident sieve,
    /// otherwise naive up to [`NAIVE_THRESHOLD`] and grouped above.
    pub fn auto(m: u64, n: u64, sieve_resident: bool) -> Algorithm {
        if m == n && sieve_resident {
            Algorithm::Diagonal
        } else if m <= NAIVE_THRESHOLD {
            Algorithm::Naive
        } else {
            Algorithm::Grouped
        }
    }

    /// Whether this route needs [`SieveTables`] covering `n`.
    pub fn needs_sieve(self) -> bool {
        matches!(self, Algorithm::DivisorBatch | Algorithm::Diagonal)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.tag() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown algorithm `{s}`")))
    }
}

/// Evaluate one query along `algo`. Sieve routes need `tables`.
pub fn evaluate(algo: Algorithm, q: EnergyQuery, tables: Option<&SieveTables>) -> Result<WideInt> {
    let need = |what: &'static str| tables.ok_or(Error::RangeExceeded { what, value: q.n, bound: 0 });
    match algo {
        Algorithm::Naive => Ok(energy_naive(q)),
        Algorithm::Grouped => energy_grouped(q),
        Algorithm::Block => {
            let decomposition = BlockDecomposition::new(q.m)?;
            let e_mm = decomposition.diagonal_energy();
            decomposition.energy(q.n / q.m, q.n % q.m, e_mm)
        }
        Algorithm::DivisorBatch => {
            let t = need("n")?;
            if q.n == 0 {
                return Ok(0);
            }
            energy_divisor_batch(q.m, q.n, &t.spf)
        }
        Algorithm::Diagonal => {
            if q.m != q.n {
                return Err(Error::InvalidInput("diagonal route needs m == n".into()));
            }
            energy_diagonal(q.n, &need("n")?.sigma)
        }
    }
}

/// Evaluate many queries along one route, in input order.
pub fn energy_batch(
    queries: &[EnergyQuery],
    algo: Algorithm,
    tables: Option<&SieveTables>,
    mode: Parallelism,
) -> Vec<Result<WideInt>> {
    map_collect(mode, queries, |&q| evaluate(algo, q, tables))
}
