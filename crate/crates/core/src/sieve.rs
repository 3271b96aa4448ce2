//! Smallest-prime-factor sieve and the divisor machinery built on it.
//!
//! A [`SpfTable`] factors any `d <= bound` by repeated division, which gives
//! divisor lists, `sigma(d)` and the bounded sums `sigma_{<=m}(d)` (divisors
//! of `d` not exceeding `m`) in time proportional to the number of divisors.
//! Those feed two evaluation routes for `E_m(n)`:
//!
//! * the divisor-sum batch `E_m(n) = mn - sum_{d<=n} sigma_{<=m}(d)`, which
//!   costs `Theta(sum_{d<=n} tau(d))` and is kept for cross-checking rather
//!   than single queries;
//! * the finite-difference stream `E_m(n+1) = E_m(n) + m - sigma_{<=m}(n+1)`
//!   for runs of consecutive arguments.

use serde::Serialize;

use crate::energy::{energy_grouped, EnergyQuery};
use crate::par::{map_collect, range_sum_u128, Parallelism};
use crate::{Error, Result, WideInt};

/// Default hard cap on sieve entries.
pub const DEFAULT_SIEVE_CAP: u64 = 100_000_000;

/// Below this many arguments the batch sum stays on the calling thread.
const PAR_MIN_BATCH: u64 = 1 << 15;

/// Chunk length for parallel range streams; each chunk re-seeds its base.
const STREAM_CHUNK: u64 = 1 << 14;

/// `d <= 2^32` has at most 9 distinct prime factors.
const MAX_DISTINCT: usize = 10;

#[derive(Debug, Clone)]
pub struct SpfTable {
    bound: u64,
    spf: Vec<u32>,
}

/// Prime factorisation `d = prod p_i^e_i` with primes ascending.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Factorization {
    len: usize,
    factors: [(u64, u32); MAX_DISTINCT],
}

impl Factorization {
    pub fn as_slice(&self) -> &[(u64, u32)] {
        &self.factors[..self.len]
    }

    pub fn divisor_count(&self) -> u64 {
        self.as_slice().iter().map(|&(_, e)| e as u64 + 1).product()
    }

    fn push(&mut self, p: u64) {
        if self.len > 0 && self.factors[self.len - 1].0 == p {
            self.factors[self.len - 1].1 += 1;
        } else {
            self.factors[self.len] = (p, 1);
            self.len += 1;
        }
    }
}

/// Sorted, duplicate-free divisors of `d`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DivisorList {
    pub d: u64,
    pub divisors: Vec<u64>,
}

impl DivisorList {
    pub fn sum(&self) -> WideInt {
        self.divisors.iter().map(|&x| x as u128).sum()
    }
}

pub fn build_spf(bound: u64) -> Result<SpfTable> {
    SpfTable::with_cap(bound, DEFAULT_SIEVE_CAP)
}

impl SpfTable {
    /// Linear sieve up to `bound` (`2 <= bound <= cap`).
    pub fn with_cap(bound: u64, cap: u64) -> Result<Self> {
        if bound > cap {
            return Err(Error::CapExceeded { requested: bound, cap });
        }
        if bound < 2 {
            return Err(Error::InvalidInput(format!("sieve bound must be at least 2, got {bound}")));
        }
        if bound > u32::MAX as u64 {
            return Err(Error::CapExceeded { requested: bound, cap: u32::MAX as u64 });
        }
        let n = bound as usize;
        let mut spf = vec![0u32; n + 1];
        spf[1] = 1;
        let mut primes: Vec<u32> = Vec::new();
        for i in 2..=n {
            if spf[i] == 0 {
                spf[i] = i as u32;
                primes.push(i as u32);
            }
            let lpf = spf[i];
            for &p in &primes {
                let j = i * p as usize;
                if p > lpf || j > n {
                    break;
                }
                spf[j] = p;
            }
        }
        Ok(SpfTable { bound, spf })
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    fn check(&self, d: u64) -> Result<()> {
        if d > self.bound {
            return Err(Error::RangeExceeded { what: "d", value: d, bound: self.bound });
        }
        if d == 0 {
            return Err(Error::InvalidInput("divisor queries need d >= 1".into()));
        }
        Ok(())
    }

    /// `None` for `d < 2`.
    pub fn smallest_prime_factor(&self, d: u64) -> Result<Option<u64>> {
        self.check(d.max(1))?;
        Ok((d >= 2).then(|| self.spf[d as usize] as u64))
    }

    pub fn is_prime(&self, d: u64) -> Result<bool> {
        Ok(self.smallest_prime_factor(d)? == Some(d))
    }

    pub fn factorize(&self, d: u64) -> Result<Factorization> {
        self.check(d)?;
        let mut f = Factorization::default();
        let mut rest = d as usize;
        while rest > 1 {
            let p = self.spf[rest] as usize;
            f.push(p as u64);
            rest /= p;
        }
        Ok(f)
    }

    /// Divisors from the exponent vector, sorted at the end.
    pub fn divisors(&self, d: u64) -> Result<DivisorList> {
        let f = self.factorize(d)?;
        let mut divisors = Vec::with_capacity(f.divisor_count() as usize);
        divisors.push(1u64);
        for &(p, e) in f.as_slice() {
            let existing = divisors.len();
            let mut pk = 1;
            for _ in 0..e {
                pk *= p;
                for i in 0..existing {
                    divisors.push(divisors[i] * pk);
                }
            }
        }
        divisors.sort_unstable();
        Ok(DivisorList { d, divisors })
    }

    /// `sigma(d)` via the multiplicative formula.
    pub fn sigma(&self, d: u64) -> Result<WideInt> {
        let f = self.factorize(d)?;
        Ok(sigma_from_factors(&f))
    }

    /// Sum of the divisors of `d` that do not exceed `m`.
    pub fn sigma_bounded(&self, d: u64, m: u64) -> Result<WideInt> {
        let f = self.factorize(d)?;
        if m >= d {
            return Ok(sigma_from_factors(&f));
        }
        Ok(bounded_divisor_sum(f.as_slice(), 1, m))
    }
}

fn sigma_from_factors(f: &Factorization) -> WideInt {
    f.as_slice()
        .iter()
        .map(|&(p, e)| {
            let p = p as u128;
            (p.pow(e + 1) - 1) / (p - 1)
        })
        .product()
}

// Depth-first over exponent vectors, pruning once the running product > m.
fn bounded_divisor_sum(factors: &[(u64, u32)], acc: u64, m: u64) -> WideInt {
    let Some((&(p, e), rest)) = factors.split_first() else {
        return acc as u128;
    };
    let mut total = 0;
    let mut current = acc;
    for i in 0..=e {
        total += bounded_divisor_sum(rest, current, m);
        if i == e {
            break;
        }
        match current.checked_mul(p) {
            Some(next) if next <= m => current = next,
            _ => break,
        }
    }
    total
}

pub fn divisors(d: u64, t: &SpfTable) -> Result<DivisorList> {
    t.divisors(d)
}

pub fn sigma(d: u64, t: &SpfTable) -> Result<WideInt> {
    t.sigma(d)
}

pub fn sigma_bounded(d: u64, m: u64, t: &SpfTable) -> Result<WideInt> {
    t.sigma_bounded(d, m)
}

/// Prefix sums `S(n) = sigma(1) + ... + sigma(n)`.
#[derive(Debug, Clone)]
pub struct SummatorySigma {
    bound: u64,
    // prefix[0] == 0
    prefix: Vec<u64>,
}

impl SummatorySigma {
    pub fn bound(&self) -> u64 {
        self.bound
    }

    /// `S(n)`; `S(0) = 0`.
    pub fn prefix(&self, n: u64) -> Result<WideInt> {
        if n > self.bound {
            return Err(Error::RangeExceeded { what: "n", value: n, bound: self.bound });
        }
        Ok(self.prefix[n as usize] as u128)
    }

    /// `sigma(n) = S(n) - S(n - 1)` for `n >= 1`.
    pub fn sigma(&self, n: u64) -> Result<WideInt> {
        if n == 0 {
            return Err(Error::InvalidInput("sigma needs n >= 1".into()));
        }
        Ok(self.prefix(n)? - self.prefix(n - 1)?)
    }
}

/// Linear-time `sigma` table from the SPF array, accumulated into prefix
/// sums.
pub fn summatory_sigma(bound: u64, t: &SpfTable) -> Result<SummatorySigma> {
    if bound > t.bound {
        return Err(Error::RangeExceeded { what: "N", value: bound, bound: t.bound });
    }
    let n = bound as usize;
    let mut sig = vec![0u64; n + 1];
    // largest power of spf(d) dividing d
    let mut lead_power = vec![0u32; n + 1];
    if n >= 1 {
        sig[1] = 1;
        lead_power[1] = 1;
    }
    for d in 2..=n {
        let p = t.spf[d];
        let e = d / p as usize;
        lead_power[d] = if e > 1 && t.spf[e] == p { lead_power[e] * p } else { p };
        let pk = lead_power[d] as u64;
        let p = p as u64;
        let rest = d / pk as usize;
        sig[d] = sig[rest] * ((pk * p - 1) / (p - 1));
    }
    drop(lead_power);
    let mut running = 0u64;
    for v in sig.iter_mut() {
        running = running.checked_add(*v).ok_or(Error::Overflow("summatory sigma exceeds 64 bits"))?;
        *v = running;
    }
    Ok(SummatorySigma { bound, prefix: sig })
}

/// Resident sieve data: SPF table plus summatory sigma over the same bound.
#[derive(Debug, Clone)]
pub struct SieveTables {
    pub spf: SpfTable,
    pub sigma: SummatorySigma,
}

impl SieveTables {
    pub fn build(bound: u64) -> Result<Self> {
        Self::build_capped(bound, DEFAULT_SIEVE_CAP)
    }

    pub fn build_capped(bound: u64, cap: u64) -> Result<Self> {
        let spf = SpfTable::with_cap(bound.max(2), cap)?;
        let sigma = summatory_sigma(spf.bound(), &spf)?;
        Ok(SieveTables { spf, sigma })
    }

    pub fn bound(&self) -> u64 {
        self.spf.bound()
    }
}

/// `E_m(n) = mn - sum_{d <= n} sigma_{<=m}(d)`.
pub fn energy_divisor_batch(m: u64, n: u64, t: &SpfTable) -> Result<WideInt> {
    let mode = if n >= PAR_MIN_BATCH { Parallelism::Parallel } else { Parallelism::Sequential };
    energy_divisor_batch_with(m, n, t, mode)
}

pub fn energy_divisor_batch_with(m: u64, n: u64, t: &SpfTable, mode: Parallelism) -> Result<WideInt> {
    let q = EnergyQuery::new(m, n)?;
    if n > t.bound {
        return Err(Error::RangeExceeded { what: "n", value: n, bound: t.bound });
    }
    let subtracted = range_sum_u128(mode, 1, n, |d| t.sigma_bounded(d, m).expect("d within sieve bound"));
    Ok(q.m as u128 * q.n as u128 - subtracted)
}

/// Consecutive values `E_m(n0), ..., E_m(n1)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EnergySeries {
    pub m: u64,
    pub n0: u64,
    pub n1: u64,
    pub values: Vec<WideInt>,
}

impl EnergySeries {
    pub fn iter(&self) -> impl Iterator<Item = (u64, WideInt)> + '_ {
        (self.n0..=self.n1).zip(self.values.iter().copied())
    }

    pub fn get(&self, n: u64) -> Option<WideInt> {
        if n < self.n0 || n > self.n1 {
            return None;
        }
        self.values.get((n - self.n0) as usize).copied()
    }
}

pub fn energy_range_incremental(m: u64, n0: u64, n1: u64, t: &SpfTable) -> Result<EnergySeries> {
    energy_range_incremental_with(m, n0, n1, t, Parallelism::default())
}

/// Stream by finite differences. In parallel mode the range is cut into
/// chunks, each seeded by [`energy_grouped`] at its first argument.
pub fn energy_range_incremental_with(
    m: u64,
    n0: u64,
    n1: u64,
    t: &SpfTable,
    mode: Parallelism,
) -> Result<EnergySeries> {
    if n0 > n1 {
        return Err(Error::InvalidInput(format!("empty range [{n0}, {n1}]")));
    }
    EnergyQuery::new(m, n1)?;
    if n1 > t.bound {
        return Err(Error::RangeExceeded { what: "n_end", value: n1, bound: t.bound });
    }
    let starts: Vec<u64> =
        if mode.is_parallel() { (n0..=n1).step_by(STREAM_CHUNK as usize).collect() } else { vec![n0] };
    let chunk_len = if mode.is_parallel() { STREAM_CHUNK } else { n1 - n0 + 1 };
    let chunks = map_collect(mode, &starts, |&start| -> Result<Vec<WideInt>> {
        let end = (start + chunk_len - 1).min(n1);
        let mut value = energy_grouped(EnergyQuery { m, n: start })?;
        let mut out = Vec::with_capacity((end - start + 1) as usize);
        out.push(value);
        for n in start..end {
            // E(n+1) = E(n) + m - sigma_{<=m}(n+1), with the sum never negative
            value = value + m as u128 - t.sigma_bounded(n + 1, m)?;
            out.push(value);
        }
        Ok(out)
    });
    let mut values = Vec::with_capacity((n1 - n0 + 1) as usize);
    for chunk in chunks {
        values.extend(chunk?);
    }
    Ok(EnergySeries { m, n0, n1, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::energy_naive;
    use proptest::prelude::*;

    fn trial_spf(d: u64) -> u64 {
        (2..=d).find(|p| d.is_multiple_of(*p)).unwrap()
    }

    fn trial_divisors(d: u64) -> Vec<u64> {
        (1..=d).filter(|k| d.is_multiple_of(*k)).collect()
    }

    fn trial_is_prime(n: u64) -> bool {
        n >= 2 && (2..).take_while(|k| k * k <= n).all(|k| !n.is_multiple_of(k))
    }

    fn naive(m: u64, n: u64) -> u128 {
        energy_naive(EnergyQuery::new(m, n).unwrap())
    }

    #[test]
    fn spf_small_tables() {
        let t = build_spf(10).unwrap();
        let expected = [(2, 2), (3, 3), (4, 2), (5, 5), (6, 2), (7, 7), (8, 2), (9, 3), (10, 2)];
        for (d, p) in expected {
            assert_eq!(t.smallest_prime_factor(d).unwrap(), Some(p));
        }
        let t = build_spf(2).unwrap();
        assert_eq!(t.smallest_prime_factor(2).unwrap(), Some(2));
        let t = build_spf(30).unwrap();
        for d in [25, 27, 29] {
            assert_eq!(t.smallest_prime_factor(d).unwrap(), Some(trial_spf(d)));
        }
        assert_eq!(t.smallest_prime_factor(1).unwrap(), None);
    }

    #[test]
    fn spf_errors() {
        assert_eq!(SpfTable::with_cap(1001, 1000).unwrap_err(), Error::CapExceeded { requested: 1001, cap: 1000 });
        assert!(build_spf(1).is_err());
        assert!(build_spf(DEFAULT_SIEVE_CAP + 1).unwrap_err().is_capacity());
        let t = build_spf(20).unwrap();
        assert_eq!(t.divisors(21).unwrap_err(), Error::RangeExceeded { what: "d", value: 21, bound: 20 });
        assert!(t.sigma(21).is_err());
        assert!(t.sigma_bounded(21, 3).is_err());
        assert!(t.divisors(0).is_err());
    }

    #[test]
    fn spf_invariants_against_trial_division() {
        let t = build_spf(10_000).unwrap();
        for d in 2..=10_000 {
            let p = t.smallest_prime_factor(d).unwrap().unwrap();
            assert_eq!(p, trial_spf(d));
            assert_eq!(t.is_prime(d).unwrap(), trial_is_prime(d));
        }
    }

    #[test]
    fn divisor_examples() {
        let t = build_spf(100).unwrap();
        assert_eq!(t.divisors(1).unwrap().divisors, vec![1]);
        assert_eq!(t.divisors(12).unwrap().divisors, vec![1, 2, 3, 4, 6, 12]);
        assert_eq!(t.divisors(7).unwrap().divisors, vec![1, 7]);
        assert_eq!(t.sigma(1), Ok(1));
        assert_eq!(t.sigma(6), Ok(12));
        assert_eq!(t.sigma(13), Ok(14));
        assert_eq!(t.sigma_bounded(7, 6), Ok(1));
        assert_eq!(t.sigma_bounded(12, 12), Ok(28));
        assert_eq!(t.sigma_bounded(6, 3), Ok(6));
    }

    #[test]
    fn divisors_and_sigma_match_trial_division() {
        let t = build_spf(10_000).unwrap();
        for d in 1..=10_000 {
            let list = t.divisors(d).unwrap();
            let expected = trial_divisors(d);
            assert_eq!(list.divisors, expected);
            assert_eq!(t.sigma(d).unwrap(), list.sum());
            assert_eq!(t.factorize(d).unwrap().divisor_count(), expected.len() as u64);
        }
    }

    #[test]
    fn summatory_examples() {
        let t = build_spf(10_000).unwrap();
        assert_eq!(summatory_sigma(1, &t).unwrap().prefix(1), Ok(1));
        assert_eq!(summatory_sigma(5, &t).unwrap().prefix(5), Ok(21));
        let s = summatory_sigma(10_000, &t).unwrap();
        assert_eq!(s.prefix(7), Ok(41));
        assert_eq!(s.prefix(0), Ok(0));
        assert!(s.prefix(10_001).is_err());
        assert!(summatory_sigma(10_001, &t).is_err());
        for n in 1..=10_000 {
            let sigma_n = s.sigma(n).unwrap();
            assert_eq!(sigma_n, t.sigma(n).unwrap());
            if n >= 2 {
                assert!(sigma_n > n as u128);
            }
        }
    }

    #[test]
    fn diagonal_bridge() {
        let tables = SieveTables::build(10_000).unwrap();
        for n in 1..=10_000u64 {
            let via_sigma = (n as u128) * (n as u128) - tables.sigma.prefix(n).unwrap();
            assert_eq!(via_sigma, naive(n, n), "n = {n}");
        }
    }

    #[test]
    fn prime_count_via_sigma() {
        let tables = SieveTables::build(10_000).unwrap();
        let by_sigma = (2..=10_000u64).filter(|&n| tables.sigma.sigma(n).unwrap() == n as u128 + 1).count();
        let by_trial = (2..=10_000u64).filter(|&n| trial_is_prime(n)).count();
        assert_eq!(by_trial, 1229);
        assert_eq!(by_sigma, 1229);
    }

    #[test]
    fn divisor_batch_examples() {
        let t = build_spf(100).unwrap();
        assert_eq!(energy_divisor_batch(6, 7, &t), Ok(8));
        assert_eq!(energy_divisor_batch(1, 5, &t), Ok(0));
        assert_eq!(energy_divisor_batch(5, 12, &t), Ok(2));
        assert!(energy_divisor_batch(5, 101, &t).unwrap_err().is_capacity());
    }

    #[test]
    fn divisor_batch_grid() {
        let t = build_spf(2000).unwrap();
        for m in 1..=100 {
            for n in (1..=2000).step_by(7).chain([2000]) {
                assert_eq!(energy_divisor_batch(m, n, &t).unwrap(), naive(m, n), "m={m} n={n}");
            }
        }
    }

    #[test]
    fn divisor_batch_modes_agree() {
        let t = build_spf(1 << 16).unwrap();
        let n = (1 << 16) - 3;
        let seq = energy_divisor_batch_with(300, n, &t, Parallelism::Sequential).unwrap();
        let par = energy_divisor_batch_with(300, n, &t, Parallelism::Parallel).unwrap();
        assert_eq!(seq, par);
        assert_eq!(seq, naive(300, n));
    }

    #[test]
    fn range_examples() {
        let t = build_spf(100).unwrap();
        assert_eq!(energy_range_incremental(6, 6, 7, &t).unwrap().values, vec![3, 8]);
        let series = energy_range_incremental(3, 0, 6, &t).unwrap();
        let expected: Vec<u128> = (0..=6).map(|n| naive(3, n)).collect();
        assert_eq!(series.values, expected);
        assert_eq!(series.values[..4], [0, 2, 2, 1]);
        let last = energy_range_incremental(4, 11, 12, &t).unwrap();
        assert_eq!(last.get(12), Some(0));
        assert_eq!(last.get(13), None);
        assert!(energy_range_incremental(4, 12, 11, &t).is_err());
        assert!(energy_range_incremental(4, 90, 101, &t).unwrap_err().is_capacity());
    }

    #[test]
    fn range_modes_agree_across_chunks() {
        let t = build_spf(50_000).unwrap();
        let seq = energy_range_incremental_with(77, 3, 50_000, &t, Parallelism::Sequential).unwrap();
        let par = energy_range_incremental_with(77, 3, 50_000, &t, Parallelism::Parallel).unwrap();
        assert_eq!(seq, par);
        for (n, v) in seq.iter().step_by(997) {
            assert_eq!(v, naive(77, n));
        }
    }

    proptest! {
        #[test]
        fn range_agrees_with_naive(m in 1u64..=100, n0 in 0u64..=5000, len in 0u64..=200) {
            let t = build_spf(5000).unwrap();
            let n1 = (n0 + len).min(5000);
            let series = energy_range_incremental(m, n0, n1, &t).unwrap();
            prop_assert_eq!(series.values.len() as u64, n1 - n0 + 1);
            for (n, v) in series.iter() {
                prop_assert_eq!(v, naive(m, n));
            }
            for (i, w) in series.values.windows(2).enumerate() {
                let d = n0 + i as u64 + 1;
                prop_assert_eq!(w[1] + t.sigma_bounded(d, m).unwrap(), w[0] + m as u128);
            }
        }

        #[test]
        fn bounded_sigma_matches_filter(d in 1u64..=5000, m in 1u64..=5000) {
            let t = build_spf(5000).unwrap();
            let expected: u128 = trial_divisors(d).into_iter().filter(|&k| k <= m).map(u128::from).sum();
            prop_assert_eq!(t.sigma_bounded(d, m).unwrap(), expected);
        }
    }
}
