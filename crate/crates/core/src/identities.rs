//! Executable identity checks.
//!
//! Each check evaluates `E_m(n)` through a pluggable evaluator (the
//! production routes by default) and compares it with an independently
//! computed side of a known identity. A failed check carries a [`Witness`]
//! naming the violated relation and both sides.
//!
//! One published congruence, `E_p(n) = 0 (mod p)` for prime `p` dividing
//! `n`, does not hold (`E_3(3) = 1`). It is evaluated and recorded as a
//! [`Finding`] rather than asserted, so the suite separates wrong claims from
//! implementation bugs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::arith::{lcm_upto, max_energy, WideInt, INPUT_CAP};
use crate::energy::{
    block_count_bound, energy_auto, energy_diagonal, energy_naive, energy_signed, BlockDecomposition, EnergyQuery,
    QuotientBlocks,
};
use crate::par::{map_collect, Parallelism};
use crate::sieve::{energy_divisor_batch_with, SieveTables, SummatorySigma};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum IdentityId {
    Bounds,
    Symmetry,
    FloorSum,
    DivisorSum,
    Grouping,
    Diagonal,
    Primality,
    Congruence,
    Recursion,
    Regimes,
    Periodicity,
    PrimeClaims,
}

impl IdentityId {
    pub const ALL: [IdentityId; 12] = [
        IdentityId::Bounds,
        IdentityId::Symmetry,
        IdentityId::FloorSum,
        IdentityId::DivisorSum,
        IdentityId::Grouping,
        IdentityId::Diagonal,
        IdentityId::Primality,
        IdentityId::Congruence,
        IdentityId::Recursion,
        IdentityId::Regimes,
        IdentityId::Periodicity,
        IdentityId::PrimeClaims,
    ];

    pub fn name(self) -> &'static str {
        match self {
            IdentityId::Bounds => "bounds",
            IdentityId::Symmetry => "symmetry",
            IdentityId::FloorSum => "floor-sum",
            IdentityId::DivisorSum => "divisor-sum",
            IdentityId::Grouping => "grouping",
            IdentityId::Diagonal => "diagonal",
            IdentityId::Primality => "primality",
            IdentityId::Congruence => "congruence",
            IdentityId::Recursion => "recursion",
            IdentityId::Regimes => "regimes",
            IdentityId::Periodicity => "periodicity",
            IdentityId::PrimeClaims => "prime-claims",
        }
    }

    /// Parse a comma-separated suite list; `all` selects every suite.
    pub fn parse_list(list: &str) -> Result<BTreeSet<IdentityId>> {
        let mut out = BTreeSet::new();
        for name in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            if name == "all" {
                out.extend(IdentityId::ALL);
            } else {
                out.insert(name.parse()?);
            }
        }
        Ok(out)
    }
}

impl fmt::Display for IdentityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for IdentityId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        IdentityId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown suite `{s}`")))
    }
}

/// One identity instance. Variant order matches [`IdentityId`] so that the
/// derived ordering is the canonical `(identity, params)` order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Task {
    Extremal { m: u64, n: u64 },
    Complementary { m: u64, n: i128 },
    FloorSum { m: u64, n: u64 },
    DivisorSum { m: u64, n: u64 },
    Grouping { m: u64, n: u64 },
    Diagonal { n: u64 },
    Primality { n: u64 },
    Congruence { m: u64, n: u64, t: u64 },
    Recursion { m: u64, n: u64 },
    Regimes { m: u64, n: u64 },
    Periodicity { m: u64, n: u64 },
    PrimeClaims { p: u64, other: u64 },
}

impl Task {
    pub fn id(&self) -> IdentityId {
        match self {
            Task::Extremal { .. } => IdentityId::Bounds,
            Task::Complementary { .. } => IdentityId::Symmetry,
            Task::FloorSum { .. } => IdentityId::FloorSum,
            Task::DivisorSum { .. } => IdentityId::DivisorSum,
            Task::Grouping { .. } => IdentityId::Grouping,
            Task::Diagonal { .. } => IdentityId::Diagonal,
            Task::Primality { .. } => IdentityId::Primality,
            Task::Congruence { .. } => IdentityId::Congruence,
            Task::Recursion { .. } => IdentityId::Recursion,
            Task::Regimes { .. } => IdentityId::Regimes,
            Task::Periodicity { .. } => IdentityId::Periodicity,
            Task::PrimeClaims { .. } => IdentityId::PrimeClaims,
        }
    }

    pub fn params(&self) -> Params {
        let u = |v: u64| v as i128;
        Params(match *self {
            Task::Extremal { m, n }
            | Task::FloorSum { m, n }
            | Task::DivisorSum { m, n }
            | Task::Grouping { m, n }
            | Task::Recursion { m, n }
            | Task::Regimes { m, n }
            | Task::Periodicity { m, n } => vec![("m", u(m)), ("n", u(n))],
            Task::Complementary { m, n } => vec![("m", u(m)), ("n", n)],
            Task::Diagonal { n } | Task::Primality { n } => vec![("n", u(n))],
            Task::Congruence { m, n, t } => vec![("m", u(m)), ("n", u(n)), ("t", u(t))],
            Task::PrimeClaims { p, other } => vec![("p", u(p)), ("other", u(other))],
        })
    }
}

/// Named integer inputs of a check; serialised as a map of decimal strings.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Params(pub Vec<(&'static str, i128)>);

impl Params {
    pub fn get(&self, name: &str) -> Option<i128> {
        self.0.iter().find(|(k, _)| *k == name).map(|&(_, v)| v)
    }
}

impl fmt::Display for Params {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (k, v)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{k}={v}")?;
        }
        Ok(())
    }
}

impl Serialize for Params {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            map.serialize_entry(k, &v.to_string())?;
        }
        map.end()
    }
}

/// The first relation that failed, with both sides as decimal strings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub relation: String,
    pub lhs: String,
    pub rhs: String,
}

/// A published claim contradicted by direct computation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Finding {
    pub claim: &'static str,
    pub params: Params,
    pub energy: String,
    pub residue: String,
}

pub const M_PRIME_CONGRUENCE: &str = "m-prime-congruence";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IdentityCheck {
    pub id: IdentityId,
    pub params: Params,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    #[serde(skip)]
    pub task: Task,
    #[serde(skip)]
    pub finding: Option<Finding>,
}

#[derive(Default)]
struct Probe {
    witness: Option<Witness>,
}

impl Probe {
    fn expect(&mut self, ok: bool, relation: &str, lhs: impl fmt::Display, rhs: impl fmt::Display) {
        if !ok && self.witness.is_none() {
            self.witness = Some(Witness { relation: relation.to_string(), lhs: lhs.to_string(), rhs: rhs.to_string() });
        }
    }

    fn expect_eq<T: PartialEq + fmt::Display>(&mut self, relation: &str, lhs: T, rhs: T) {
        let ok = lhs == rhs;
        self.expect(ok, relation, lhs, rhs);
    }

    fn finish(self, task: Task) -> IdentityCheck {
        IdentityCheck {
            id: task.id(),
            params: task.params(),
            passed: self.witness.is_none(),
            witness: self.witness,
            task,
            finding: None,
        }
    }
}

/// Counts `N_{r,t}(m; n)` of moduli `k <= m` with `n mod k = r (mod t)`,
/// plus `M_t(m) = floor(m / t)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ResidueBlockCount {
    pub m: u64,
    pub n: u64,
    pub t: u64,
    pub counts: Vec<u64>,
    pub multiples: u64,
}

/// Panics if `t == 0`.
pub fn residue_block_counts(m: u64, n: u64, t: u64) -> ResidueBlockCount {
    assert!(t >= 1, "residue modulus must be positive");
    let mut counts = vec![0u64; t as usize];
    for k in 1..=m {
        counts[((n % k) % t) as usize] += 1;
    }
    ResidueBlockCount { m, n, t, counts, multiples: m / t }
}

pub fn is_prime_trial(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut k = 2u64;
    while k * k <= n {
        if n.is_multiple_of(k) {
            return false;
        }
        k += 1;
    }
    true
}

/// `E_n(n) - E_{n-1}(n-1) == n - 2`, evaluated on the diagonal route.
pub fn is_prime_via_energy(n: u64, s: &SummatorySigma) -> Result<bool> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("primality test needs n >= 2, got {n}")));
    }
    Ok(diagonal_difference(n, s)? == n as i128 - 2)
}

/// `E_n(n) - E_{n-1}(n-1)` on the diagonal route.
pub fn diagonal_difference(n: u64, s: &SummatorySigma) -> Result<i128> {
    let hi = energy_diagonal(n, s)? as i128;
    let lo = if n == 1 { 0 } else { energy_diagonal(n - 1, s)? as i128 };
    Ok(hi - lo)
}

/// The production evaluator: default route for nonnegative arguments,
/// Euclidean remainders for negative ones.
pub fn reference_energy(m: u64, n: i128) -> WideInt {
    if (0..=INPUT_CAP as i128).contains(&n) {
        if let Ok(v) = EnergyQuery::new(m, n as u64).and_then(energy_auto) {
            return v;
        }
    }
    energy_signed(m, n)
}

fn mix(seed: u64, a: u64, b: u64) -> u64 {
    let mut x = seed ^ a.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ b.rotate_left(29);
    x ^= x >> 31;
    x.wrapping_mul(0xBF58_476D_1CE4_E5B9)
}

fn floor_sum(m: u64, n: u64) -> u128 {
    (1..=m).map(|k| k as u128 * (n / k) as u128).sum()
}

/// Runs identity checks against an evaluator.
#[derive(Clone, Copy)]
pub struct Verifier<'a> {
    tables: &'a SieveTables,
    eval: &'a (dyn Fn(u64, i128) -> WideInt + Sync + 'a),
    seed: u64,
}

impl<'a> Verifier<'a> {
    pub fn new(tables: &'a SieveTables, seed: u64) -> Self {
        Verifier { tables, eval: &reference_energy, seed }
    }

    /// Swap in another evaluator for `E_m(n)`; used to make sure every suite
    /// notices a broken implementation.
    pub fn with_evaluator(
        tables: &'a SieveTables,
        seed: u64,
        eval: &'a (dyn Fn(u64, i128) -> WideInt + Sync + 'a),
    ) -> Self {
        Verifier { tables, eval, seed }
    }

    fn e(&self, m: u64, n: u64) -> WideInt {
        (self.eval)(m, n as i128)
    }

    /// Additivity split point in `0..=m`.
    pub fn split_point(&self, m: u64, n: u64) -> u64 {
        ChaCha8Rng::seed_from_u64(mix(self.seed, m, n)).random_range(0..=m)
    }

    fn sampled_smaller_modulus(&self, m: u64, n: u64) -> u64 {
        ChaCha8Rng::seed_from_u64(mix(!self.seed, m, n)).random_range(1..=m)
    }

    fn sieve_covers(&self, n: u64) -> Result<()> {
        let bound = self.tables.bound();
        if n > bound {
            return Err(Error::RangeExceeded { what: "n", value: n, bound });
        }
        Ok(())
    }

    pub fn run(&self, task: Task) -> Result<IdentityCheck> {
        let out = match task {
            Task::Extremal { m, n } => self.check_extremal(m, n),
            Task::Complementary { m, n } => self.check_complementary(m, n),
            Task::FloorSum { m, n } => self.check_floor_sum(m, n),
            Task::DivisorSum { m, n } => self.check_divisor_sum(m, n),
            Task::Grouping { m, n } => self.check_grouping(m, n),
            Task::Diagonal { n } => self.check_diagonal(n),
            Task::Primality { n } => self.check_primality(n),
            Task::Congruence { m, n, t } => self.check_congruences(m, n, t),
            Task::Recursion { m, n } => self.check_recursions(m, n),
            Task::Regimes { m, n } => self.check_regimes(m, n),
            Task::Periodicity { m, n } => self.check_periodicity(m, n),
            Task::PrimeClaims { p, other } => self.check_prime_claims(p, other),
        };
        out.map_err(|source| Error::Check {
            check: task.id().name(),
            params: task.params().to_string(),
            source: Box::new(source),
        })
    }

    /// Re-evaluate a previously produced check.
    pub fn recheck(&self, check: &IdentityCheck) -> Result<IdentityCheck> {
        self.run(check.task)
    }

    /// Bounds plus both extremal biconditionals against `L_m`.
    pub fn check_extremal(&self, m: u64, n: u64) -> Result<IdentityCheck> {
        let l = lcm_upto(m)?.value;
        let e = self.e(m, n);
        let top = max_energy(m);
        let mut p = Probe::default();
        p.expect(e <= top, "E_m(n) <= m(m-1)/2", e, top);
        let residue = n as u128 % l;
        p.expect((e == 0) == (residue == 0), "E_m(n) = 0 <=> L_m | n", e, residue);
        p.expect((e == top) == (residue == l - 1), "E_m(n) = m(m-1)/2 <=> n = -1 (mod L_m)", e, residue);
        Ok(p.finish(Task::Extremal { m, n }))
    }

    pub fn check_complementary(&self, m: u64, n: i128) -> Result<IdentityCheck> {
        let mirror = (-1i128).checked_sub(n).ok_or_else(|| Error::InvalidInput("-n-1 overflows".into()))?;
        let lhs = (self.eval)(m, n) + (self.eval)(m, mirror);
        let mut p = Probe::default();
        p.expect_eq("E_m(n) + E_m(-n-1) = m(m-1)/2", lhs, max_energy(m));
        Ok(p.finish(Task::Complementary { m, n }))
    }

    pub fn check_floor_sum(&self, m: u64, n: u64) -> Result<IdentityCheck> {
        let rhs = m as u128 * n as u128 - floor_sum(m, n);
        let mut p = Probe::default();
        p.expect_eq("E_m(n) = mn - sum k floor(n/k)", self.e(m, n), rhs);
        Ok(p.finish(Task::FloorSum { m, n }))
    }

    /// Divisor-sum form, once from explicit divisor lists and once from the
    /// pruned bounded-sigma batch.
    pub fn check_divisor_sum(&self, m: u64, n: u64) -> Result<IdentityCheck> {
        self.sieve_covers(n)?;
        let spf = &self.tables.spf;
        let mut listed: u128 = 0;
        for d in 1..=n {
            listed += spf.divisors(d)?.divisors.iter().filter(|&&k| k <= m).map(|&k| k as u128).sum::<u128>();
        }
        let rhs = m as u128 * n as u128 - listed;
        let batch = energy_divisor_batch_with(m, n, spf, Parallelism::Sequential)?;
        let mut p = Probe::default();
        p.expect_eq("E_m(n) = mn - sum_d sum_{k|d, k<=m} k", self.e(m, n), rhs);
        p.expect_eq("divisor batch = mn - sum_d sum_{k|d, k<=m} k", batch, rhs);
        Ok(p.finish(Task::DivisorSum { m, n }))
    }

    pub fn check_grouping(&self, m: u64, n: u64) -> Result<IdentityCheck> {
        let mut p = Probe::default();
        let mut subtracted: u128 = 0;
        let mut blocks = 0u64;
        for b in QuotientBlocks::new(m, n) {
            p.expect(n / b.k_lo == b.q && n / b.k_hi == b.q, "floor(n/k) constant on block", b.k_lo, b.k_hi);
            let members: u128 = (b.k_lo..=b.k_hi).map(u128::from).sum();
            subtracted += b.q as u128 * members;
            blocks += 1;
        }
        p.expect(blocks <= block_count_bound(n), "block count <= 2 ceil(sqrt n) + 2", blocks, block_count_bound(n));
        let rhs = m as u128 * n as u128 - subtracted;
        p.expect_eq("E_m(n) = mn - sum_j j sum_{k in K_j} k", self.e(m, n), rhs);
        Ok(p.finish(Task::Grouping { m, n }))
    }

    pub fn check_diagonal(&self, n: u64) -> Result<IdentityCheck> {
        self.sieve_covers(n)?;
        let rhs = energy_diagonal(n, &self.tables.sigma)?;
        let mut p = Probe::default();
        p.expect_eq("E_n(n) = n^2 - sum_{d<=n} sigma(d)", self.e(n, n), rhs);
        Ok(p.finish(Task::Diagonal { n }))
    }

    /// prime <=> sigma(n) = n + 1 <=> diagonal difference = n - 2, with the
    /// difference pinned to (2n - 1) - sigma(n) and the diagonal anchored to
    /// the evaluator.
    pub fn check_primality(&self, n: u64) -> Result<IdentityCheck> {
        self.sieve_covers(n)?;
        let s = &self.tables.sigma;
        let prime = is_prime_trial(n);
        let sigma_n = s.sigma(n)?;
        let by_energy = is_prime_via_energy(n, s)?;
        let diff = diagonal_difference(n, s)?;
        let mut p = Probe::default();
        p.expect_eq("prime <=> sigma(n) = n+1", prime, sigma_n == n as u128 + 1);
        p.expect_eq("prime <=> E_n(n) - E_{n-1}(n-1) = n-2", prime, by_energy);
        p.expect_eq("E_n(n) - E_{n-1}(n-1) = (2n-1) - sigma(n)", diff, 2 * n as i128 - 1 - sigma_n as i128);
        p.expect_eq("E_n(n) = n^2 - S(n)", self.e(n, n), energy_diagonal(n, s)?);
        p.expect_eq("E_{n-1}(n-1) = (n-1)^2 - S(n-1)", self.e(n - 1, n - 1), energy_diagonal(n - 1, s)?);
        Ok(p.finish(Task::Primality { n }))
    }

    pub fn check_congruences(&self, m: u64, n: u64, t: u64) -> Result<IdentityCheck> {
        if t == 0 {
            return Err(Error::InvalidInput("t must be at least 1".into()));
        }
        let counts = residue_block_counts(m, n, t);
        let t128 = t as u128;
        let e = self.e(m, n);
        let weighted: u128 = counts.counts.iter().enumerate().map(|(r, &c)| r as u128 * c as u128).sum();
        let mut on_multiples: u128 = 0;
        let mut off_multiples: u128 = 0;
        for k in 1..=m {
            if k % t == 0 {
                on_multiples += (n % k) as u128;
            } else {
                off_multiples += (n % k) as u128;
            }
        }
        let mut p = Probe::default();
        p.expect_eq("sum_r N_{r,t} = m", counts.counts.iter().sum::<u64>(), m);
        p.expect_eq("E_m(n) = sum_r r N_{r,t} (mod t)", e % t128, weighted % t128);
        p.expect_eq(
            "sum_{t|k} (n mod k) = M_t(m) n (mod t)",
            on_multiples % t128,
            (counts.multiples as u128 * n as u128) % t128,
        );
        p.expect_eq(
            "E_m(n) = M_t(m) n + sum_{t!|k} (n mod k) (mod t)",
            e % t128,
            (counts.multiples as u128 * n as u128 + off_multiples) % t128,
        );
        Ok(p.finish(Task::Congruence { m, n, t }))
    }

    /// Finite difference in `n`, additivity at a seeded split, block
    /// recursion at `n = qm + r`.
    pub fn check_recursions(&self, m: u64, n: u64) -> Result<IdentityCheck> {
        self.sieve_covers(n + 1)?;
        let e0 = self.e(m, n);
        let e1 = self.e(m, n + 1);
        let bounded = self.tables.spf.sigma_bounded(n + 1, m)?;
        let mut p = Probe::default();
        p.expect_eq("E_m(n+1) + sum_{k|n+1, k<=m} k = E_m(n) + m", e1 + bounded, e0 + m as u128);

        let split = self.split_point(m, n);
        let head = if split == 0 { 0 } else { self.e(split, n) };
        let tail: u128 = (split + 1..=m).map(|k| (n % k) as u128).sum();
        if head + tail != e0 {
            let relation = format!("E_m(n) = E_{split}(n) + sum_{{k>{split}}} (n mod k)");
            p.expect(false, &relation, e0, head + tail);
        }

        let decomposition = BlockDecomposition::new(m)?;
        let e_mm = self.e(m, m);
        let relation = "E_m(qm+r) = q E_m(m) + mr - sum k floor((q b_k + r)/k)";
        match decomposition.energy(n / m, n % m, e_mm) {
            Ok(via_blocks) => p.expect_eq(relation, e0, via_blocks),
            Err(_) => p.expect(false, relation, e0, "negative"),
        }
        Ok(p.finish(Task::Recursion { m, n }))
    }

    pub fn check_regimes(&self, m: u64, n: u64) -> Result<IdentityCheck> {
        let e = self.e(m, n);
        let mut p = Probe::default();
        p.expect_eq("E_m(n) = sum_k (n mod k)", e, energy_naive(EnergyQuery::new(m, n)?));
        if n <= m && n >= 1 {
            let rhs = self.e(n, n) + (m - n) as u128 * n as u128;
            p.expect_eq("n <= m: E_m(n) = E_n(n) + (m-n)n", e, rhs);
        }
        if n >= m {
            // n >= m: every k <= m has quotient >= floor(n/m) >= 1
            let mut subtracted: u128 = 0;
            let mut smallest = u64::MAX;
            for b in QuotientBlocks::new(m, n) {
                subtracted += b.q as u128 * (b.k_lo..=b.k_hi).map(u128::from).sum::<u128>();
                smallest = smallest.min(b.q);
            }
            p.expect_eq("smallest quotient = floor(n/m)", smallest, n / m);
            let rhs = m as u128 * n as u128 - subtracted;
            p.expect_eq("n >= m: E_m(n) = mn - sum_q q sum_{k in K_q} k", e, rhs);
        }
        Ok(p.finish(Task::Regimes { m, n }))
    }

    /// Period `L_m`, divisibility `L_{m1} | L_m` and extremal compatibility
    /// for a seeded `m1 <= m`.
    pub fn check_periodicity(&self, m: u64, n: u64) -> Result<IdentityCheck> {
        let l = lcm_upto(m)?.value;
        let shifted = n as u128 + l;
        if shifted > INPUT_CAP as u128 {
            return Err(Error::Overflow("n + L_m exceeds the input cap"));
        }
        let shifted = shifted as u64;
        let e_shifted = self.e(m, shifted);
        let mut p = Probe::default();
        p.expect_eq("E_m(n + L_m) = E_m(n)", e_shifted, self.e(m, n));
        let reduced = (n as u128 % l) as u64;
        p.expect_eq("E_m(n + L_m) = sum_k ((n mod L_m) mod k)", e_shifted, energy_naive(EnergyQuery::new(m, reduced)?));
        let m1 = self.sampled_smaller_modulus(m, n);
        let l1 = lcm_upto(m1)?.value;
        p.expect(l % l1 == 0, "L_m1 | L_m", l1, l);
        let l = l as u64;
        p.expect_eq("E_m1(L_m) = 0", self.e(m1, l), 0);
        p.expect_eq("E_m1(L_m - 1) = m1(m1-1)/2", self.e(m1, l - 1), max_energy(m1));
        Ok(p.finish(Task::Periodicity { m, n }))
    }

    /// Sub-check A asserts the prime-argument identities with `m = other`.
    /// Sub-check B asserts the floor-sum form with `m = p, n = other` and,
    /// when `p | other`, records whether `E_p(n) = 0 (mod p)` as a finding.
    pub fn check_prime_claims(&self, prime: u64, other: u64) -> Result<IdentityCheck> {
        if !is_prime_trial(prime) {
            return Err(Error::NotPrime(prime));
        }
        let (pr, ot) = (prime as u128, other as u128);
        let mut p = Probe::default();

        let m = other;
        let e = self.e(m, prime);
        if m >= prime {
            p.expect_eq("m >= p: E_m(p) = E_p(p) + (m-p)p", e, self.e(prime, prime) + (ot - pr) * pr);
        } else {
            p.expect_eq("m < p: E_m(p) = mp - sum k floor(p/k)", e, ot * pr - floor_sum(m, prime));
            let half = prime / 2;
            for k in (half + 1)..=m.min(prime - 1) {
                p.expect_eq("floor(p/k) = 1 for p/2 < k < p", prime / k, 1);
            }
        }

        let n = other;
        let e = self.e(prime, n);
        p.expect_eq("E_p(n) = pn - sum k floor(n/k)", e, pr * ot - floor_sum(prime, n));
        let task = Task::PrimeClaims { p: prime, other };
        let mut check = p.finish(task);
        if n.is_multiple_of(prime) && !e.is_multiple_of(pr) {
            check.finding = Some(Finding {
                claim: M_PRIME_CONGRUENCE,
                params: Params(vec![("p", prime as i128), ("n", n as i128)]),
                energy: e.to_string(),
                residue: (e % pr).to_string(),
            });
        }
        Ok(check)
    }
}

/// Selection, grid bounds and seed for [`run_suite`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SuiteConfig {
    pub suites: BTreeSet<IdentityId>,
    pub max_m: u64,
    pub max_n: u64,
    pub max_t: u64,
    pub periodicity_max_m: u64,
    pub prime_bound: u64,
    pub prime_multiples: u64,
    /// Seeded samples per suite beyond the exhaustive grid.
    pub samples: u32,
    /// Largest `n` drawn for sampled checks that need the sieve.
    pub sieve_sample_max: u64,
    pub seed: u64,
    #[serde(skip)]
    pub parallelism: Parallelism,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            suites: IdentityId::ALL.into_iter().collect(),
            max_m: 64,
            max_n: 64,
            max_t: 12,
            periodicity_max_m: 20,
            prime_bound: 50,
            prime_multiples: 20,
            samples: 32,
            sieve_sample_max: 1 << 14,
            seed: 0,
            parallelism: Parallelism::default(),
        }
    }
}

impl SuiteConfig {
    /// Sieve bound the selected suites need.
    pub fn required_sieve_bound(&self) -> u64 {
        let needs_sieve = [IdentityId::DivisorSum, IdentityId::Diagonal, IdentityId::Primality, IdentityId::Recursion]
            .iter()
            .any(|id| self.suites.contains(id));
        if !needs_sieve {
            return 2;
        }
        let sampled = if self.samples > 0 { self.sieve_sample_max + 1 } else { 0 };
        (self.max_n + 1).max(sampled).max(2)
    }

    fn tasks(&self) -> BTreeSet<Task> {
        let mut tasks = BTreeSet::new();
        let ms = 1..=self.max_m;
        let ns = 1..=self.max_n;
        for &id in &self.suites {
            match id {
                IdentityId::Bounds => {
                    for m in ms.clone() {
                        for n in 0..=self.max_n {
                            tasks.insert(Task::Extremal { m, n });
                        }
                    }
                    // land on both extremal classes
                    for m in 1..=self.max_m.min(20) {
                        let l = lcm_upto(m).map(|l| l.value as u64).unwrap_or(u64::MAX);
                        for t in 1..=3u64 {
                            if let Some(n) = l.checked_mul(t).filter(|&n| n <= INPUT_CAP) {
                                tasks.insert(Task::Extremal { m, n });
                                tasks.insert(Task::Extremal { m, n: n - 1 });
                            }
                        }
                    }
                }
                IdentityId::Symmetry => {
                    let top = self.max_n as i128;
                    for m in ms.clone() {
                        for n in (-top - 1)..=top {
                            tasks.insert(Task::Complementary { m, n });
                        }
                    }
                }
                IdentityId::Diagonal => tasks.extend(ns.clone().map(|n| Task::Diagonal { n })),
                IdentityId::Primality => tasks.extend((2..=self.max_n).map(|n| Task::Primality { n })),
                IdentityId::Congruence => {
                    for m in ms.clone() {
                        for n in 0..=self.max_n {
                            for t in 1..=self.max_t {
                                tasks.insert(Task::Congruence { m, n, t });
                            }
                        }
                    }
                }
                IdentityId::Periodicity => {
                    for m in 1..=self.max_m.min(self.periodicity_max_m) {
                        for n in 0..=self.max_n {
                            tasks.insert(Task::Periodicity { m, n });
                        }
                    }
                }
                IdentityId::PrimeClaims => {
                    for p in (2..=self.prime_bound).filter(|&p| is_prime_trial(p)) {
                        let multiples = (1..=self.prime_multiples).map(|j| p * j);
                        for other in ms.clone().chain(multiples) {
                            tasks.insert(Task::PrimeClaims { p, other });
                        }
                    }
                }
                pair => {
                    for m in ms.clone() {
                        for n in ns.clone() {
                            tasks.insert(pair_task(pair, m, n));
                        }
                    }
                }
            }
        }
        self.sample_tasks(&mut tasks);
        tasks
    }

    fn sample_tasks(&self, tasks: &mut BTreeSet<Task>) {
        const WIDE_N: u64 = 1 << 40;
        const WIDE_M: u64 = 10_000;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let sieve_n = self.sieve_sample_max.max(2);
        for &id in &self.suites {
            for _ in 0..self.samples {
                let task = match id {
                    IdentityId::Bounds => {
                        Task::Extremal { m: rng.random_range(1..=88), n: rng.random_range(0..=WIDE_N) }
                    }
                    IdentityId::Symmetry => Task::Complementary {
                        m: rng.random_range(1..=WIDE_M),
                        n: rng.random_range(-(WIDE_N as i128)..=WIDE_N as i128),
                    },
                    IdentityId::FloorSum => {
                        Task::FloorSum { m: rng.random_range(1..=WIDE_M), n: rng.random_range(1..=WIDE_N) }
                    }
                    IdentityId::Grouping => {
                        Task::Grouping { m: rng.random_range(1..=100_000), n: rng.random_range(1..=WIDE_N) }
                    }
                    IdentityId::Regimes => {
                        let m = rng.random_range(1..=WIDE_M);
                        let n =
                            if rng.random_bool(0.5) { rng.random_range(1..=m) } else { rng.random_range(1..=WIDE_N) };
                        Task::Regimes { m, n }
                    }
                    IdentityId::Congruence => Task::Congruence {
                        m: rng.random_range(1..=WIDE_M),
                        n: rng.random_range(0..=WIDE_N),
                        t: rng.random_range(1..=self.max_t.max(1)),
                    },
                    IdentityId::DivisorSum => {
                        Task::DivisorSum { m: rng.random_range(1..=1000), n: rng.random_range(1..=sieve_n) }
                    }
                    IdentityId::Diagonal => Task::Diagonal { n: rng.random_range(1..=sieve_n) },
                    IdentityId::Primality => Task::Primality { n: rng.random_range(2..=sieve_n) },
                    IdentityId::Recursion => {
                        Task::Recursion { m: rng.random_range(1..=1000), n: rng.random_range(0..sieve_n) }
                    }
                    IdentityId::Periodicity => Task::Periodicity {
                        m: rng.random_range(1..=self.periodicity_max_m.clamp(1, 30)),
                        n: rng.random_range(0..=WIDE_N),
                    },
                    IdentityId::PrimeClaims => {
                        let p = loop {
                            let p = rng.random_range(2..=1000);
                            if is_prime_trial(p) {
                                break p;
                            }
                        };
                        let other = if rng.random_bool(0.5) {
                            p * rng.random_range(1..=1000)
                        } else {
                            rng.random_range(1..=WIDE_M)
                        };
                        Task::PrimeClaims { p, other }
                    }
                };
                tasks.insert(task);
            }
        }
    }
}

fn pair_task(id: IdentityId, m: u64, n: u64) -> Task {
    match id {
        IdentityId::FloorSum => Task::FloorSum { m, n },
        IdentityId::DivisorSum => Task::DivisorSum { m, n },
        IdentityId::Grouping => Task::Grouping { m, n },
        IdentityId::Recursion => Task::Recursion { m, n },
        IdentityId::Regimes => Task::Regimes { m, n },
        other => unreachable!("{other} is not an (m, n) grid suite"),
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Tally {
    pub passed: u64,
    pub failed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub seed: u64,
    pub config: SuiteConfig,
    pub checks: Vec<IdentityCheck>,
    pub findings: Vec<Finding>,
    pub totals: BTreeMap<IdentityId, Tally>,
}

impl VerificationReport {
    pub fn failures(&self) -> impl Iterator<Item = &IdentityCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn failure_count(&self) -> u64 {
        self.totals.values().map(|t| t.failed).sum()
    }

    pub fn is_clean(&self) -> bool {
        self.failure_count() == 0
    }
}

pub fn run_suite(config: &SuiteConfig, tables: &SieveTables) -> Result<VerificationReport> {
    run_suite_with(config, &Verifier::new(tables, config.seed))
}

/// Evaluate every task of `config` with `verifier`. Tasks are enumerated in
/// canonical order and results keep that order whatever the scheduling.
pub fn run_suite_with(config: &SuiteConfig, verifier: &Verifier<'_>) -> Result<VerificationReport> {
    let tasks: Vec<Task> = config.tasks().into_iter().collect();
    let results = map_collect(config.parallelism, &tasks, |&task| verifier.run(task));
    let mut totals: BTreeMap<IdentityId, Tally> = config.suites.iter().map(|&id| (id, Tally::default())).collect();
    let mut checks = Vec::with_capacity(results.len());
    let mut findings = Vec::new();
    for result in results {
        let check = result?;
        let tally = totals.entry(check.id).or_default();
        if check.passed {
            tally.passed += 1;
        } else {
            tally.failed += 1;
        }
        if let Some(f) = &check.finding {
            findings.push(f.clone());
        }
        checks.push(check);
    }
    Ok(VerificationReport { seed: config.seed, config: config.clone(), checks, findings, totals })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tables(bound: u64) -> SieveTables {
        SieveTables::build(bound).unwrap()
    }

    #[test]
    fn residue_count_examples() {
        assert_eq!(residue_block_counts(4, 7, 2).counts, vec![1, 3]);
        assert_eq!(residue_block_counts(9, 123, 1).counts, vec![9]);
        assert_eq!(residue_block_counts(3, 0, 5).counts, vec![3, 0, 0, 0, 0]);
        assert_eq!(residue_block_counts(10, 3, 3).multiples, 3);
    }

    #[test]
    fn suite_names_round_trip() {
        for id in IdentityId::ALL {
            assert_eq!(id.name().parse::<IdentityId>().unwrap(), id);
        }
        assert_eq!(IdentityId::parse_list("all").unwrap().len(), 12);
        assert_eq!(IdentityId::parse_list("diagonal, bounds").unwrap().len(), 2);
        assert!(IdentityId::parse_list("nosuch").is_err());
        assert!(IdentityId::parse_list("").unwrap().is_empty());
    }

    #[test]
    fn extremal_examples() {
        let t = tables(100);
        let v = Verifier::new(&t, 0);
        assert!(v.check_extremal(4, 12).unwrap().passed);
        assert_eq!(energy_naive(EnergyQuery::new(3, 5).unwrap()), 3);
        assert!(v.check_extremal(3, 5).unwrap().passed);
        assert_eq!(energy_naive(EnergyQuery::new(3, 4).unwrap()), 1);
        assert!(v.check_extremal(3, 4).unwrap().passed);
        assert!(v.check_extremal(89, 1).unwrap_err().is_capacity());
    }

    #[test]
    fn complementary_examples() {
        let t = tables(100);
        let v = Verifier::new(&t, 0);
        assert!(v.check_complementary(3, 2).unwrap().passed);
        assert!(v.check_complementary(5, -1).unwrap().passed);
        assert!(v.check_complementary(100, 12345).unwrap().passed);
    }

    #[test]
    fn congruence_examples() {
        let t = tables(100);
        let v = Verifier::new(&t, 0);
        assert_eq!(energy_naive(EnergyQuery::new(4, 7).unwrap()), 5);
        assert!(v.check_congruences(4, 7, 2).unwrap().passed);
        assert!(v.check_congruences(13, 99, 1).unwrap().passed);
        assert!(v.check_congruences(20, 137, 7).unwrap().passed);
    }

    #[test]
    fn recursion_examples() {
        let t = tables(100);
        let v = Verifier::new(&t, 0);
        assert!(v.check_recursions(6, 6).unwrap().passed);
        assert!(v.check_recursions(1, 57).unwrap().passed);
        assert!(v.check_recursions(9, 35).unwrap().passed);
        assert!(v.check_recursions(9, 100).unwrap_err().is_capacity());
        for _ in 0..3 {
            assert_eq!(v.split_point(40, 17), v.split_point(40, 17));
        }
        assert!(v.split_point(40, 17) <= 40);
    }

    #[test]
    fn regime_examples() {
        let t = tables(100);
        let v = Verifier::new(&t, 0);
        assert!(v.check_regimes(10, 3).unwrap().passed);
        assert!(v.check_regimes(12, 12).unwrap().passed);
        assert!(v.check_regimes(7, 100).unwrap().passed);
        let q: Vec<u64> = QuotientBlocks::new(7, 100).map(|b| b.q).collect();
        assert_eq!(*q.last().unwrap(), 14);
    }

    #[test]
    fn periodicity_examples() {
        let t = tables(100);
        let v = Verifier::new(&t, 0);
        assert_eq!(energy_naive(EnergyQuery::new(3, 1).unwrap()), 2);
        assert_eq!(energy_naive(EnergyQuery::new(3, 7).unwrap()), 2);
        assert!(v.check_periodicity(3, 1).unwrap().passed);
        assert!(v.check_periodicity(1, 999).unwrap().passed);
        assert!(v.check_periodicity(10, 777).unwrap().passed);
    }

    #[test]
    fn prime_claim_examples() {
        let t = tables(100);
        let v = Verifier::new(&t, 0);
        assert_eq!(energy_naive(EnergyQuery::new(9, 5).unwrap()), 24);
        assert!(v.check_prime_claims(5, 9).unwrap().passed);
        let violated = v.check_prime_claims(3, 3).unwrap();
        assert!(violated.passed);
        let finding = violated.finding.unwrap();
        assert_eq!((finding.energy.as_str(), finding.residue.as_str()), ("1", "1"));
        let holds = v.check_prime_claims(2, 4).unwrap();
        assert!(holds.passed && holds.finding.is_none());
        assert_eq!(v.check_prime_claims(9, 3).unwrap_err(), Error::NotPrime(9));
        let wrapped = v.run(Task::PrimeClaims { p: 9, other: 3 }).unwrap_err();
        assert_eq!(wrapped.to_string(), "prime-claims(p=9, other=3): 9 is not prime");
    }

    #[test]
    fn primality_examples() {
        let t = tables(100);
        let s = &t.sigma;
        assert!(is_prime_via_energy(5, s).unwrap());
        assert_eq!(diagonal_difference(5, s).unwrap(), 3);
        assert!(!is_prime_via_energy(6, s).unwrap());
        assert_eq!(diagonal_difference(6, s).unwrap(), -1);
        assert!(is_prime_via_energy(2, s).unwrap());
        assert_eq!(diagonal_difference(2, s).unwrap(), 0);
        assert!(is_prime_via_energy(1, s).is_err());
        assert!(is_prime_via_energy(101, s).unwrap_err().is_capacity());
    }

    #[test]
    fn empty_selection() {
        let t = tables(100);
        let config = SuiteConfig { suites: BTreeSet::new(), ..SuiteConfig::default() };
        let report = run_suite(&config, &t).unwrap();
        assert!(report.checks.is_empty());
        assert!(report.totals.is_empty());
        assert!(report.findings.is_empty());
        assert_eq!(report.failure_count(), 0);
    }

    #[test]
    fn capacity_errors_name_the_check() {
        let t = tables(10);
        let config =
            SuiteConfig { suites: [IdentityId::Diagonal].into_iter().collect(), samples: 0, ..SuiteConfig::default() };
        let err = run_suite(&config, &t).unwrap_err();
        assert!(err.is_capacity());
        assert!(err.to_string().starts_with("diagonal(n=11)"), "{err}");
    }
}
