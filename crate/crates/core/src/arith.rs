//! Exact integer primitives shared by every evaluation route.
//!
//! Energies and intermediate products (`m * n`, `K * (K + 1)`) are carried in
//! [`WideInt`]; public inputs are capped at [`INPUT_CAP`] so that `m * n`
//! stays below `2^126`. Every operation is either exact or reports
//! [`Error::Overflow`].

use num_integer::Integer;

use crate::{Error, Result};

/// Nonnegative 128-bit working integer for energies and products.
pub type WideInt = u128;

/// Signed companion used for negative arguments and diagonal differences.
pub type SignedInt = i128;

/// Largest accepted `m` or `n`: `2^63 - 1`.
pub const INPUT_CAP: u64 = i64::MAX as u64;

/// Euclidean remainder `n - k * floor(n / k)`, always in `0..k`.
///
/// Panics if `k == 0`.
pub fn euclid_mod(n: SignedInt, k: u64) -> u64 {
    assert!(k >= 1, "modulus must be positive");
    n.rem_euclid(k as i128) as u64
}

/// `a + (a + 1) + ... + b` by the closed form `(b(b+1) - (a-1)a) / 2`.
pub fn range_sum(a: u64, b: u64) -> Result<WideInt> {
    if a == 0 || a > b {
        return Err(Error::InvalidInput(format!("range_sum needs 1 <= a <= b, got [{a}, {b}]")));
    }
    let (a, b) = (a as u128, b as u128);
    let upper = b.checked_mul(b + 1).ok_or(Error::Overflow("range_sum upper product"))?;
    let lower = (a - 1) * a;
    Ok((upper - lower) / 2)
}

/// `m (m - 1) / 2`, the largest value `E_m(n)` can take.
pub fn max_energy(m: u64) -> WideInt {
    let m = m as u128;
    m * m.saturating_sub(1) / 2
}

/// `lcm(1, 2, ..., m)` together with its `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LcmValue {
    pub m: u64,
    pub value: WideInt,
}

impl LcmValue {
    pub fn is_divisible_by(&self, k: u64) -> bool {
        k != 0 && self.value.is_multiple_of(k as u128)
    }
}

/// `lcm(1, ..., m)` by iterated gcd reduction. Fails with `Overflow` instead
/// of saturating once the value leaves 128 bits (first at `m = 89`).
pub fn lcm_upto(m: u64) -> Result<LcmValue> {
    if m == 0 {
        return Err(Error::InvalidInput("lcm_upto needs m >= 1".into()));
    }
    let mut value: u128 = 1;
    for k in 2..=m as u128 {
        let g = value.gcd(&k);
        value = (value / g).checked_mul(k).ok_or(Error::Overflow("lcm(1..m) exceeds 128 bits"))?;
    }
    Ok(LcmValue { m, value })
}

pub(crate) fn check_input(what: &'static str, v: u64) -> Result<()> {
    if v > INPUT_CAP {
        return Err(Error::InvalidInput(format!("{what} = {v} exceeds 2^63 - 1")));
    }
    Ok(())
}
