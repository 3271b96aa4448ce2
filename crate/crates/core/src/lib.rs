//! Remainder sums ("modular energy")
//!
//! `E_m(n) = (n mod 1) + (n mod 2) + ... + (n mod m)`.
//!
//! The crate evaluates `E_m(n)` along several independent routes and checks
//! the known identities between them:
//!
//! * [`energy`]: direct summation, quotient-block grouping, block recursion
//!   in `n = qm + r`, the diagonal `E_n(n) = n^2 - sum sigma(d)` and the
//!   signed extension to negative arguments.
//! * [`sieve`]: smallest-prime-factor table, divisor enumeration, `sigma`,
//!   bounded divisor sums, the divisor-sum batch formula and the incremental
//!   finite-difference stream over consecutive `n`.
//! * [`identities`]: executable checks with counterexample witnesses,
//!   aggregated into a reproducible [`identities::VerificationReport`].
//!
//! Batch workloads (range streams, divisor batches, verification grids) run
//! on rayon when the `parallel` feature is enabled (the default) and fall
//! back to plain iterators otherwise. See [`Parallelism`].

pub mod arith;
pub mod energy;
mod error;
pub mod identities;
mod par;
pub mod sieve;

pub use arith::{euclid_mod, lcm_upto, range_sum, LcmValue, SignedInt, WideInt, INPUT_CAP};
pub use energy::{
    energy_auto, energy_block, energy_diagonal, energy_grouped, energy_naive, energy_signed, quotient_blocks,
    Algorithm, BlockDecomposition, EnergyQuery, QuotientBlock, NAIVE_THRESHOLD,
};
pub use error::{Error, Result};
pub use par::Parallelism;
pub use sieve::{
    build_spf, energy_divisor_batch, energy_range_incremental, summatory_sigma, DivisorList, EnergySeries, SpfTable,
    SummatorySigma,
};
