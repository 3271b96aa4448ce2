//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature the `Parallel` mode maps over rayon's global
//! pool; without it every mode runs on the calling thread. Outputs are
//! always returned in input order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Execution mode for batch workloads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Parallelism {
    Sequential,
    /// Uses rayon when compiled with the `parallel` feature.
    #[default]
    Parallel,
}

impl Parallelism {
    /// Whether work will actually be spread across threads.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Parallelism::Parallel
    }
}

pub(crate) fn map_collect<T, R, F>(mode: Parallelism, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode.is_parallel() {
        return items.par_iter().map(f).collect();
    }
    let _ = mode;
    items.iter().map(f).collect()
}

/// Sum of `f(i)` over `lo..=hi`.
pub(crate) fn range_sum_u128<F>(mode: Parallelism, lo: u64, hi: u64, f: F) -> u128
where
    F: Fn(u64) -> u128 + Sync + Send,
{
    if lo > hi {
        return 0;
    }
    #[cfg(feature = "parallel")]
    if mode.is_parallel() {
        return (lo..=hi).into_par_iter().map(f).sum();
    }
    let _ = mode;
    (lo..=hi).map(f).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree() {
        let items: Vec<u64> = (0..1000).collect();
        let a = map_collect(Parallelism::Sequential, &items, |x| x * x);
        let b = map_collect(Parallelism::Parallel, &items, |x| x * x);
        assert_eq!(a, b);
        assert_eq!(
            range_sum_u128(Parallelism::Sequential, 1, 1000, |i| i as u128),
            range_sum_u128(Parallelism::Parallel, 1, 1000, |i| i as u128)
        );
        assert_eq!(range_sum_u128(Parallelism::Parallel, 5, 4, |i| i as u128), 0);
    }
}
