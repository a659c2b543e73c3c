//! Sequential or data-parallel evaluation over index ranges.
//!
//! With the `parallel` feature (on by default) [`Execution::Parallel`] runs on
//! the rayon pool; without it, every mode runs sequentially. Either way the
//! results are identical: filters keep index order and minima break ties by
//! the lowest index.

use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// Whether this mode actually runs in parallel in the current build.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Applies `f` to every index in `0..total`, keeping the `Some` results in
/// index order.
pub fn filter_map_range<T, F>(exec: Execution, total: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<Option<T>> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return (0..total).into_par_iter().filter_map(|i| f(i).transpose()).collect();
    }
    let _ = exec;
    (0..total).filter_map(|i| f(i).transpose()).collect()
}

/// The smallest `(key(i), i)` over `0..total`.
pub fn min_by_key_range<K, F>(exec: Execution, total: usize, key: F) -> Result<Option<(K, usize)>>
where
    K: Ord + Send,
    F: Fn(usize) -> Result<K> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return (0..total)
            .into_par_iter()
            .map(|i| key(i).map(|k| (k, i)))
            .try_reduce_with(|a, b| Ok(std::cmp::min(a, b)))
            .transpose();
    }
    let _ = exec;
    let mut best: Option<(K, usize)> = None;
    for i in 0..total {
        let candidate = (key(i)?, i);
        if best.as_ref().is_none_or(|b| candidate < *b) {
            best = Some(candidate);
        }
    }
    Ok(best)
}

/// `items.map(f)` preserving order.
pub fn map_slice<T, U, F>(exec: Execution, items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    let _ = exec;
    items.iter().map(f).collect()
}
