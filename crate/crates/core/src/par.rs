//! Execution policy for the data-parallel scans.
//!
//! Every hot loop in the crate (word enumeration, atom generation, cylinder
//! scans) goes through [`Exec`]. With the `parallel` feature disabled the
//! parallel policy silently degrades to the sequential one, so results are
//! identical either way: all reductions are order-preserving.

use std::ops::Range;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Exec {
    Sequential,
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

impl Exec {
    /// Order-preserving map over a slice.
    pub fn map<T, U, F>(self, items: &[T], f: F) -> Vec<U>
    where
        T: Sync,
        U: Send,
        F: Fn(&T) -> U + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => items.par_iter().map(f).collect(),
            _ => items.iter().map(f).collect(),
        }
    }

    /// Order-preserving map over an index range.
    pub fn map_range<U, F>(self, range: Range<usize>, f: F) -> Vec<U>
    where
        U: Send,
        F: Fn(usize) -> U + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => range.into_par_iter().map(f).collect(),
            _ => range.map(f).collect(),
        }
    }

    pub fn sort_f64(self, values: &mut [f64]) {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => values.par_sort_unstable_by(f64::total_cmp),
            _ => values.sort_unstable_by(f64::total_cmp),
        }
    }

    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }
}

/// Sizes the global worker pool. Returns `false` if the pool was already
/// initialised (or the crate was built without the `parallel` feature).
pub fn configure_threads(threads: usize) -> bool {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .is_ok()
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_policies_agree() {
        let items: Vec<u64> = (0..1000).collect();
        let seq = Exec::Sequential.map(&items, |x| x * x + 1);
        let par = Exec::Parallel.map(&items, |x| x * x + 1);
        assert_eq!(seq, par);
        assert_eq!(
            Exec::Sequential.map_range(0..50, |i| i * 3),
            Exec::Parallel.map_range(0..50, |i| i * 3)
        );
    }

    #[test]
    fn sort_is_total() {
        let mut v = vec![3.0, -1.0, 2.5, 0.0];
        Exec::default().sort_f64(&mut v);
        assert_eq!(v, vec![-1.0, 0.0, 2.5, 3.0]);
    }
}
