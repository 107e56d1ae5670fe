//! Fan-out execution for independent work items: batteries of runs and
//! multistart optimization seeds.
//!
//! With the `parallel` feature (default) [`map_collect`] spreads items
//! over the rayon pool; without it the call degrades to the sequential
//! loop. [`map_collect_seq`] is always available so benchmarks can
//! compare the two paths in one build. Output order matches input order
//! either way, which keeps reductions over the results deterministic.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Apply `f` to every item, in parallel when the `parallel` feature is on.
#[cfg(feature = "parallel")]
pub fn map_collect<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    items.into_par_iter().map(f).collect()
}

/// Apply `f` to every item, in parallel when the `parallel` feature is on.
#[cfg(not(feature = "parallel"))]
pub fn map_collect<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    map_collect_seq(items, f)
}

/// Sequential fallback, always compiled.
pub fn map_collect_seq<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    F: Fn(T) -> U,
{
    items.into_iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_and_sequential_agree_and_preserve_order() {
        let items: Vec<u64> = (0..64).collect();
        let f = |x: u64| x * x + 1;
        assert_eq!(map_collect(items.clone(), f), map_collect_seq(items, f));
    }
}
