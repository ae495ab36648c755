//! Data-parallel execution helpers.
//!
//! `map_indexed` fans independent work items out over rayon when the
//! `parallel` feature is enabled and degrades to a plain loop otherwise.
//! Results come back in index order either way, so reductions that fold
//! the returned vector sequentially are bit-identical across feature
//! choices and thread counts. `map_indexed_seq` is always sequential and
//! exists for benchmarks and determinism tests.

#[cfg(feature = "parallel")]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}

/// Sequential reference path with the same contract as [`map_indexed`].
pub fn map_indexed_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

/// Requests a fixed worker count for the global pool. Returns `false` if
/// the pool was already initialized or the crate was built without the
/// `parallel` feature.
#[cfg(feature = "parallel")]
pub fn set_workers(n: usize) -> bool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .is_ok()
}

#[cfg(not(feature = "parallel"))]
pub fn set_workers(_n: usize) -> bool {
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_and_sequential_agree() {
        let par = map_indexed(257, |i| (i as u64).wrapping_mul(0x9e3779b97f4a7c15));
        let seq = map_indexed_seq(257, |i| (i as u64).wrapping_mul(0x9e3779b97f4a7c15));
        assert_eq!(par, seq);
    }
}
