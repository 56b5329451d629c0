//! Switchboard between the rayon and sequential execution paths.
//!
//! The `parallel` feature compiles the rayon path in; a process-wide runtime
//! toggle lets one binary (notably the benchmark suite) compare both paths.
//! Every data-parallel site in the crate goes through these helpers, so the
//! sequential fallback exercises identical code order and produces identical
//! results.

use std::sync::atomic::{AtomicBool, Ordering};

static PARALLEL: AtomicBool = AtomicBool::new(true);

/// Returns whether the parallel path is active (feature compiled in and the
/// runtime toggle is on).
pub fn parallel_enabled() -> bool {
    cfg!(feature = "parallel") && PARALLEL.load(Ordering::Relaxed)
}

/// Flips the runtime toggle; returns the previous value. A no-op (always
/// sequential) when the `parallel` feature is compiled out.
pub fn set_parallel(on: bool) -> bool {
    PARALLEL.swap(on, Ordering::Relaxed)
}

/// Maps `f` over `items`, preserving order.
pub fn map_vec<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if parallel_enabled() {
            use rayon::prelude::*;
            return items.into_par_iter().map(f).collect();
        }
    }
    items.into_iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_paths_agree() {
        let items: Vec<u64> = (0..1000).collect();
        let was = set_parallel(true);
        let a = map_vec(items.clone(), |x| x * x + 1);
        set_parallel(false);
        let b = map_vec(items, |x| x * x + 1);
        set_parallel(was);
        assert_eq!(a, b);
    }
}
