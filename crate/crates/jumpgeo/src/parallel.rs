//! Replica-level data parallelism with a sequential fallback.
//!
//! All Monte Carlo drivers fan out over replicas through [`replica_map`].
//! With the `parallel` feature (default) the map runs on rayon; without it,
//! the sequential loop in [`replica_map_seq`] is used. Both produce results
//! in replica order, and replicas draw from independent seed streams, so the
//! output is identical either way.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map `f` over replica indices `0..n`, preserving order.
pub fn replica_map<T, F>(n: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        replica_map_seq(n, f)
    }
}

/// Sequential reference implementation of [`replica_map`]. Always available;
/// the bench suite compares it against the rayon path.
pub fn replica_map_seq<T, F>(n: u64, f: F) -> Vec<T>
where
    F: Fn(u64) -> T,
{
    (0..n).map(f).collect()
}

/// Configure the rayon global pool size. Returns the effective thread count.
///
/// A no-op returning 1 when the `parallel` feature is off. Calling it twice
/// keeps the first configuration (rayon's global pool can only be built
/// once); that is fine for the CLI, which calls it before any work.
pub fn set_threads(n: usize) -> usize {
    #[cfg(feature = "parallel")]
    {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
        rayon::current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = n;
        1
    }
}
