//! Running independent jobs either on the rayon pool or in a plain loop.
//!
//! Results always come back in input order, so callers see the same output
//! whichever path ran.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Execution {
    Sequential,
    /// Rayon's global pool. Sequential when the `parallel` feature is off.
    #[default]
    Parallel,
    /// A dedicated pool of the given size.
    Threads(usize),
}

impl Execution {
    /// `0` selects the global pool, `1` a plain loop.
    pub fn from_jobs(jobs: usize) -> Self {
        match jobs {
            0 => Execution::Parallel,
            1 => Execution::Sequential,
            n => Execution::Threads(n),
        }
    }
}

/// Map `f` over `items`, preserving order.
pub fn map_ordered<T, R, F>(exec: Execution, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match exec {
        Execution::Sequential => items.iter().map(f).collect(),
        Execution::Parallel => parallel::map(items, f),
        Execution::Threads(n) => parallel::map_in_pool(n, items, f),
    }
}

#[cfg(feature = "parallel")]
mod parallel {
    use rayon::prelude::*;

    pub fn map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
        items.par_iter().map(f).collect()
    }

    pub fn map_in_pool<T: Sync, R: Send>(
        threads: usize,
        items: &[T],
        f: impl Fn(&T) -> R + Sync + Send,
    ) -> Vec<R> {
        match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
            Ok(pool) => pool.install(|| map(items, f)),
            Err(e) => {
                log::warn!("could not build a {threads}-thread pool ({e}); using the global pool");
                map(items, f)
            }
        }
    }
}

#[cfg(not(feature = "parallel"))]
mod parallel {
    pub fn map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
        items.iter().map(f).collect()
    }

    pub fn map_in_pool<T: Sync, R: Send>(
        _threads: usize,
        items: &[T],
        f: impl Fn(&T) -> R + Sync + Send,
    ) -> Vec<R> {
        map(items, f)
    }
}
