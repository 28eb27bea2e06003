//! Order-preserving fan-out. Uses rayon when the `parallel` feature is on and
//! falls back to a plain loop otherwise.

use serde::{Deserialize, Serialize};

/// How many workers a batch may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Parallelism {
    Sequential,
    /// A dedicated pool with this many threads.
    Threads(usize),
    /// Rayon's global pool.
    #[default]
    Auto,
}

impl Parallelism {
    pub fn workers(n: usize) -> Self {
        if n <= 1 {
            Parallelism::Sequential
        } else {
            Parallelism::Threads(n)
        }
    }
}

/// Maps `f` over `items`, returning results in input order regardless of
/// completion order.
pub fn map<T, R, F>(items: &[T], parallelism: Parallelism, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        match parallelism {
            Parallelism::Sequential => items.iter().map(f).collect(),
            Parallelism::Auto => items.par_iter().map(f).collect(),
            Parallelism::Threads(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
                Ok(pool) => pool.install(|| items.par_iter().map(&f).collect()),
                Err(e) => {
                    log::warn!("thread pool unavailable ({e}); running sequentially");
                    items.iter().map(f).collect()
                }
            },
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = parallelism;
        items.iter().map(f).collect()
    }
}

/// True when this build can actually run work concurrently.
pub const fn is_parallel_build() -> bool {
    cfg!(feature = "parallel")
}
