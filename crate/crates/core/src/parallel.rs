//! Batch execution policy.
//!
//! Independent work items (convergence rows, sweep points, large cellwise loops) go
//! through [`map`] and [`for_each_chunk`]. With the `parallel` feature they run on the
//! rayon pool unless [`Execution::Sequential`] is requested; without the feature
//! everything runs sequentially.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Execution {
    Sequential,
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

impl Execution {
    /// Whether work will actually be spread over threads.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Cellwise loops below this many unknowns stay on the calling thread.
pub const CELLWISE_THRESHOLD: usize = 1 << 14;

pub fn map<T, R, F>(exec: Execution, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if exec.is_parallel() {
            use rayon::prelude::*;
            return items.par_iter().map(f).collect();
        }
    }
    let _ = exec;
    items.iter().map(f).collect()
}

/// Calls `f(chunk_index, chunk)` for each `chunk`-sized piece of `data`.
pub fn for_each_chunk<F>(exec: Execution, data: &mut [f64], chunk: usize, f: F)
where
    F: Fn(usize, &mut [f64]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if exec.is_parallel() && data.len() >= CELLWISE_THRESHOLD {
            use rayon::prelude::*;
            data.par_chunks_mut(chunk)
                .enumerate()
                .for_each(|(i, c)| f(i, c));
            return;
        }
    }
    let _ = exec;
    for (i, c) in data.chunks_mut(chunk).enumerate() {
        f(i, c);
    }
}
