#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Execution strategy for the data-parallel inner loops.
///
/// Every loop that honours this setting writes disjoint output slices and
/// performs its reductions in a fixed order, so the two strategies produce
/// bit-identical results.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parallelism {
    Sequential,
    /// Uses the rayon global pool. Falls back to sequential execution when
    /// the crate is built without the `parallel` feature.
    Parallel,
}

impl Default for Parallelism {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Parallelism::Parallel
        } else {
            Parallelism::Sequential
        }
    }
}

impl Parallelism {
    /// Number of worker threads the strategy will use.
    pub fn threads(self) -> usize {
        match self {
            Parallelism::Sequential => 1,
            #[cfg(feature = "parallel")]
            Parallelism::Parallel => rayon::current_num_threads(),
            #[cfg(not(feature = "parallel"))]
            Parallelism::Parallel => 1,
        }
    }

    /// Runs `f(chunk_index, chunk, scratch)` on consecutive `chunk`-sized
    /// pieces of `data`. `init` builds per-worker scratch state.
    pub(crate) fn for_each_chunk<T, S, I, F>(self, data: &mut [T], chunk: usize, init: I, f: F)
    where
        T: Send,
        I: Fn() -> S + Sync + Send,
        F: Fn(usize, &mut [T], &mut S) + Sync + Send,
    {
        if chunk == 0 || data.is_empty() {
            return;
        }
        match self {
            #[cfg(feature = "parallel")]
            Parallelism::Parallel => {
                data.par_chunks_mut(chunk)
                    .enumerate()
                    .for_each_init(init, |scratch, (i, c)| f(i, c, scratch));
            }
            _ => {
                let mut scratch = init();
                for (i, c) in data.chunks_mut(chunk).enumerate() {
                    f(i, c, &mut scratch);
                }
            }
        }
    }

    /// Evaluates `f` over `0..n` and collects results in index order.
    pub(crate) fn map_range<R, F>(self, n: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Parallelism::Parallel => (0..n).into_par_iter().map(f).collect(),
            _ => (0..n).map(f).collect(),
        }
    }
}
