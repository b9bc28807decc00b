use convfuse_core::training::Executor;
use convfuse_core::Result;
use rayon::prelude::*;

/// Fans per-index work out over the rayon pool. Results come back in index
/// order, so reductions over them match [`convfuse_core::training::Sequential`]
/// bit for bit.
#[derive(Debug, Clone, Copy, Default)]
pub struct Rayon;

impl Executor for Rayon {
    fn map<T, F>(&self, n: usize, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(usize) -> Result<T> + Sync + Send,
    {
        (0..n).into_par_iter().map(f).collect()
    }
}
