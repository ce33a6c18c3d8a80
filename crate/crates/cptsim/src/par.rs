use cptsim_core::exec::Executor;
use rayon::prelude::*;

/// Runs loop bodies on the global rayon pool. Results keep index order, so
/// output is identical to [`cptsim_core::exec::Sequential`].
#[derive(Debug, Clone, Copy, Default)]
pub struct Rayon;

impl Executor for Rayon {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..n).into_par_iter().map(f).collect()
    }
}
