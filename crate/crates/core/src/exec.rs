//! Evaluation strategy for embarrassingly parallel loops (spectrum grid points,
//! Jacobian columns). The core ships a sequential strategy; threaded ones live
//! in the std crate.

use alloc::vec::Vec;

pub trait Executor: Sync {
    /// Returns `[f(0), f(1), …, f(n-1)]` in index order.
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..n).map(f).collect()
    }
}
