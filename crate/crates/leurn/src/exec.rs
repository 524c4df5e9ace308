use leurn_core::hpo::Executor;
use rayon::prelude::*;

/// Runs independent trainings on the rayon thread pool; results keep index order.
#[derive(Debug, Clone, Copy, Default)]
pub struct Rayon;

impl Executor for Rayon {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync,
    {
        (0..n).into_par_iter().map(&f).collect()
    }
}
