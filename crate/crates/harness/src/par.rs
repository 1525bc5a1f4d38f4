//! Order-preserving map over independent jobs.

/// How replicates are scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

/// Applies `f` to every job and returns results in job order. Parallel
/// execution needs the `parallel` feature; without it this is sequential.
pub fn map_jobs<T, R, F>(jobs: Vec<T>, exec: Execution, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            jobs.into_par_iter().map(f).collect()
        }
        _ => jobs.into_iter().map(f).collect(),
    }
}
