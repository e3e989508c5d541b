//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (default) independent work items are spread
//! over the rayon pool; without it, or with [`Execution::Sequential`], they
//! run in order on the calling thread. Results always come back in input
//! order, so output never depends on the execution mode.

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
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

/// Map `f` over `items`, preserving order.
pub fn map<T, R, F>(items: &[T], exec: Execution, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map(f).collect()
        }
        _ => items.iter().map(f).collect(),
    }
}

/// Fallible [`map`]; the first error in input order wins.
pub fn try_map<T, R, F>(items: &[T], exec: Execution, f: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> Result<R> + Sync + Send,
{
    map(items, exec, f).into_iter().collect()
}

/// Run `f` with at most `jobs` worker threads. `None` uses the global pool.
pub fn with_jobs<R, F>(jobs: Option<usize>, f: F) -> R
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    #[cfg(feature = "parallel")]
    if let Some(jobs) = jobs {
        match rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build() {
            Ok(pool) => return pool.install(f),
            Err(err) => log::warn!("could not build a {jobs}-thread pool: {err}"),
        }
    }
    #[cfg(not(feature = "parallel"))]
    let _ = jobs;
    f()
}

/// Number of worker threads the default execution mode will use.
pub fn available_workers() -> usize {
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree_and_keep_order() {
        let items: Vec<u64> = (0..500).collect();
        let seq = map(&items, Execution::Sequential, |x| x * x + 1);
        let par = map(&items, Execution::Parallel, |x| x * x + 1);
        assert_eq!(seq, par);
        assert_eq!(seq[7], 50);
    }

    #[test]
    fn try_map_reports_first_error() {
        let items: Vec<i32> = vec![1, 2, -3, 4, -5];
        let err = try_map(&items, Execution::Parallel, |&x| {
            if x < 0 {
                Err(crate::Error::InvalidInput(format!("{x}")))
            } else {
                Ok(x)
            }
        })
        .unwrap_err();
        assert_eq!(err, crate::Error::InvalidInput("-3".into()));
    }

    #[test]
    fn jobs_limit_runs_closure() {
        assert_eq!(with_jobs(Some(1), || 41 + 1), 42);
        assert_eq!(with_jobs(None, || 7), 7);
    }
}
