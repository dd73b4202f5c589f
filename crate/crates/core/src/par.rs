//! Data-parallel plumbing with a sequential fallback.
//!
//! With the `parallel` feature (default) independent jobs run on a rayon
//! pool; without it everything runs on the calling thread. Outputs are
//! always returned in input order, so callers never observe scheduling.

/// Kernel implementation used for a single walk's coin and shift.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum KernelMode {
    #[default]
    Sequential,
    #[cfg(feature = "parallel")]
    Parallel,
}

/// True when the crate was built with rayon support.
pub const fn parallel_enabled() -> bool {
    cfg!(feature = "parallel")
}

/// Apply `f` to every item, preserving order.
///
/// `jobs` caps the worker count; `None` uses the available parallelism and
/// `Some(1)` runs sequentially.
pub fn map_ordered<T, R, F>(items: &[T], jobs: Option<usize>, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        if jobs != Some(1) && items.len() > 1 {
            let run = || items.par_iter().map(&f).collect::<Vec<_>>();
            return match jobs {
                Some(j) => match rayon::ThreadPoolBuilder::new().num_threads(j).build() {
                    Ok(pool) => pool.install(run),
                    Err(_) => run(),
                },
                None => run(),
            };
        }
    }
    let _ = jobs;
    items.iter().map(f).collect()
}

/// Worker count used when none is requested.
pub fn default_jobs() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}
