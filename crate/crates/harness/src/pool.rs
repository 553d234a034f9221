//! Worker pool sized by the `SAGSIN_WORKERS` environment variable.

pub const WORKERS_ENV: &str = "SAGSIN_WORKERS";

/// Worker count from the environment; `None` means the rayon default.
pub fn worker_count() -> Option<usize> {
    std::env::var(WORKERS_ENV).ok()?.trim().parse().ok().filter(|&n| n > 0)
}

/// Runs `f` inside a pool of [`worker_count`] threads.
pub fn with_workers<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    with_worker_count(worker_count(), f)
}

pub fn with_worker_count<R: Send>(workers: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    match workers {
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n).build().expect("thread pool").install(f),
        None => f(),
    }
}
