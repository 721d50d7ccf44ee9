//! Deterministic fan-out of Monte Carlo work.
//!
//! A run is split into a fixed number of streams, independent of the worker
//! count. Stream `k` draws `budget/STREAMS` samples (the first `budget %
//! STREAMS` streams take one more) from `RngStream::new(seed, base + k)`,
//! and results are collected in stream order. Thread count therefore
//! changes speed only, never output.

use betadt::sampler::RngStream;
use rayon::prelude::*;
use rayon::ThreadPool;
use std::sync::OnceLock;

use crate::error::Result;

pub const STREAMS: u64 = 64;

/// Environment variable overriding the worker count.
pub const THREADS_ENV: &str = "BDL_THREADS";

pub fn worker_count() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn pool() -> &'static ThreadPool {
    static POOL: OnceLock<ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(worker_count())
            .build()
            .expect("thread pool")
    })
}

/// Number of samples stream `k` draws out of `budget`.
pub fn stream_share(budget: u64, k: u64) -> u64 {
    budget / STREAMS + u64::from(k < budget % STREAMS)
}

/// Runs `f(rng, n)` on each stream and returns the results in stream order.
pub fn run_streams<T, F>(seed: u64, base: u64, budget: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut RngStream, u64) -> Result<T> + Sync,
{
    pool().install(|| {
        (0..STREAMS)
            .into_par_iter()
            .map(|k| {
                let mut rng = RngStream::new(seed, base + k);
                f(&mut rng, stream_share(budget, k))
            })
            .collect()
    })
}

/// Maps `f` over `items` in parallel, keeping input order.
pub fn par_map<I, T, F>(items: &[I], f: F) -> Result<Vec<T>>
where
    I: Sync,
    T: Send,
    F: Fn(&I) -> Result<T> + Sync,
{
    pool().install(|| items.par_iter().map(&f).collect())
}
