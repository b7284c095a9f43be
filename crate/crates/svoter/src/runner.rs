//! Replica-level parallelism with deterministic aggregation.
//!
//! Each replica owns the stream derived from (master seed, label, index);
//! results come back in index order regardless of scheduling, so every
//! downstream fold is reproducible bit-for-bit.

use rayon::prelude::*;
use svoter_core::stream::{derive_stream, Stream};

/// Number of worker threads: explicit config, then SVOTER_THREADS, then
/// the rayon default.
pub fn thread_count(configured: Option<usize>) -> Option<usize> {
    configured.or_else(|| {
        std::env::var("SVOTER_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    })
}

/// Run `replicas` independent jobs in parallel; the result vector is in
/// replica order.
pub fn run_replicas<T, F>(
    master_seed: u64,
    label: &str,
    replicas: u64,
    threads: Option<usize>,
    job: F,
) -> Vec<T>
where
    T: Send,
    F: Fn(u64, Stream) -> T + Sync,
{
    let body = || {
        (0..replicas)
            .into_par_iter()
            .map(|replica| job(replica, derive_stream(master_seed, label, replica)))
            .collect()
    };
    match thread_count(threads) {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .expect("thread pool")
            .install(body),
        None => body(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn results_are_in_replica_order_and_thread_independent() {
        let run = |threads| {
            run_replicas(7, "order", 64, Some(threads), |replica, mut rng| {
                (replica, rng.gen::<u64>())
            })
        };
        let one = run(1);
        let four = run(4);
        assert_eq!(one, four);
        for (i, (replica, _)) in one.iter().enumerate() {
            assert_eq!(*replica, i as u64);
        }
    }
}
