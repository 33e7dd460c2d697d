//! Replication runner. Every replication owns its RNG stream, so results
//! do not depend on how replications are spread over threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// How replications are executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Rayon with `workers` threads (0 = rayon's default). Without the
    /// `parallel` feature this runs sequentially.
    Parallel { workers: usize },
}

impl Execution {
    /// `1` means sequential; anything else is parallel with that many
    /// threads, `0` meaning "all available".
    pub fn from_workers(workers: usize) -> Self {
        if workers == 1 {
            Execution::Sequential
        } else {
            Execution::Parallel { workers }
        }
    }
}

/// RNG for replication `rep`: the base seed selects the key and the
/// replication index selects an independent ChaCha stream.
pub fn rep_rng(base_seed: u64, rep: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
    rng.set_stream(rep);
    rng
}

/// Derive a seed for the `index`-th sub-experiment (e.g. one value of a
/// parameter grid) from a base seed.
pub fn sub_seed(base_seed: u64, index: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = base_seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `f(0), ..., f(reps - 1)` in replication order.
pub fn map_reps<T, F>(exec: Execution, reps: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match exec {
        Execution::Sequential => (0..reps).map(f).collect(),
        Execution::Parallel { workers } => parallel_map(workers, reps, f),
    }
}

#[cfg(feature = "parallel")]
fn parallel_map<T, F>(workers: usize, reps: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;

    let run = || (0..reps).into_par_iter().map(&f).collect();
    if workers == 0 {
        return run();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(run),
        Err(_) => run(),
    }
}

#[cfg(not(feature = "parallel"))]
fn parallel_map<T, F>(_workers: usize, reps: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..reps).map(f).collect()
}
