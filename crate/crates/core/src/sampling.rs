//! Deterministic random streams and order-stable parallel chunking.
//!
//! Every Monte Carlo routine splits its budget into fixed chunks. Chunk `i`
//! draws from ChaCha stream `i` of the caller's seed, and results come back
//! in chunk order, so the reduction never depends on the thread schedule.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Generator for one chunk of work.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Derives an independent seed for a named sub-task (SplitMix64 over the label).
pub fn derive_seed(seed: u64, label: &str) -> u64 {
    let mut h = seed ^ 0x9E37_79B9_7F4A_7C15;
    for b in label.bytes() {
        h = splitmix(h ^ u64::from(b));
    }
    splitmix(h)
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Runs `f(chunk_index, start, len)` over `total` items split into chunks of
/// `chunk` items, in parallel, returning results in chunk order.
pub fn par_chunks<T, F>(total: usize, chunk: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, usize, usize) -> T + Sync + Send,
{
    let chunk = chunk.max(1);
    let n_chunks = total.div_ceil(chunk);
    (0..n_chunks)
        .into_par_iter()
        .map(|i| {
            let start = i * chunk;
            let len = chunk.min(total - start);
            f(i as u64, start, len)
        })
        .collect()
}
