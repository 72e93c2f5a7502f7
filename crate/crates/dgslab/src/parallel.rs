//! Seeded fan-out. Work is cut into fixed chunks, chunk `i` draws from
//! `rng::stream(seed, i)`, and results come back in chunk order, so output does not
//! depend on the number of threads.

use dgslab_core::rng::{self, DgsRng};
use rayon::prelude::*;

pub const CHUNK: u64 = 1000;

/// Stream reserved for one-off preparation work.
pub const PREPARE_STREAM: u64 = u64::MAX;

pub fn prepare_rng(seed: u64) -> DgsRng {
    rng::stream(seed, PREPARE_STREAM)
}

/// Runs `work(chunk_index, len, rng)` over `total` items cut into chunks of `chunk`.
pub fn chunked<T, E, F>(total: u64, chunk: u64, seed: u64, work: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(u64, u64, &mut DgsRng) -> Result<T, E> + Sync,
{
    let chunk = chunk.max(1);
    let chunks = total.div_ceil(chunk);
    (0..chunks)
        .into_par_iter()
        .map(|i| {
            let len = chunk.min(total - i * chunk);
            work(i, len, &mut rng::stream(seed, i))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn draw(threads: usize) -> Vec<Vec<u32>> {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            chunked::<_, (), _>(2500, 1000, 9, |_, len, rng| Ok((0..len).map(|_| rng.gen()).collect())).unwrap()
        })
    }

    #[test]
    fn output_is_independent_of_thread_count() {
        let a = draw(1);
        assert_eq!(a.iter().map(Vec::len).collect::<Vec<_>>(), [1000, 1000, 500]);
        assert_eq!(a, draw(3));
    }
}
