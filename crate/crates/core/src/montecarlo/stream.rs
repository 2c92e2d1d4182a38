//! Per-worker random streams and the deterministic work split.

use std::ops::Range;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::McConfig;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stream of worker `worker` under `seed`: the key mixes both, and the generator's stream
/// id is the worker index, so no two workers share a keystream.
pub(crate) fn worker_rng(seed: u64, worker: usize) -> ChaCha8Rng {
    let key = splitmix64(seed ^ splitmix64(worker as u64));
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    rng.set_stream(worker as u64);
    rng
}

/// Contiguous replicate ranges, one per worker.
pub(crate) fn partition(total: usize, workers: usize) -> Vec<Range<usize>> {
    let workers = workers.max(1);
    let (base, extra) = (total / workers, total % workers);
    let mut start = 0;
    (0..workers)
        .map(|w| {
            let len = base + usize::from(w < extra);
            let r = start..start + len;
            start += len;
            r
        })
        .collect()
}

/// Runs `body(rng, replicates, acc)` on every worker and returns the accumulators in
/// worker order.
pub(crate) fn run_workers<A, I, F>(cfg: &McConfig, init: I, body: F) -> Vec<A>
where
    A: Send,
    I: Fn() -> A + Sync,
    F: Fn(&mut ChaCha8Rng, usize, &mut A) + Sync,
{
    let parts = partition(cfg.samples, cfg.workers);
    if parts.len() == 1 {
        let mut acc = init();
        body(&mut worker_rng(cfg.seed, 0), cfg.samples, &mut acc);
        return vec![acc];
    }
    std::thread::scope(|scope| {
        let handles: Vec<_> = parts
            .iter()
            .enumerate()
            .map(|(w, r)| {
                let (init, body) = (&init, &body);
                let len = r.len();
                scope.spawn(move || {
                    let mut acc = init();
                    body(&mut worker_rng(cfg.seed, w), len, &mut acc);
                    acc
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("Monte Carlo worker panicked")).collect()
    })
}
