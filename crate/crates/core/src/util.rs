use std::sync::atomic::{AtomicBool, AtomicI64, AtomicU32, Ordering};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::NodeId;

pub(crate) fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub(crate) fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Pseudorandom tie-break key for candidate `c` of vertex `u`.
pub(crate) fn tie_key(seed: u64, round: u64, u: NodeId, c: u32) -> u64 {
    splitmix64(splitmix64(splitmix64(seed ^ round.rotate_left(32)) ^ u as u64) ^ c as u64)
}

pub(crate) fn random_permutation(n: usize, seed: u64) -> Vec<NodeId> {
    let mut order: Vec<NodeId> = (0..n as NodeId).collect();
    order.shuffle(&mut rng(seed));
    order
}

const _: () = assert!(std::mem::align_of::<AtomicU32>() == std::mem::align_of::<u32>());
const _: () = assert!(std::mem::align_of::<AtomicI64>() == std::mem::align_of::<i64>());

pub(crate) fn as_atomic_u32(slice: &mut [u32]) -> &[AtomicU32] {
    // SAFETY: same size and alignment (asserted above); the exclusive borrow
    // guarantees no non-atomic access while the atomic view is alive.
    unsafe { &*(slice as *mut [u32] as *const [AtomicU32]) }
}

pub(crate) fn as_atomic_i64(slice: &mut [i64]) -> &[AtomicI64] {
    // SAFETY: see `as_atomic_u32`.
    unsafe { &*(slice as *mut [i64] as *const [AtomicI64]) }
}

/// Adds `delta` to `counter` unless the result would exceed `limit`.
pub(crate) fn try_reserve(counter: &AtomicI64, delta: i64, limit: i64) -> bool {
    let mut cur = counter.load(Ordering::Relaxed);
    loop {
        if cur + delta > limit {
            return false;
        }
        match counter.compare_exchange_weak(cur, cur + delta, Ordering::AcqRel, Ordering::Relaxed) {
            Ok(_) => return true,
            Err(actual) => cur = actual,
        }
    }
}

/// Test-and-test-and-set latch. Yields after a short spin so that
/// oversubscribed pools make progress.
#[derive(Debug, Default)]
pub(crate) struct SpinLatch(AtomicBool);

impl SpinLatch {
    pub(crate) fn lock(&self) -> SpinGuard<'_> {
        let mut spins = 0u32;
        loop {
            if !self.0.load(Ordering::Relaxed)
                && self
                    .0
                    .compare_exchange_weak(false, true, Ordering::Acquire, Ordering::Relaxed)
                    .is_ok()
            {
                return SpinGuard(self);
            }
            spins += 1;
            if spins < 64 {
                std::hint::spin_loop();
            } else {
                std::thread::yield_now();
            }
        }
    }
}

pub(crate) struct SpinGuard<'a>(&'a SpinLatch);

impl Drop for SpinGuard<'_> {
    fn drop(&mut self) {
        (self.0).0.store(false, Ordering::Release);
    }
}

/// Runs `f` inside a rayon pool with exactly `workers` threads.
pub(crate) fn with_pool<R: Send>(workers: usize, f: impl FnOnce() -> R + Send) -> R {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .expect("failed to build worker pool");
    pool.install(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permutation_is_a_permutation() {
        let mut p = random_permutation(100, 7);
        assert_eq!(p, random_permutation(100, 7));
        p.sort_unstable();
        assert!(p.iter().enumerate().all(|(i, &v)| i as u32 == v));
    }

    #[test]
    fn reservation_respects_limit() {
        let c = AtomicI64::new(5);
        assert!(try_reserve(&c, 3, 8));
        assert!(!try_reserve(&c, 1, 8));
        assert_eq!(c.load(Ordering::Relaxed), 8);
    }
}
