use std::sync::atomic::{AtomicI64, Ordering};

use super::rating_map::FixedCapacityRatingMap;
use crate::EdgeWeight;

/// One shared array of `n` rating accumulators. Workers add into it
/// atomically; the worker that raises an entry from zero records its index
/// in its own nonzero list, so the union of the lists names every nonzero
/// entry exactly once.
#[derive(Debug)]
pub struct SparseRatingArray {
    dense: Vec<AtomicI64>,
}

impl SparseRatingArray {
    pub fn new(n: usize) -> Self {
        Self { dense: (0..n).map(|_| AtomicI64::new(0)).collect() }
    }

    pub fn len(&self) -> usize {
        self.dense.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dense.is_empty()
    }

    pub fn memory_bytes(&self) -> usize {
        self.dense.len() * 8
    }

    #[inline]
    pub fn get(&self, c: u32) -> EdgeWeight {
        self.dense[c as usize].load(Ordering::Relaxed)
    }

    /// Adds `w` to entry `c`; returns `true` if this call made it nonzero.
    #[inline]
    pub fn add(&self, c: u32, w: EdgeWeight) -> bool {
        self.dense[c as usize].fetch_add(w, Ordering::Relaxed) == 0
    }

    /// Zeroes the listed entries and empties the lists.
    pub fn reset<'a>(&self, lists: impl IntoIterator<Item = &'a mut Vec<u32>>) {
        for list in lists {
            for c in list.drain(..) {
                self.dense[c as usize].store(0, Ordering::Relaxed);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.dense.iter().all(|a| a.load(Ordering::Relaxed) == 0)
    }
}

/// Moves every rating of `r` into `a`, recording newly nonzero clusters in
/// the flushing worker's `list`, and clears `r`.
pub fn flush_rating_map(a: &SparseRatingArray, r: &mut FixedCapacityRatingMap, list: &mut Vec<u32>) {
    for (c, w) in r.iter() {
        if a.add(c, w) {
            list.push(c);
        }
    }
    r.clear();
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Barrier;

    #[test]
    fn concurrent_flushes_track_each_cluster_once() {
        for _ in 0..200 {
            let a = SparseRatingArray::new(8);
            let barrier = Barrier::new(2);
            let lists: Vec<Vec<u32>> = std::thread::scope(|s| {
                let h: Vec<_> = [3i64, 4]
                    .into_iter()
                    .map(|w| {
                        let (a, barrier) = (&a, &barrier);
                        s.spawn(move || {
                            let mut r = FixedCapacityRatingMap::new(4);
                            assert!(r.add(5, w));
                            let mut list = Vec::new();
                            barrier.wait();
                            flush_rating_map(a, &mut r, &mut list);
                            assert!(r.is_empty());
                            list
                        })
                    })
                    .collect();
                h.into_iter().map(|h| h.join().unwrap()).collect()
            });
            assert_eq!(a.get(5), 7);
            assert_eq!(lists.iter().map(|l| l.len()).sum::<usize>(), 1);
        }
    }

    #[test]
    fn empty_flush_is_a_no_op() {
        let a = SparseRatingArray::new(4);
        let mut r = FixedCapacityRatingMap::new(4);
        let mut list = Vec::new();
        flush_rating_map(&a, &mut r, &mut list);
        assert!(list.is_empty() && a.is_zero());
    }

    #[test]
    fn sequential_flushes_and_reset() {
        let a = SparseRatingArray::new(4);
        let mut r = FixedCapacityRatingMap::new(4);
        let mut list = Vec::new();
        assert!(r.add(1, 1));
        flush_rating_map(&a, &mut r, &mut list);
        assert!(r.add(2, 2));
        flush_rating_map(&a, &mut r, &mut list);
        list.sort();
        assert_eq!(list, vec![1, 2]);
        a.reset([&mut list]);
        assert!(a.is_zero() && list.is_empty());
    }
}
