use crate::{EdgeWeight, INVALID};

/// Open-addressing map from cluster IDs to accumulated ratings with a fixed
/// number of slots. It never grows: inserting a key that would bring the
/// number of distinct keys to `limit` is refused and left to the caller
/// (bump the vertex, or flush the map).
#[derive(Clone, Debug)]
pub struct FixedCapacityRatingMap {
    keys: Vec<u32>,
    values: Vec<EdgeWeight>,
    used: Vec<u32>,
    shift: u32,
    limit: usize,
}

impl FixedCapacityRatingMap {
    /// Map that accepts up to `limit - 1` distinct keys. The slot count is
    /// the smallest power of two `>= 2·limit`, so the load factor stays
    /// below one half.
    pub fn new(limit: usize) -> Self {
        let limit = limit.max(2);
        let capacity = (2 * limit).next_power_of_two();
        Self {
            keys: vec![INVALID; capacity],
            values: vec![0; capacity],
            used: Vec::with_capacity(limit),
            shift: 64 - capacity.trailing_zeros(),
            limit,
        }
    }

    pub fn capacity(&self) -> usize {
        self.keys.len()
    }

    pub fn limit(&self) -> usize {
        self.limit
    }

    pub fn len(&self) -> usize {
        self.used.len()
    }

    pub fn is_empty(&self) -> bool {
        self.used.is_empty()
    }

    pub fn memory_bytes(&self) -> usize {
        self.keys.len() * 4 + self.values.len() * 8 + self.used.capacity() * 4
    }

    #[inline]
    fn slot(&self, key: u32) -> usize {
        ((key as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15) >> self.shift) as usize
    }

    /// Adds `w` to the rating of `key`. Returns `false` without changing
    /// anything if `key` is new and the map is full.
    #[inline]
    #[must_use]
    pub fn add(&mut self, key: u32, w: EdgeWeight) -> bool {
        debug_assert_ne!(key, INVALID);
        let mask = self.keys.len() - 1;
        let mut i = self.slot(key);
        loop {
            let k = self.keys[i];
            if k == key {
                self.values[i] += w;
                return true;
            }
            if k == INVALID {
                if self.used.len() + 1 >= self.limit {
                    return false;
                }
                self.keys[i] = key;
                self.values[i] = w;
                self.used.push(i as u32);
                return true;
            }
            i = (i + 1) & mask;
        }
    }

    pub fn get(&self, key: u32) -> Option<EdgeWeight> {
        let mask = self.keys.len() - 1;
        let mut i = self.slot(key);
        loop {
            match self.keys[i] {
                INVALID => return None,
                k if k == key => return Some(self.values[i]),
                _ => i = (i + 1) & mask,
            }
        }
    }

    /// Entries in insertion order.
    pub fn iter(&self) -> impl Iterator<Item = (u32, EdgeWeight)> + '_ {
        self.used.iter().map(|&i| (self.keys[i as usize], self.values[i as usize]))
    }

    pub fn clear(&mut self) {
        for &i in &self.used {
            self.keys[i as usize] = INVALID;
        }
        self.used.clear();
    }
}
