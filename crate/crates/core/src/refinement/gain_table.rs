//! Gain tables: cached affinities `ω(v, V_i)` of vertices to blocks.
//!
//! The sparse table stores a full row of `k` slots only for vertices with
//! `deg(v) > k`. Every other vertex gets a small linear-probing table holding
//! nonzero affinities only, so the table needs `O(Σ min(deg(v), k))` slots.
//! Each vertex's slots use the narrowest unsigned width (8/16/32/64 bits)
//! that can hold its weighted degree. All values live in one arena.

use std::sync::atomic::{AtomicBool, AtomicU16, AtomicU32, AtomicU64, AtomicU8, Ordering};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::GraphView;
use crate::util::SpinLatch;
use crate::{BlockId, EdgeWeight, NodeId, INVALID};

/// Which affinity cache FM refinement uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GainTableMode {
    /// Dense rows for `deg(v) > k`, tiny hash tables otherwise.
    Sparse,
    /// `k` slots for every vertex.
    Dense,
    /// No cache; affinities are recomputed from the neighborhood.
    None,
}

impl std::str::FromStr for GainTableMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sparse" => Ok(Self::Sparse),
            "dense" => Ok(Self::Dense),
            "none" => Ok(Self::None),
            _ => Err(Error::Domain(format!("unknown gain table mode {s:?} (expected sparse, dense or none)"))),
        }
    }
}

/// Smallest width `w ∈ {8, 16, 32, 64}` with `w > log₂(total)`, i.e. with
/// `total ≤ 2^w − 1`.
pub fn entry_width(total: u64) -> u32 {
    match total {
        0..=0xff => 8,
        0x100..=0xffff => 16,
        0x1_0000..=0xffff_ffff => 32,
        _ => 64,
    }
}

/// Number of slots a vertex gets: `k` for a dense row, otherwise enough for
/// every adjacent block (at most `deg`), but never more than `2·deg` and
/// below `k` whenever `deg < k`.
pub fn tiny_capacity(degree: usize, k: usize) -> usize {
    if degree < k {
        (2 * degree).min(k - 1)
    } else {
        k
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Descriptor {
    /// Byte offset of the value slots in the arena.
    value_offset: usize,
    /// Index of the first key slot (tiny tables only).
    key_offset: usize,
    capacity: u32,
    width_bytes: u8,
    dense: bool,
}

/// Size of a table.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Footprint {
    /// Value slots.
    pub entries: usize,
    /// All bytes: values, keys, descriptors and latches.
    pub bytes: usize,
}

#[derive(Debug)]
pub struct SparseGainTable {
    k: usize,
    arena: Vec<AtomicU64>,
    keys: Vec<AtomicU32>,
    descriptors: Vec<Descriptor>,
    latches: Vec<SpinLatch>,
}

#[inline]
fn hash_slot(block: BlockId, capacity: usize) -> usize {
    (((block as u64).wrapping_mul(0x9e37_79b9) & 0xffff_ffff) * capacity as u64 >> 32) as usize
}

impl SparseGainTable {
    /// Builds the table for `assignment` (blocks `< k`). With `dense_all`,
    /// every vertex gets a row of `k` slots.
    pub fn build<G: GraphView>(g: &G, assignment: &[BlockId], k: usize, dense_all: bool) -> Self {
        let n = g.n();
        let mut descriptors = Vec::with_capacity(n);
        let (mut bytes, mut keys) = (0usize, 0usize);
        for u in 0..n as NodeId {
            let degree = g.degree(u);
            let width_bytes = (entry_width(g.weighted_degree(u) as u64) / 8) as u8;
            let dense = dense_all || degree > k;
            let capacity = if dense { k } else { tiny_capacity(degree, k) };
            bytes = bytes.next_multiple_of(width_bytes as usize);
            descriptors.push(Descriptor {
                value_offset: bytes,
                key_offset: keys,
                capacity: capacity as u32,
                width_bytes,
                dense,
            });
            bytes += capacity * width_bytes as usize;
            if !dense {
                keys += capacity;
            }
        }
        let table = Self {
            k,
            arena: (0..bytes.div_ceil(8)).map(|_| AtomicU64::new(0)).collect(),
            keys: (0..keys).map(|_| AtomicU32::new(INVALID)).collect(),
            descriptors,
            latches: (0..n).map(|_| SpinLatch::default()).collect(),
        };
        (0..n as NodeId).into_par_iter().for_each(|u| {
            g.for_each_neighbor(u, |_, v, w| {
                table.add(u, assignment[v as usize], w).expect("capacity covers all adjacent blocks");
            });
        });
        table
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn width(&self, v: NodeId) -> u32 {
        self.descriptors[v as usize].width_bytes as u32 * 8
    }

    pub fn is_dense(&self, v: NodeId) -> bool {
        self.descriptors[v as usize].dense
    }

    pub fn capacity(&self, v: NodeId) -> usize {
        self.descriptors[v as usize].capacity as usize
    }

    pub fn memory_footprint(&self) -> Footprint {
        Footprint {
            entries: self.descriptors.iter().map(|d| d.capacity as usize).sum(),
            bytes: self.arena.len() * 8
                + self.keys.len() * 4
                + self.descriptors.len() * std::mem::size_of::<Descriptor>()
                + self.latches.len() * std::mem::size_of::<AtomicBool>(),
        }
    }

    #[inline]
    fn load(&self, d: &Descriptor, slot: usize) -> u64 {
        let off = d.value_offset + slot * d.width_bytes as usize;
        let base = self.arena.as_ptr() as *const u8;
        // SAFETY: `off` is inside the arena and aligned to the slot width,
        // and the arena is 8-byte aligned.
        unsafe {
            match d.width_bytes {
                1 => (*(base.add(off) as *const AtomicU8)).load(Ordering::Relaxed) as u64,
                2 => (*(base.add(off) as *const AtomicU16)).load(Ordering::Relaxed) as u64,
                4 => (*(base.add(off) as *const AtomicU32)).load(Ordering::Relaxed) as u64,
                _ => (*(base.add(off) as *const AtomicU64)).load(Ordering::Relaxed),
            }
        }
    }

    /// Wrapping add of `delta` into a slot; returns the new value.
    #[inline]
    fn fetch_add(&self, d: &Descriptor, slot: usize, delta: EdgeWeight) -> u64 {
        let off = d.value_offset + slot * d.width_bytes as usize;
        let base = self.arena.as_ptr() as *const u8;
        // SAFETY: see `load`.
        let (prev, new, bits) = unsafe {
            match d.width_bytes {
                1 => {
                    let p = (*(base.add(off) as *const AtomicU8)).fetch_add(delta as u8, Ordering::Relaxed);
                    (p as u64, p.wrapping_add(delta as u8) as u64, 8)
                }
                2 => {
                    let p = (*(base.add(off) as *const AtomicU16)).fetch_add(delta as u16, Ordering::Relaxed);
                    (p as u64, p.wrapping_add(delta as u16) as u64, 16)
                }
                4 => {
                    let p = (*(base.add(off) as *const AtomicU32)).fetch_add(delta as u32, Ordering::Relaxed);
                    (p as u64, p.wrapping_add(delta as u32) as u64, 32)
                }
                _ => {
                    let p = (*(base.add(off) as *const AtomicU64)).fetch_add(delta as u64, Ordering::Relaxed);
                    (p, p.wrapping_add(delta as u64), 64)
                }
            }
        };
        if cfg!(debug_assertions) {
            let exact = prev as i128 + delta as i128;
            assert!(exact >= 0 && exact < 1i128 << bits, "affinity {exact} does not fit {bits} bits");
        }
        new
    }

    #[inline]
    fn store(&self, d: &Descriptor, slot: usize, value: u64) {
        let cur = self.load(d, slot);
        self.fetch_add(d, slot, value.wrapping_sub(cur) as EdgeWeight);
    }

    /// Slot of `block` in tiny table `d`, if present.
    fn find(&self, d: &Descriptor, block: BlockId) -> Option<usize> {
        let cap = d.capacity as usize;
        if cap == 0 {
            return None;
        }
        let mut i = hash_slot(block, cap);
        for _ in 0..cap {
            match self.keys[d.key_offset + i].load(Ordering::Relaxed) {
                INVALID => return None,
                key if key == block => return Some(i),
                _ => i = if i + 1 == cap { 0 } else { i + 1 },
            }
        }
        None
    }

    /// `ω(v, V_block)`.
    #[inline]
    pub fn affinity(&self, v: NodeId, block: BlockId) -> EdgeWeight {
        let d = &self.descriptors[v as usize];
        if d.dense {
            return self.load(d, block as usize) as EdgeWeight;
        }
        match self.find(d, block) {
            Some(slot) => self.load(d, slot) as EdgeWeight,
            None => 0,
        }
    }

    /// Calls `f(block, affinity)` for every block with nonzero affinity.
    pub fn for_each_affinity(&self, v: NodeId, mut f: impl FnMut(BlockId, EdgeWeight)) {
        let d = &self.descriptors[v as usize];
        for slot in 0..d.capacity as usize {
            let block = if d.dense {
                slot as BlockId
            } else {
                match self.keys[d.key_offset + slot].load(Ordering::Relaxed) {
                    INVALID => continue,
                    key => key,
                }
            };
            let a = self.load(d, slot);
            if a != 0 {
                f(block, a as EdgeWeight);
            }
        }
    }

    /// Adds `delta` to `ω(v, V_block)`.
    pub fn add(&self, v: NodeId, block: BlockId, delta: EdgeWeight) -> Result<()> {
        let d = &self.descriptors[v as usize];
        if d.dense {
            self.fetch_add(d, block as usize, delta);
            return Ok(());
        }
        let _guard = self.latches[v as usize].lock();
        let cap = d.capacity as usize;
        match self.find(d, block) {
            Some(slot) => {
                if self.fetch_add(d, slot, delta) == 0 {
                    self.delete(d, slot);
                }
                Ok(())
            }
            None => {
                if delta < 0 {
                    return Err(Error::Internal(format!("negative affinity for vertex {v}, block {block}")));
                }
                if delta == 0 {
                    return Ok(());
                }
                let mut i = if cap == 0 { 0 } else { hash_slot(block, cap) };
                for _ in 0..cap {
                    if self.keys[d.key_offset + i].load(Ordering::Relaxed) == INVALID {
                        self.keys[d.key_offset + i].store(block, Ordering::Relaxed);
                        self.store(d, i, delta as u64);
                        return Ok(());
                    }
                    i = if i + 1 == cap { 0 } else { i + 1 };
                }
                Err(Error::Internal(format!("tiny gain table of vertex {v} is full")))
            }
        }
    }

    /// Empties `slot` and shifts later entries of the probe chain back so
    /// that no gaps remain.
    fn delete(&self, d: &Descriptor, slot: usize) {
        let cap = d.capacity as usize;
        let key = |i: usize| self.keys[d.key_offset + i].load(Ordering::Relaxed);
        let mut hole = slot;
        let mut j = slot;
        loop {
            j = if j + 1 == cap { 0 } else { j + 1 };
            if j == hole || key(j) == INVALID {
                break;
            }
            let home = hash_slot(key(j), cap);
            // The entry at j may fill the hole unless its home lies
            // cyclically in (hole, j].
            let stays = if hole <= j { hole < home && home <= j } else { hole < home || home <= j };
            if stays {
                continue;
            }
            self.keys[d.key_offset + hole].store(key(j), Ordering::Relaxed);
            self.store(d, hole, self.load(d, j));
            hole = j;
        }
        self.keys[d.key_offset + hole].store(INVALID, Ordering::Relaxed);
        self.store(d, hole, 0);
    }

    /// Updates the neighbors of `u` after it moved from `from` to `to`.
    pub fn apply_move_update<G: GraphView>(&self, g: &G, u: NodeId, from: BlockId, to: BlockId) -> Result<()> {
        if from == to {
            return Err(Error::Precondition(format!("vertex {u} moved from block {from} to itself")));
        }
        let mut result = Ok(());
        g.for_each_neighbor(u, |_, v, w| {
            if result.is_ok() {
                result = self.add(v, from, -w).and_then(|_| self.add(v, to, w));
            }
        });
        result
    }

    /// Tiny tables contain no zero entries and every probe chain is
    /// contiguous from the key's home slot.
    pub fn check_hygiene(&self) -> bool {
        self.descriptors.iter().all(|d| {
            if d.dense {
                return true;
            }
            let cap = d.capacity as usize;
            (0..cap).all(|i| {
                let key = self.keys[d.key_offset + i].load(Ordering::Relaxed);
                if key == INVALID {
                    return self.load(d, i) == 0;
                }
                if self.load(d, i) == 0 {
                    return false;
                }
                let mut j = hash_slot(key, cap);
                while j != i {
                    if self.keys[d.key_offset + j].load(Ordering::Relaxed) == INVALID {
                        return false;
                    }
                    j = if j + 1 == cap { 0 } else { j + 1 };
                }
                true
            })
        })
    }
}

/// Affinity source used by FM refinement.
#[derive(Debug)]
pub enum GainTable {
    Cached(SparseGainTable),
    Recompute { k: usize },
}

impl GainTable {
    pub fn build<G: GraphView>(g: &G, assignment: &[BlockId], k: usize, mode: GainTableMode) -> Self {
        match mode {
            GainTableMode::Sparse => GainTable::Cached(SparseGainTable::build(g, assignment, k, false)),
            GainTableMode::Dense => GainTable::Cached(SparseGainTable::build(g, assignment, k, true)),
            GainTableMode::None => GainTable::Recompute { k },
        }
    }

    pub fn memory_footprint(&self) -> Footprint {
        match self {
            GainTable::Cached(t) => t.memory_footprint(),
            GainTable::Recompute { .. } => Footprint { entries: 0, bytes: 0 },
        }
    }

    /// Collects the nonzero affinities of `v` into `out`. `block_of` reads
    /// the current assignment (only used without a cache).
    pub fn affinities<G: GraphView>(
        &self,
        g: &G,
        v: NodeId,
        block_of: impl Fn(NodeId) -> BlockId,
        out: &mut Vec<(BlockId, EdgeWeight)>,
    ) {
        out.clear();
        match self {
            GainTable::Cached(t) => t.for_each_affinity(v, |b, a| out.push((b, a))),
            GainTable::Recompute { .. } => {
                g.for_each_neighbor(v, |_, u, w| {
                    let b = block_of(u);
                    match out.iter_mut().find(|(x, _)| *x == b) {
                        Some(e) => e.1 += w,
                        None => out.push((b, w)),
                    }
                });
            }
        }
    }

    pub fn apply_move_update<G: GraphView>(&self, g: &G, u: NodeId, from: BlockId, to: BlockId) -> Result<()> {
        match self {
            GainTable::Cached(t) => t.apply_move_update(g, u, from, to),
            GainTable::Recompute { .. } if from == to => {
                Err(Error::Precondition(format!("vertex {u} moved from block {from} to itself")))
            }
            GainTable::Recompute { .. } => Ok(()),
        }
    }
}
