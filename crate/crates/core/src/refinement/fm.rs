//! Localized k-way FM refinement.
//!
//! Each pass starts searches from boundary vertices in random order. A
//! search owns the vertices it touches, greedily applies the best feasible
//! move from its local priority queue, and keeps the best-gain prefix of its
//! moves. Kept moves are appended to one pass-wide log. Because concurrent
//! searches act on each other's stale gains, the log is replayed at the end
//! of the pass with exact gains, and everything after its best balanced
//! prefix is undone, so a pass never worsens the cut.

use std::collections::BinaryHeap;
use std::sync::atomic::{AtomicI64, AtomicU32, AtomicUsize, Ordering};
use std::sync::Mutex;

use rayon::prelude::*;

use super::gain_table::GainTable;
use crate::error::Result;
use crate::graph::GraphView;
use crate::partition::Partition;
use crate::util::{as_atomic_i64, as_atomic_u32, random_permutation, splitmix64, tie_key, try_reserve};
use crate::{BlockId, EdgeWeight, NodeId, NodeWeight, INVALID};

/// Parameters of [`fm_refine`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FmConfig {
    /// Boundary vertices a search starts from.
    pub max_seeds: usize,
    /// Vertices a search may touch.
    pub adjacency_limit: usize,
    pub passes: usize,
    /// Non-improving moves after which a search stops.
    pub patience: usize,
    pub seed: u64,
}

impl Default for FmConfig {
    fn default() -> Self {
        Self { max_seeds: 5, adjacency_limit: 400, passes: 3, patience: 64, seed: 0 }
    }
}

/// Committed move: `(vertex, from, to)`.
pub type Move = (NodeId, BlockId, BlockId);

/// Result of [`fm_refine`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct FmStats {
    /// Exact cut reduction.
    pub improvement: EdgeWeight,
    pub moves: usize,
    pub passes: usize,
}

struct Shared<'a, G> {
    g: &'a G,
    table: &'a GainTable,
    blocks: &'a [AtomicU32],
    weights: &'a [AtomicI64],
    owner: &'a [AtomicU32],
    max: NodeWeight,
    config: &'a FmConfig,
    pass: u64,
}

impl<G: GraphView> Shared<'_, G> {
    fn block(&self, v: NodeId) -> BlockId {
        self.blocks[v as usize].load(Ordering::Relaxed)
    }

    /// Best feasible target of `v` and its gain.
    fn best_move(&self, v: NodeId, scratch: &mut Vec<(BlockId, EdgeWeight)>) -> Option<(EdgeWeight, BlockId)> {
        self.table.affinities(self.g, v, |u| self.block(u), scratch);
        let own = self.block(v);
        let own_affinity = scratch.iter().find(|e| e.0 == own).map_or(0, |e| e.1);
        let wv = self.g.node_weight(v);
        let mut best: Option<(EdgeWeight, u64, BlockId)> = None;
        for &(b, a) in scratch.iter() {
            if b == own || self.weights[b as usize].load(Ordering::Relaxed) + wv > self.max {
                continue;
            }
            let key = tie_key(self.config.seed, self.pass, v, b);
            if best.is_none_or(|(ba, bk, _)| (a, key) > (ba, bk)) {
                best = Some((a, key, b));
            }
        }
        best.map(|(a, _, b)| (a - own_affinity, b))
    }

    fn apply(&self, v: NodeId, from: BlockId, to: BlockId) -> Result<()> {
        self.blocks[v as usize].store(to, Ordering::Relaxed);
        self.table.apply_move_update(self.g, v, from, to)
    }

    fn undo(&self, v: NodeId, from: BlockId, to: BlockId) -> Result<()> {
        let wv = self.g.node_weight(v);
        self.weights[from as usize].fetch_add(wv, Ordering::AcqRel);
        self.weights[to as usize].fetch_sub(wv, Ordering::AcqRel);
        self.blocks[v as usize].store(from, Ordering::Relaxed);
        self.table.apply_move_update(self.g, v, to, from)
    }

    /// One localized search owned by `id`. Returns its kept moves.
    fn search(&self, id: u32, seeds: &[NodeId]) -> Result<Vec<Move>> {
        let mut heap: BinaryHeap<(EdgeWeight, u64, NodeId)> = BinaryHeap::new();
        let mut scratch = Vec::new();
        let mut touched = 0usize;
        let mut moved: Vec<NodeId> = Vec::new();
        let mut log: Vec<Move> = Vec::new();
        let (mut gain_sum, mut best_sum, mut best_len) = (0, 0, 0);

        let claim = |v: NodeId| {
            self.owner[v as usize]
                .compare_exchange(INVALID, id, Ordering::AcqRel, Ordering::Relaxed)
                .is_ok()
        };
        for &s in seeds {
            if claim(s) {
                touched += 1;
                if let Some((gain, _)) = self.best_move(s, &mut scratch) {
                    heap.push((gain, tie_key(self.config.seed, self.pass, s, INVALID), s));
                }
            }
        }
        while let Some((gain, key, v)) = heap.pop() {
            if moved.contains(&v) {
                continue;
            }
            let Some((current, to)) = self.best_move(v, &mut scratch) else {
                continue;
            };
            if current != gain {
                heap.push((current, key, v));
                continue;
            }
            let from = self.block(v);
            if !try_reserve(&self.weights[to as usize], self.g.node_weight(v), self.max) {
                continue;
            }
            self.weights[from as usize].fetch_sub(self.g.node_weight(v), Ordering::AcqRel);
            self.apply(v, from, to)?;
            moved.push(v);
            log.push((v, from, to));
            gain_sum += gain;
            if gain_sum > best_sum {
                best_sum = gain_sum;
                best_len = log.len();
            } else if log.len() - best_len > self.config.patience {
                break;
            }
            let mut frontier = Vec::new();
            self.g.for_each_neighbor(v, |_, u, _| frontier.push(u));
            for u in frontier {
                let owned = self.owner[u as usize].load(Ordering::Relaxed) == id;
                if !owned {
                    if touched >= self.config.adjacency_limit || !claim(u) {
                        continue;
                    }
                    touched += 1;
                }
                if moved.contains(&u) {
                    continue;
                }
                if let Some((g_u, _)) = self.best_move(u, &mut scratch) {
                    heap.push((g_u, tie_key(self.config.seed, self.pass, u, INVALID), u));
                }
            }
        }
        for &(v, from, to) in log[best_len..].iter().rev() {
            self.undo(v, from, to)?;
        }
        log.truncate(best_len);
        Ok(log)
    }
}

/// Improves `p` with localized FM using the affinities in `table`, which
/// must match `p` on entry and matches the result on return. Never worsens
/// the cut and never breaks balance.
pub fn fm_refine<G: GraphView>(g: &G, p: &mut Partition, table: &GainTable, config: &FmConfig) -> Result<FmStats> {
    let n = g.n();
    let max = p.max_block_weight();
    let mut stats = FmStats::default();
    let owner: Vec<AtomicU32> = (0..n).map(|_| AtomicU32::new(INVALID)).collect();
    for pass in 0..config.passes as u64 {
        let start_assignment = p.assignment().to_vec();
        let start_weights = p.block_weights().to_vec();
        let (assignment, weights) = p.parts_mut();
        let blocks = as_atomic_u32(assignment);
        let weights = as_atomic_i64(weights);
        let shared = Shared { g, table, blocks, weights, owner: &owner, max, config, pass };

        let boundary: Vec<NodeId> = random_permutation(n, splitmix64(config.seed ^ (pass << 24) ^ 0xf00d))
            .into_iter()
            .filter(|&u| {
                let b = start_assignment[u as usize];
                let mut cross = false;
                g.for_each_neighbor(u, |_, v, _| cross |= start_assignment[v as usize] != b);
                cross
            })
            .collect();
        let next = AtomicUsize::new(0);
        let global: Mutex<Vec<Move>> = Mutex::new(Vec::new());
        let failure = Mutex::new(None);
        let seeds_per_search = config.max_seeds.max(1);
        let searches = boundary.len().div_ceil(seeds_per_search);
        (0..searches).into_par_iter().for_each(|id| {
            let start = next.fetch_add(seeds_per_search, Ordering::Relaxed).min(boundary.len());
            let end = (start + seeds_per_search).min(boundary.len());
            match shared.search(id as u32, &boundary[start..end]) {
                Ok(kept) => global.lock().unwrap().extend(kept),
                Err(e) => {
                    failure.lock().unwrap().get_or_insert(e);
                }
            }
        });
        if let Some(e) = failure.into_inner().unwrap() {
            return Err(e);
        }
        owner.par_iter().for_each(|o| o.store(INVALID, Ordering::Relaxed));

        // Replay the pass log with exact gains and keep its best balanced
        // prefix.
        let log = global.into_inner().unwrap();
        let mut replay = start_assignment;
        let mut replay_weights = start_weights;
        let mut overloaded = replay_weights.iter().filter(|&&w| w > max).count();
        let (mut sum, mut best_sum, mut best_len) = (0 as EdgeWeight, 0 as EdgeWeight, 0usize);
        for (i, &(v, from, to)) in log.iter().enumerate() {
            let mut gain = 0;
            g.for_each_neighbor(v, |_, u, w| {
                let b = replay[u as usize];
                if b == to {
                    gain += w;
                } else if b == from {
                    gain -= w;
                }
            });
            replay[v as usize] = to;
            let wv = g.node_weight(v);
            let (before_from, before_to) = (replay_weights[from as usize], replay_weights[to as usize]);
            replay_weights[from as usize] -= wv;
            replay_weights[to as usize] += wv;
            overloaded -= (before_from > max) as usize + (before_to > max) as usize;
            overloaded += (replay_weights[from as usize] > max) as usize + (replay_weights[to as usize] > max) as usize;
            sum += gain;
            if overloaded == 0 && sum > best_sum {
                best_sum = sum;
                best_len = i + 1;
            }
        }
        for &(v, from, to) in log[best_len..].iter().rev() {
            shared.undo(v, from, to)?;
        }
        stats.improvement += best_sum;
        stats.moves += best_len;
        stats.passes += 1;
        if best_sum == 0 {
            break;
        }
    }
    Ok(stats)
}
