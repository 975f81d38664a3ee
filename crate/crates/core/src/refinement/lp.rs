use std::cell::RefCell;
use std::sync::atomic::Ordering;

use rayon::prelude::*;
use thread_local::ThreadLocal;

use crate::clustering::{FixedCapacityRatingMap, TieBreak};
use crate::graph::GraphView;
use crate::partition::Partition;
use crate::util::{as_atomic_i64, as_atomic_u32, random_permutation, splitmix64, tie_key, try_reserve};
use crate::{BlockId, EdgeWeight, NodeId};

/// Parameters of [`lp_refine`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LpRefineConfig {
    pub rounds: usize,
    pub seed: u64,
    /// Sequential visits. Ties are broken by a hash of the seed either way.
    pub deterministic: bool,
}

impl Default for LpRefineConfig {
    fn default() -> Self {
        Self { rounds: 5, seed: 0, deterministic: false }
    }
}

/// Size-constrained label propagation on a partition: every vertex moves to
/// the adjacent block it is most strongly connected to, if that connection
/// strictly beats its own block's and the block has room. Returns the
/// number of moves.
pub fn lp_refine<G: GraphView>(g: &G, p: &mut Partition, config: &LpRefineConfig) -> usize {
    let n = g.n();
    let k = p.k();
    let max = p.max_block_weight();
    let (assignment, weights) = p.parts_mut();
    let blocks = as_atomic_u32(assignment);
    let weights = as_atomic_i64(weights);
    // A vertex sees at most k distinct blocks, so nothing is ever bumped.
    let limit = (k + 1).max(2);
    let maps: ThreadLocal<RefCell<FixedCapacityRatingMap>> = ThreadLocal::new();
    let mut total = 0;
    for round in 0..config.rounds as u64 {
        let order = random_permutation(n, splitmix64(config.seed ^ (round << 20) ^ 0x5151));
        // Seeded ties in both modes: smallest-ID ties bias clusters toward
        // low IDs, which on locality-ordered inputs skews their shape.
        let tie = TieBreak::Random { seed: config.seed, round };
        let visit = |&u: &NodeId| -> bool {
            let cell = maps.get_or(|| RefCell::new(FixedCapacityRatingMap::new(limit)));
            let mut map = cell.borrow_mut();
            map.clear();
            g.for_each_neighbor(u, |_, v, w| {
                let ok = map.add(blocks[v as usize].load(Ordering::Relaxed), w);
                debug_assert!(ok);
            });
            let own = blocks[u as usize].load(Ordering::Relaxed);
            let own_rating = map.get(own).unwrap_or(0);
            let wu = g.node_weight(u);
            let mut best: Option<(EdgeWeight, u64, BlockId)> = None;
            for (b, rating) in map.iter() {
                if b == own || rating <= own_rating || weights[b as usize].load(Ordering::Relaxed) + wu > max {
                    continue;
                }
                let key = match tie {
                    TieBreak::Deterministic => u64::MAX - b as u64,
                    TieBreak::Random { seed, round } => tie_key(seed, round, u, b),
                };
                if best.is_none_or(|(r, kk, _)| (rating, key) > (r, kk)) {
                    best = Some((rating, key, b));
                }
            }
            let Some((_, _, target)) = best else {
                return false;
            };
            if !try_reserve(&weights[target as usize], wu, max) {
                return false;
            }
            weights[own as usize].fetch_sub(wu, Ordering::AcqRel);
            blocks[u as usize].store(target, Ordering::Relaxed);
            true
        };
        let moves = if config.deterministic {
            order.iter().filter(|u| visit(u)).count()
        } else {
            order.par_iter().filter(|u| visit(u)).count()
        };
        total += moves;
        if moves == 0 {
            break;
        }
    }
    total
}
