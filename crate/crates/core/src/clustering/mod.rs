//! Size-constrained label propagation clustering for coarsening.

mod lp;
mod rating_map;
mod sparse_array;

pub use lp::{lp_round_reference, lp_round_two_phase, LpWorkspace, RatingMode, RoundStats, TieBreak};
pub use rating_map::FixedCapacityRatingMap;
pub use sparse_array::{flush_rating_map, SparseRatingArray};

use crate::error::Result;
use crate::graph::GraphView;
use crate::memory::MemoryTracker;
use crate::partition::Clustering;
use crate::util::{random_permutation, splitmix64};
use crate::{NodeId, NodeWeight, INVALID};

/// Parameters of [`cluster_coarsening`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LpConfig {
    pub rounds: usize,
    pub t_bump: usize,
    pub seed: u64,
    /// Single-threaded visits. Ties are broken by a hash of the seed either way.
    pub deterministic: bool,
    pub mode: RatingMode,
    /// Singletons are paired by the fallback when `n / clusters` stays below
    /// this factor.
    pub fallback_shrink: f64,
}

impl Default for LpConfig {
    fn default() -> Self {
        Self {
            rounds: 5,
            t_bump: 10_000,
            seed: 0,
            deterministic: false,
            mode: RatingMode::TwoPhase,
            fallback_shrink: 2.0,
        }
    }
}

/// Clusters `g` for contraction: `rounds` label propagation rounds from the
/// singleton clustering, then singleton pairing if the clustering shrinks
/// the graph too little. No cluster heavier than `max_cluster_weight` is
/// created.
pub fn cluster_coarsening<G: GraphView>(
    g: &G,
    max_cluster_weight: NodeWeight,
    config: &LpConfig,
    tracker: Option<&MemoryTracker>,
) -> Result<Clustering> {
    let n = g.n();
    let mut clustering = Clustering::singletons(g, max_cluster_weight);
    if config.rounds == 0 || n == 0 {
        return Ok(clustering);
    }
    let mut ws = LpWorkspace::new(n, g.max_degree(), config.t_bump, config.mode, tracker);
    let _order_bytes = tracker.map(|t| t.track(n * std::mem::size_of::<NodeId>()));
    for round in 0..config.rounds as u64 {
        let order = random_permutation(n, splitmix64(config.seed ^ round.wrapping_mul(0x2545_f491_4f6c_dd1d)));
        // Seeded ties in both modes: smallest-ID ties bias clusters toward
        // low IDs, which on locality-ordered inputs skews their shape.
        let tie = TieBreak::Random { seed: config.seed, round };
        let stats = lp_round_two_phase(g, &mut clustering, &order, tie, config.deterministic, &mut ws)?;
        log::trace!("lp round {round}: {} moves, {} bumped", stats.moves, stats.bumped);
        if stats.moves == 0 {
            break;
        }
    }
    drop(ws);
    let clusters = clustering.num_clusters();
    if (n as f64) < config.fallback_shrink * clusters as f64 {
        let merged = pair_singletons(g, &mut clustering, tracker);
        log::trace!("fallback paired {merged} singletons");
    }
    Ok(clustering)
}

/// Pairs singleton clusters that would prefer the same neighboring cluster
/// (two hops apart), and isolated singletons with each other, as long as the
/// pair fits the weight bound. Returns the number of merged vertices.
pub fn pair_singletons<G: GraphView>(g: &G, c: &mut Clustering, tracker: Option<&MemoryTracker>) -> usize {
    let n = g.n();
    let max = c.max_cluster_weight();
    let _bytes = tracker.map(|t| t.track(2 * n * std::mem::size_of::<u32>()));
    let (clusters, weights) = c.parts_mut();
    let mut sizes = vec![0u32; n];
    for &cl in clusters.iter() {
        sizes[cl as usize] += 1;
    }
    let mut pending = vec![INVALID; n];
    let mut pending_isolated = INVALID;
    let mut ratings = FixedCapacityRatingMap::new(g.max_degree() + 2);
    let mut merged = 0;
    for u in 0..n as NodeId {
        let cu = clusters[u as usize];
        if sizes[cu as usize] != 1 {
            continue;
        }
        ratings.clear();
        g.for_each_neighbor(u, |_, v, w| {
            let ok = ratings.add(clusters[v as usize], w);
            debug_assert!(ok);
        });
        let favored = ratings
            .iter()
            .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
            .map(|(cl, _)| cl);
        let slot = match favored {
            Some(f) => &mut pending[f as usize],
            None => &mut pending_isolated,
        };
        let wu = g.node_weight(u);
        let partner = *slot;
        if partner != INVALID {
            let cp = clusters[partner as usize];
            if weights[cp as usize] + wu <= max {
                weights[cp as usize] += wu;
                weights[cu as usize] -= wu;
                sizes[cp as usize] += 1;
                sizes[cu as usize] -= 1;
                clusters[u as usize] = cp;
                *slot = INVALID;
                merged += 1;
                continue;
            }
        }
        *slot = u;
    }
    merged
}
