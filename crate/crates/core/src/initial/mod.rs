//! Initial partitioning of the coarsest graph by recursive bisection.

mod bisection;

pub use bisection::{fm2way, greedy_graph_growing, Bisection};

use crate::error::{Error, Result};
use crate::graph::{Graph, GraphView};
use crate::partition::{max_block_weight, Epsilon, Partition};
use crate::util::splitmix64;
use crate::{BlockId, EdgeWeight, NodeId, NodeWeight};

/// Parameters of [`initial_partition`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InitialConfig {
    /// Seeded growing + FM runs per bisection; the best one is kept.
    pub portfolio: usize,
    pub fm_passes: usize,
    pub seed: u64,
}

impl Default for InitialConfig {
    fn default() -> Self {
        Self { portfolio: 8, fm_passes: 10, seed: 0 }
    }
}

/// Splits `g` into `k` blocks of weight at most `⌈(1+ε)·W/k⌉`.
pub fn initial_partition<G: GraphView>(g: &G, k: usize, epsilon: Epsilon, config: &InitialConfig) -> Result<Partition> {
    let budget = max_block_weight(g.total_node_weight(), k, epsilon)?;
    if g.max_node_weight() > budget {
        return Err(Error::Infeasible(format!(
            "vertex of weight {} exceeds the block budget {budget}",
            g.max_node_weight()
        )));
    }
    initial_partition_with_budget(g, k, epsilon, budget, config)
}

/// Like [`initial_partition`] with an explicit per-block budget.
pub fn initial_partition_with_budget<G: GraphView>(
    g: &G,
    k: usize,
    epsilon: Epsilon,
    budget: NodeWeight,
    config: &InitialConfig,
) -> Result<Partition> {
    if k == 0 {
        return Err(Error::Domain("k must be at least 1".into()));
    }
    let root = Graph::from_view(g);
    let ids: Vec<NodeId> = (0..g.n() as NodeId).collect();
    let mut assignment = vec![0 as BlockId; g.n()];
    let node = Node { k, first_block: 0, depth: 0 };
    for (u, b) in bisect_recursive(&root, ids, node, epsilon, budget, config) {
        assignment[u as usize] = b;
    }
    let mut p = Partition::with_budget(g, k, epsilon, assignment, budget)?;
    if !p.is_balanced() {
        rebalance(g, &mut p);
    }
    Ok(p)
}

#[derive(Clone, Copy)]
struct Node {
    k: usize,
    first_block: BlockId,
    depth: u32,
}

fn side_budgets(total: NodeWeight, heaviest: NodeWeight, node: Node, epsilon: Epsilon, budget: NodeWeight) -> [NodeWeight; 2] {
    let k1 = node.k.div_ceil(2);
    let ks = [k1, node.k - k1];
    let slack = 1.0 + epsilon.as_f64() + 0.01 * node.depth as f64;
    let cap = |ki: usize| (ki as i128 * budget as i128).min(NodeWeight::MAX as i128) as NodeWeight;
    let mut b = ks.map(|ki| {
        let share = total as f64 * ki as f64 / node.k as f64;
        ((slack * share).ceil() as NodeWeight).min(cap(ki))
    });
    if b[0] + b[1] < total {
        b = ks.map(cap);
    }
    if b[0] + b[1] < total {
        // Already overloaded above this node; leave the repair to rebalancing.
        b = ks.map(|ki| ((total as i128 * ki as i128 + node.k as i128 - 1) / node.k as i128) as NodeWeight + heaviest);
    }
    b
}

fn bisect_recursive(
    g: &Graph,
    ids: Vec<NodeId>,
    node: Node,
    epsilon: Epsilon,
    budget: NodeWeight,
    config: &InitialConfig,
) -> Vec<(NodeId, BlockId)> {
    if node.k == 1 || g.n() == 0 {
        return ids.into_iter().map(|u| (u, node.first_block)).collect();
    }
    let budgets = side_budgets(g.total_node_weight(), g.max_node_weight(), node, epsilon, budget);
    let node_seed = splitmix64(config.seed ^ ((node.first_block as u64) << 32) ^ node.depth as u64);
    let best = (0..config.portfolio.max(1) as u64)
        .map(|r| {
            let seed = splitmix64(node_seed.wrapping_add(r));
            let b = greedy_graph_growing(g, budgets[0], budgets[1], seed).expect("side budgets cover the total weight");
            fm2way(g, b, config.fm_passes, seed)
        })
        .min_by_key(Bisection::quality)
        .unwrap();

    let k1 = node.k.div_ceil(2);
    let children = [
        Node { k: k1, first_block: node.first_block, depth: node.depth + 1 },
        Node { k: node.k - k1, first_block: node.first_block + k1 as BlockId, depth: node.depth + 1 },
    ];
    let (g0, ids0) = induced(g, &ids, &best.side, 0);
    let (g1, ids1) = induced(g, &ids, &best.side, 1);
    let (mut left, right) = rayon::join(
        || bisect_recursive(&g0, ids0, children[0], epsilon, budget, config),
        || bisect_recursive(&g1, ids1, children[1], epsilon, budget, config),
    );
    left.extend(right);
    left
}

/// Subgraph induced by the vertices on `which` side, with their original IDs.
fn induced(g: &Graph, ids: &[NodeId], side: &[u8], which: u8) -> (Graph, Vec<NodeId>) {
    let mut local = vec![NodeId::MAX; g.n()];
    let mut sub_ids = Vec::new();
    for u in 0..g.n() {
        if side[u] == which {
            local[u] = sub_ids.len() as NodeId;
            sub_ids.push(ids[u]);
        }
    }
    let mut offsets = vec![0];
    let mut targets = Vec::new();
    let mut weights = Vec::new();
    let mut node_weights = Vec::with_capacity(sub_ids.len());
    for u in 0..g.n() as NodeId {
        if side[u as usize] != which {
            continue;
        }
        for (v, w) in g.neighbors(u) {
            if side[v as usize] == which {
                targets.push(local[v as usize]);
                weights.push(w);
            }
        }
        offsets.push(targets.len());
        node_weights.push(g.node_weight(u));
    }
    let sub = Graph::from_raw_parts(offsets, targets, weights, node_weights).expect("induced subgraph is consistent");
    (sub, sub_ids)
}

/// Greedily moves vertices out of overloaded blocks into blocks with room,
/// preferring moves that raise the cut least. Returns whether `p` is
/// balanced afterwards.
pub fn rebalance<G: GraphView>(g: &G, p: &mut Partition) -> bool {
    let k = p.k();
    let budget = p.max_block_weight();
    let mut conn = vec![0 as EdgeWeight; k];
    let mut touched = Vec::new();
    while !p.is_balanced() {
        let mut candidates = Vec::new();
        for u in 0..g.n() as NodeId {
            let own = p.block(u) as usize;
            if p.block_weights()[own] <= budget {
                continue;
            }
            g.for_each_neighbor(u, |_, v, w| {
                let b = p.block(v) as usize;
                if conn[b] == 0 {
                    touched.push(b);
                }
                conn[b] += w;
            });
            let wu = g.node_weight(u);
            let target = (0..k)
                .filter(|&t| t != own && p.block_weights()[t] + wu <= budget)
                .max_by_key(|&t| (conn[t], -p.block_weights()[t]));
            if let Some(t) = target {
                candidates.push((conn[t] - conn[own], wu, u, t as BlockId));
            }
            for b in touched.drain(..) {
                conn[b] = 0;
            }
        }
        candidates.sort_unstable_by_key(|&(gain, wu, u, _)| (std::cmp::Reverse(gain), wu, u));
        let mut moved = false;
        for (_, wu, u, t) in candidates {
            let own = p.block(u) as usize;
            if p.block_weights()[own] > budget && p.block_weights()[t as usize] + wu <= budget {
                p.move_vertex(u, wu, t);
                moved = true;
            }
        }
        if !moved {
            break;
        }
    }
    p.is_balanced()
}
