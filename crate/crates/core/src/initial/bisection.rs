use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::GraphView;
use crate::util::rng;
use crate::{EdgeWeight, NodeId, NodeWeight};

/// Two-way split with per-side budgets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bisection {
    pub side: Vec<u8>,
    pub weights: [NodeWeight; 2],
    pub budgets: [NodeWeight; 2],
    pub cut: EdgeWeight,
}

impl Bisection {
    pub fn from_sides<G: GraphView>(g: &G, side: Vec<u8>, budgets: [NodeWeight; 2]) -> Self {
        let mut weights = [0; 2];
        let mut cut = 0;
        for u in 0..g.n() as NodeId {
            let s = side[u as usize];
            weights[s as usize] += g.node_weight(u);
            g.for_each_neighbor(u, |_, v, w| {
                if side[v as usize] != s && u < v {
                    cut += w;
                }
            });
        }
        Self { side, weights, budgets, cut }
    }

    /// Total weight above the budgets.
    pub fn overload(&self) -> NodeWeight {
        (self.weights[0] - self.budgets[0]).max(0) + (self.weights[1] - self.budgets[1]).max(0)
    }

    /// Ordering key: feasibility first, then cut.
    pub fn quality(&self) -> (NodeWeight, EdgeWeight) {
        (self.overload(), self.cut)
    }
}

/// Grows side 0 from a random vertex, always absorbing the frontier vertex
/// with the largest (internal − external) attachment, until side 0 holds
/// its share of the total weight. Unreached vertices form side 1.
pub fn greedy_graph_growing<G: GraphView>(g: &G, budget0: NodeWeight, budget1: NodeWeight, seed: u64) -> Result<Bisection> {
    let n = g.n();
    let total = g.total_node_weight();
    if budget0 < 0 || budget1 < 0 || budget0 + budget1 < total {
        return Err(Error::Domain(format!("budgets {budget0} + {budget1} cannot hold total weight {total}")));
    }
    let mut side = vec![1u8; n];
    if n == 0 {
        return Ok(Bisection { side, weights: [0, 0], budgets: [budget0, budget1], cut: 0 });
    }
    // Proportional share, clipped to what both budgets allow.
    let share = if budget0 + budget1 == 0 {
        0
    } else {
        ((total as i128 * budget0 as i128 + (budget0 + budget1) as i128 - 1) / (budget0 + budget1) as i128) as NodeWeight
    };
    let target = share.max(total - budget1).min(budget0);

    let mut r = rng(seed);
    let tiebreak: Vec<u32> = (0..n).map(|_| r.gen()).collect();
    let wdeg: Vec<EdgeWeight> = (0..n as NodeId).map(|u| g.weighted_degree(u)).collect();
    // Weight from each vertex into side 0.
    let mut conn0 = vec![0 as EdgeWeight; n];
    let mut skipped = vec![false; n];
    let mut heap = BinaryHeap::new();
    let mut weight0 = 0;
    let mut remaining: Vec<NodeId> = (0..n as NodeId).collect();
    let mut next_seed = 0usize;
    // Shuffle seeds deterministically by the tiebreak values.
    remaining.sort_unstable_by_key(|&u| tiebreak[u as usize]);

    while weight0 < target {
        let u = match heap.pop() {
            Some((gain, _, u)) => {
                let u: NodeId = u;
                if side[u as usize] == 0 || skipped[u as usize] || gain != 2 * conn0[u as usize] - wdeg[u as usize] {
                    continue;
                }
                u
            }
            None => {
                while next_seed < n && (side[remaining[next_seed] as usize] == 0 || skipped[remaining[next_seed] as usize]) {
                    next_seed += 1;
                }
                if next_seed == n {
                    break;
                }
                remaining[next_seed]
            }
        };
        let wu = g.node_weight(u);
        if weight0 + wu > budget0 {
            skipped[u as usize] = true;
            continue;
        }
        side[u as usize] = 0;
        weight0 += wu;
        g.for_each_neighbor(u, |_, v, w| {
            conn0[v as usize] += w;
            if side[v as usize] == 1 && !skipped[v as usize] {
                heap.push((2 * conn0[v as usize] - wdeg[v as usize], tiebreak[v as usize], v));
            }
        });
    }
    Ok(Bisection::from_sides(g, side, [budget0, budget1]))
}

/// Classic two-way FM: every pass moves each vertex at most once, always the
/// highest-gain movable one, then keeps the best prefix of the moves. Never
/// returns a worse bisection than `b` (by [`Bisection::quality`]).
pub fn fm2way<G: GraphView>(g: &G, mut b: Bisection, max_passes: usize, seed: u64) -> Bisection {
    let n = g.n();
    let mut r = rng(seed);
    let tiebreak: Vec<u32> = (0..n).map(|_| r.gen()).collect();
    // Weight from each vertex into its own side.
    let mut internal = vec![0 as EdgeWeight; n];
    let wdeg: Vec<EdgeWeight> = (0..n as NodeId).map(|u| g.weighted_degree(u)).collect();
    for u in 0..n as NodeId {
        g.for_each_neighbor(u, |_, v, w| {
            if b.side[v as usize] == b.side[u as usize] {
                internal[u as usize] += w;
            }
        });
    }
    let gain = |internal: &[EdgeWeight], u: usize| wdeg[u] - 2 * internal[u];

    // Intermediate states may overshoot a budget by one vertex so that tight
    // budgets still allow swaps; only the best prefix is kept.
    let overshoot = g.max_node_weight();
    let mut locked = vec![false; n];
    let mut moves: Vec<NodeId> = Vec::new();
    for _ in 0..max_passes {
        let start_quality = b.quality();
        let mut best = (start_quality, 0usize);
        locked.iter_mut().for_each(|l| *l = false);
        moves.clear();
        let mut heap: BinaryHeap<(EdgeWeight, u32, Reverse<NodeId>)> =
            (0..n).map(|u| (gain(&internal, u), tiebreak[u], Reverse(u as NodeId))).collect();
        let mut since_best = 0usize;
        while let Some((gu, _, Reverse(u))) = heap.pop() {
            let ui = u as usize;
            if locked[ui] || gu != gain(&internal, ui) {
                continue;
            }
            locked[ui] = true;
            let from = b.side[ui] as usize;
            let to = 1 - from;
            let wu = g.node_weight(u);
            let fits = b.weights[to] + wu <= b.budgets[to] + overshoot;
            let relieves = b.weights[from] > b.budgets[from];
            if !fits && !relieves {
                continue;
            }
            b.side[ui] = to as u8;
            b.weights[from] -= wu;
            b.weights[to] += wu;
            b.cut -= gu;
            internal[ui] = wdeg[ui] - internal[ui];
            g.for_each_neighbor(u, |_, v, w| {
                let vi = v as usize;
                if b.side[vi] as usize == to {
                    internal[vi] += w;
                } else {
                    internal[vi] -= w;
                }
                if !locked[vi] {
                    heap.push((gain(&internal, vi), tiebreak[vi], Reverse(v)));
                }
            });
            moves.push(u);
            if b.quality() < best.0 {
                best = (b.quality(), moves.len());
                since_best = 0;
            } else {
                since_best += 1;
                if since_best > 100.max(n / 8) {
                    break;
                }
            }
        }
        // Roll back to the best prefix.
        for &u in moves[best.1..].iter().rev() {
            let ui = u as usize;
            let from = b.side[ui] as usize;
            let to = 1 - from;
            let wu = g.node_weight(u);
            let gu = wdeg[ui] - 2 * internal[ui];
            b.side[ui] = to as u8;
            b.weights[from] -= wu;
            b.weights[to] += wu;
            b.cut -= gu;
            internal[ui] = wdeg[ui] - internal[ui];
            g.for_each_neighbor(u, |_, v, w| {
                if b.side[v as usize] as usize == to {
                    internal[v as usize] += w;
                } else {
                    internal[v as usize] -= w;
                }
            });
        }
        if best.0 >= start_quality {
            break;
        }
    }
    b
}
