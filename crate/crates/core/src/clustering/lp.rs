use std::cell::RefCell;
use std::sync::atomic::{AtomicI64, AtomicU32, AtomicUsize, Ordering};
use std::sync::Mutex;

use rayon::prelude::*;
use thread_local::ThreadLocal;

use super::rating_map::FixedCapacityRatingMap;
use super::sparse_array::{flush_rating_map, SparseRatingArray};
use crate::error::{Error, Result};
use crate::graph::GraphView;
use crate::memory::MemoryTracker;
use crate::partition::Clustering;
use crate::util::{as_atomic_i64, as_atomic_u32, tie_key, try_reserve};
use crate::{EdgeWeight, NodeId, NodeWeight};

/// How equally rated clusters are ordered.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TieBreak {
    /// Smallest cluster ID wins.
    Deterministic,
    /// Pseudorandom draw seeded by `(seed, round, vertex)`.
    Random { seed: u64, round: u64 },
}

impl TieBreak {
    #[inline]
    fn key(self, u: NodeId, c: u32) -> u64 {
        match self {
            TieBreak::Deterministic => u64::MAX - c as u64,
            TieBreak::Random { seed, round } => tie_key(seed, round, u, c),
        }
    }
}

/// Best feasible cluster for `u` among `candidates`; `current` is always
/// feasible. Returns `current` if nothing else qualifies.
#[inline]
fn best_cluster(
    u: NodeId,
    current: u32,
    weight: NodeWeight,
    max_cluster_weight: NodeWeight,
    candidates: impl Iterator<Item = (u32, EdgeWeight)>,
    cluster_weight: impl Fn(u32) -> NodeWeight,
    tie: TieBreak,
) -> u32 {
    let mut best = current;
    let mut best_rating = EdgeWeight::MIN;
    let mut best_key = 0;
    for (c, rating) in candidates {
        if c != current && cluster_weight(c) + weight > max_cluster_weight {
            continue;
        }
        if rating > best_rating || (rating == best_rating && tie.key(u, c) > best_key) {
            best = c;
            best_rating = rating;
            best_key = tie.key(u, c);
        }
    }
    best
}

/// One sequential round of plain label propagation in the given order with
/// an exact rating per neighboring cluster. Returns the number of moves.
pub fn lp_round_reference<G: GraphView>(g: &G, c: &mut Clustering, order: &[NodeId], tie: TieBreak) -> usize {
    let max = c.max_cluster_weight();
    let (clusters, weights) = c.parts_mut();
    let mut ratings = vec![0 as EdgeWeight; clusters.len()];
    let mut touched = Vec::new();
    let mut moves = 0;
    for &u in order {
        g.for_each_neighbor(u, |_, v, w| {
            let cv = clusters[v as usize];
            if ratings[cv as usize] == 0 {
                touched.push(cv);
            }
            ratings[cv as usize] += w;
        });
        let current = clusters[u as usize];
        let wu = g.node_weight(u);
        let best = best_cluster(
            u,
            current,
            wu,
            max,
            touched.iter().map(|&c| (c, ratings[c as usize])),
            |c| weights[c as usize],
            tie,
        );
        for c in touched.drain(..) {
            ratings[c as usize] = 0;
        }
        if best != current {
            weights[current as usize] -= wu;
            weights[best as usize] += wu;
            clusters[u as usize] = best;
            moves += 1;
        }
    }
    moves
}

/// Rating structure used by [`lp_round_two_phase`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RatingMode {
    /// Fixed-capacity hash tables per worker plus one shared sparse array
    /// for bumped vertices.
    TwoPhase,
    /// One dense sparse array of length `n` per worker; no bumping. Kept as
    /// the memory baseline.
    PerWorkerSparseArray,
}

/// Outcome of one round.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RoundStats {
    pub moves: usize,
    pub bumped: usize,
}

/// Scratch memory of label propagation, reused across rounds. Everything it
/// allocates is charged to the tracker until it is dropped.
pub struct LpWorkspace<'t> {
    n: usize,
    t_bump: usize,
    map_limit: usize,
    mode: RatingMode,
    maps: ThreadLocal<RefCell<FixedCapacityRatingMap>>,
    flush_maps: ThreadLocal<RefCell<(FixedCapacityRatingMap, Vec<u32>)>>,
    sparse: Option<SparseRatingArray>,
    dense: Vec<Mutex<(Vec<EdgeWeight>, Vec<u32>)>>,
    tracker: Option<&'t MemoryTracker>,
    charged: AtomicUsize,
}

impl<'t> LpWorkspace<'t> {
    /// Workspace for graphs with `n` vertices and maximum degree
    /// `max_degree`. Phase-one maps only need room for `min(T_bump, Δ+1)`
    /// keys, since a vertex never sees more than `Δ` distinct clusters.
    pub fn new(n: usize, max_degree: usize, t_bump: usize, mode: RatingMode, tracker: Option<&'t MemoryTracker>) -> Self {
        let ws = Self {
            n,
            t_bump,
            map_limit: t_bump.min(max_degree + 1),
            mode,
            maps: ThreadLocal::new(),
            flush_maps: ThreadLocal::new(),
            sparse: None,
            dense: Vec::new(),
            tracker,
            charged: AtomicUsize::new(0),
        };
        if mode == RatingMode::PerWorkerSparseArray {
            let workers = rayon::current_num_threads().max(1);
            let mut ws = ws;
            ws.dense = (0..workers).map(|_| Mutex::new((vec![0; n], Vec::new()))).collect();
            ws.charge(workers * n * std::mem::size_of::<EdgeWeight>());
            return ws;
        }
        ws
    }

    fn charge(&self, bytes: usize) {
        self.charged.fetch_add(bytes, Ordering::Relaxed);
        if let Some(t) = self.tracker {
            t.add(bytes);
        }
    }

    /// Bytes currently charged to the tracker.
    pub fn memory_bytes(&self) -> usize {
        self.charged.load(Ordering::Relaxed)
    }

    fn sparse_array(&mut self) -> &SparseRatingArray {
        if self.sparse.is_none() {
            self.charge(self.n * std::mem::size_of::<EdgeWeight>());
            self.sparse = Some(SparseRatingArray::new(self.n));
        }
        self.sparse.as_ref().unwrap()
    }
}

impl Drop for LpWorkspace<'_> {
    fn drop(&mut self) {
        if let Some(t) = self.tracker {
            t.sub(self.charged.load(Ordering::Relaxed));
        }
    }
}

struct Shared<'a, G> {
    g: &'a G,
    clusters: &'a [AtomicU32],
    weights: &'a [AtomicI64],
    max: NodeWeight,
    tie: TieBreak,
}

impl<G: GraphView> Shared<'_, G> {
    #[inline]
    fn decide(&self, u: NodeId, candidates: impl Iterator<Item = (u32, EdgeWeight)>) -> bool {
        let current = self.clusters[u as usize].load(Ordering::Relaxed);
        let wu = self.g.node_weight(u);
        let weights = self.weights;
        let best = best_cluster(
            u,
            current,
            wu,
            self.max,
            candidates,
            |c| weights[c as usize].load(Ordering::Relaxed),
            self.tie,
        );
        if best == current || !try_reserve(&weights[best as usize], wu, self.max) {
            return false;
        }
        weights[current as usize].fetch_sub(wu, Ordering::AcqRel);
        self.clusters[u as usize].store(best, Ordering::Relaxed);
        true
    }

    #[inline]
    fn cluster(&self, v: NodeId) -> u32 {
        self.clusters[v as usize].load(Ordering::Relaxed)
    }
}

/// Accumulates the ratings of bumped vertex `u` with edge parallelism into
/// the shared sparse array and returns them as `(cluster, rating)` pairs.
/// The array is all zero again when this returns.
pub(crate) fn aggregate_bumped<G: GraphView>(
    g: &G,
    u: NodeId,
    clusters: &[AtomicU32],
    t_bump: usize,
    a: &SparseRatingArray,
    flush_maps: &mut ThreadLocal<RefCell<(FixedCapacityRatingMap, Vec<u32>)>>,
    charge: &(dyn Fn(usize) + Sync),
) -> Vec<(u32, EdgeWeight)> {
    {
        let maps = &*flush_maps;
        g.par_for_each_neighbor(u, |_, v, w| {
            let cell = maps.get_or(|| {
                let map = FixedCapacityRatingMap::new(t_bump);
                charge(map.memory_bytes());
                RefCell::new((map, Vec::new()))
            });
            let mut state = cell.borrow_mut();
            let (map, list) = &mut *state;
            let c = clusters[v as usize].load(Ordering::Relaxed);
            if !map.add(c, w) {
                flush_rating_map(a, map, list);
                let _ = map.add(c, w);
            }
        });
    }
    let mut ratings = Vec::new();
    for cell in flush_maps.iter_mut() {
        let (map, list) = cell.get_mut();
        flush_rating_map(a, map, list);
    }
    for cell in flush_maps.iter_mut() {
        let (_, list) = cell.get_mut();
        ratings.extend(list.iter().map(|&c| (c, a.get(c))));
    }
    a.reset(flush_maps.iter_mut().map(|cell| &mut cell.get_mut().1));
    ratings
}

/// One round of two-phase label propagation.
///
/// Phase one visits `order` (in parallel unless `sequential`) with small
/// fixed-capacity rating maps and defers every vertex whose number of
/// distinct neighboring clusters reaches `T_bump`. Phase two handles the
/// deferred vertices one after another, aggregating each neighborhood in
/// parallel into the shared sparse array.
pub fn lp_round_two_phase<G: GraphView>(
    g: &G,
    c: &mut Clustering,
    order: &[NodeId],
    tie: TieBreak,
    sequential: bool,
    ws: &mut LpWorkspace<'_>,
) -> Result<RoundStats> {
    if ws.t_bump < 2 {
        return Err(Error::Precondition(format!("T_bump must be at least 2, got {}", ws.t_bump)));
    }
    if c.n() != g.n() || ws.n != g.n() {
        return Err(Error::Structural("clustering, workspace, and graph sizes differ".into()));
    }
    let max = c.max_cluster_weight();
    let (clusters, weights) = c.parts_mut();
    let shared = Shared { g, clusters: as_atomic_u32(clusters), weights: as_atomic_i64(weights), max, tie };

    let bumped = Mutex::new(Vec::new());
    let moves = match ws.mode {
        RatingMode::TwoPhase => {
            let ws_ref = &*ws;
            let visit = |&u: &NodeId| -> bool {
                let cell = ws_ref.maps.get_or(|| {
                    let map = FixedCapacityRatingMap::new(ws_ref.map_limit);
                    ws_ref.charge(map.memory_bytes());
                    RefCell::new(map)
                });
                let mut map = cell.borrow_mut();
                map.clear();
                let mut bump = false;
                g.for_each_neighbor(u, |_, v, w| {
                    if !bump && !map.add(shared.cluster(v), w) {
                        bump = true;
                    }
                });
                if bump {
                    bumped.lock().unwrap().push(u);
                    return false;
                }
                shared.decide(u, map.iter())
            };
            if sequential {
                order.iter().filter(|u| visit(u)).count()
            } else {
                order.par_iter().filter(|u| visit(u)).count()
            }
        }
        RatingMode::PerWorkerSparseArray => {
            let dense = &ws.dense;
            let visit = |&u: &NodeId| -> bool {
                let slot = rayon::current_thread_index().unwrap_or(0) % dense.len();
                let mut state = dense[slot].lock().unwrap();
                let (ratings, list) = &mut *state;
                g.for_each_neighbor(u, |_, v, w| {
                    let cv = shared.cluster(v);
                    if ratings[cv as usize] == 0 {
                        list.push(cv);
                    }
                    ratings[cv as usize] += w;
                });
                let moved = shared.decide(u, list.iter().map(|&c| (c, ratings[c as usize])));
                for c in list.drain(..) {
                    ratings[c as usize] = 0;
                }
                moved
            };
            if sequential {
                order.iter().filter(|u| visit(u)).count()
            } else {
                order.par_iter().filter(|u| visit(u)).count()
            }
        }
    };

    let mut bumped = bumped.into_inner().unwrap();
    if bumped.is_empty() {
        return Ok(RoundStats { moves, bumped: 0 });
    }
    if !sequential {
        bumped.sort_unstable();
    }
    let t_bump = ws.t_bump;
    ws.sparse_array();
    let LpWorkspace { sparse, flush_maps, tracker, charged, .. } = ws;
    let a = sparse.as_ref().unwrap();
    let (charged, tracker) = (&*charged, *tracker);
    let charge = |bytes: usize| {
        charged.fetch_add(bytes, Ordering::Relaxed);
        if let Some(t) = tracker {
            t.add(bytes);
        }
    };
    let mut moves = moves;
    for &u in &bumped {
        let ratings = aggregate_bumped(g, u, shared.clusters, t_bump, a, flush_maps, &charge);
        if shared.decide(u, ratings.into_iter()) {
            moves += 1;
        }
    }
    Ok(RoundStats { moves, bumped: bumped.len() })
}
