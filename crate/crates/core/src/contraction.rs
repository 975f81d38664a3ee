//! One-pass contraction of a clustering into the coarse CSR graph.
//!
//! Coarse neighborhoods are aggregated per cluster in parallel and appended
//! to an arc array reserved at `2m` entries. A packed (arcs, vertices)
//! counter hands out the write position and the coarse vertex ID together,
//! so offsets are known as soon as a neighborhood is placed. Coarse vertex
//! IDs follow placement order; targets are stored as cluster IDs and remapped
//! in a final pass.

use std::cell::RefCell;
use std::sync::atomic::{AtomicI64, AtomicU32, AtomicUsize, Ordering};
use std::sync::Mutex;

use portable_atomic::AtomicU128;
use rayon::prelude::*;
use thread_local::ThreadLocal;

use crate::clustering::{flush_rating_map, FixedCapacityRatingMap, SparseRatingArray};
use crate::error::{Error, Result};
use crate::graph::{Graph, GraphView};
use crate::io::ReservedBuffer;
use crate::memory::MemoryTracker;
use crate::partition::Clustering;
use crate::{EdgeWeight, NodeId, NodeWeight, INVALID};

/// Arcs written (`d`, low 64 bits) and coarse vertices placed (`s`, high
/// 64 bits), updated together.
#[derive(Debug, Default)]
pub struct DualCounter(AtomicU128);

impl DualCounter {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `(arcs, vertices)` and returns the pair before the update.
    pub fn fetch_add(&self, arcs: usize, vertices: usize) -> (usize, usize) {
        let mut cur = self.0.load(Ordering::Relaxed);
        loop {
            let (d, s) = unpack(cur);
            let next = pack(d + arcs, s + vertices);
            match self.0.compare_exchange_weak(cur, next, Ordering::AcqRel, Ordering::Relaxed) {
                Ok(_) => return (d, s),
                Err(actual) => cur = actual,
            }
        }
    }

    pub fn get(&self) -> (usize, usize) {
        unpack(self.0.load(Ordering::Acquire))
    }
}

#[inline]
fn pack(d: usize, s: usize) -> u128 {
    (d as u128) | ((s as u128) << 64)
}

#[inline]
fn unpack(x: u128) -> (usize, usize) {
    (x as u64 as usize, (x >> 64) as u64 as usize)
}

/// Cluster ID → coarse vertex ID.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoarseMapping {
    pub cluster_to_coarse: Vec<NodeId>,
}

impl CoarseMapping {
    /// Coarse vertex of every fine vertex.
    pub fn fine_to_coarse(&self, c: &Clustering) -> Vec<NodeId> {
        c.assignment().par_iter().map(|&cl| self.cluster_to_coarse[cl as usize]).collect()
    }
}

/// Coarse neighborhoods of several clusters waiting to be placed.
#[derive(Debug)]
pub struct NeighborhoodBuffer {
    targets: Vec<NodeId>,
    weights: Vec<EdgeWeight>,
    /// `(cluster, number of arcs)` per contained neighborhood.
    vertices: Vec<(NodeId, usize)>,
    capacity: usize,
}

impl NeighborhoodBuffer {
    pub fn new(capacity: usize) -> Self {
        Self {
            targets: Vec::with_capacity(capacity),
            weights: Vec::with_capacity(capacity),
            vertices: Vec::new(),
            capacity,
        }
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn num_neighborhoods(&self) -> usize {
        self.vertices.len()
    }

    /// Whether `arcs` more arcs fit without exceeding the capacity.
    pub fn fits(&self, arcs: usize) -> bool {
        self.len() + arcs <= self.capacity
    }

    pub fn push(&mut self, cluster: NodeId, arcs: impl IntoIterator<Item = (NodeId, EdgeWeight)>) {
        let before = self.len();
        for (t, w) in arcs {
            self.targets.push(t);
            self.weights.push(w);
        }
        self.vertices.push((cluster, self.len() - before));
    }

    pub fn memory_bytes(&self) -> usize {
        self.targets.capacity() * 4 + self.weights.capacity() * 8 + self.vertices.capacity() * 16
    }

    fn clear(&mut self) {
        self.targets.clear();
        self.weights.clear();
        self.vertices.clear();
    }
}

/// Output arrays of a contraction in progress.
pub struct CoarseOutput {
    pub targets: ReservedBuffer<NodeId>,
    pub weights: ReservedBuffer<EdgeWeight>,
    pub offsets: Vec<AtomicUsize>,
    pub node_weights: Vec<AtomicI64>,
    pub mapping: Vec<AtomicU32>,
}

impl CoarseOutput {
    /// Reserves room for `arc_bound` arcs, `n_coarse` coarse vertices and
    /// `n_clusters` cluster IDs.
    pub fn new(arc_bound: usize, n_coarse: usize, n_clusters: usize) -> Self {
        Self {
            targets: ReservedBuffer::new(arc_bound),
            weights: ReservedBuffer::new(arc_bound),
            offsets: (0..n_coarse + 1).map(|_| AtomicUsize::new(0)).collect(),
            node_weights: (0..n_coarse).map(|_| AtomicI64::new(0)).collect(),
            mapping: (0..n_clusters).map(|_| AtomicU32::new(INVALID)).collect(),
        }
    }
}

/// A placed batch: arcs `d..d+arcs` hold coarse vertices `s..s+vertices`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ArcRange {
    pub d: usize,
    pub arcs: usize,
    pub s: usize,
    pub vertices: usize,
}

/// Places every neighborhood of `buffer` with one counter transaction:
/// copies the arcs to their range, records offsets, vertex weights and the
/// cluster → coarse ID mapping, and empties the buffer.
pub fn finalize_neighborhoods(
    buffer: &mut NeighborhoodBuffer,
    counter: &DualCounter,
    out: &CoarseOutput,
    cluster_weights: &[NodeWeight],
) -> Result<Option<ArcRange>> {
    if buffer.is_empty() {
        return Ok(None);
    }
    let (d, s) = counter.fetch_add(buffer.len(), buffer.num_neighborhoods());
    if s + buffer.num_neighborhoods() > out.node_weights.len() {
        return Err(Error::Internal("more coarse vertices placed than clusters exist".into()));
    }
    // SAFETY: the counter hands out disjoint ranges.
    unsafe {
        out.targets.write_at(d, &buffer.targets)?;
        out.weights.write_at(d, &buffer.weights)?;
    }
    let mut pos = d;
    for (j, &(cluster, len)) in buffer.vertices.iter().enumerate() {
        out.offsets[s + j].store(pos, Ordering::Relaxed);
        out.node_weights[s + j].store(cluster_weights[cluster as usize], Ordering::Relaxed);
        out.mapping[cluster as usize].store((s + j) as NodeId, Ordering::Relaxed);
        pos += len;
    }
    let range = ArcRange { d, arcs: buffer.len(), s, vertices: buffer.num_neighborhoods() };
    buffer.clear();
    Ok(Some(range))
}

/// Rates the clusters adjacent to cluster `a` (members `members`) into
/// `map`, skipping intra-cluster arcs. Returns `false` once the number of
/// distinct adjacent clusters reaches the map's limit.
pub fn aggregate_coarse_neighborhood<G: GraphView>(
    g: &G,
    assignment: &[NodeId],
    members: &[NodeId],
    a: NodeId,
    map: &mut FixedCapacityRatingMap,
) -> bool {
    map.clear();
    let mut full = false;
    for &u in members {
        g.for_each_neighbor(u, |_, v, w| {
            let b = assignment[v as usize];
            if !full && b != a && !map.add(b, w) {
                full = true;
            }
        });
        if full {
            return false;
        }
    }
    true
}

/// Replaces every cluster ID in `targets` by its coarse vertex ID.
pub fn remap_targets(targets: &mut [NodeId], mapping: &[NodeId]) -> Result<()> {
    let bad = targets
        .par_iter_mut()
        .map(|t| {
            let m = mapping[*t as usize];
            *t = m;
            m == INVALID
        })
        .filter(|&b| b)
        .count();
    if bad > 0 {
        return Err(Error::Internal(format!("{bad} arcs point to unmapped clusters")));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ContractionConfig {
    pub t_bump: usize,
    pub buffer_capacity: usize,
    /// Record every placed [`ArcRange`] in the stats.
    pub record_ranges: bool,
}

impl Default for ContractionConfig {
    fn default() -> Self {
        Self { t_bump: 10_000, buffer_capacity: 32_768, record_ranges: false }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ContractionStats {
    pub bumped: usize,
    pub ranges: Vec<ArcRange>,
    /// Arc slots reserved for the coarse graph (`2m`).
    pub reserved_arcs: usize,
    /// Arc slots actually written (`2m'`).
    pub committed_arcs: usize,
}

/// Contracts `c` into the coarse graph. Cluster `a` becomes a coarse vertex
/// of weight `Σ_{u ∈ a} c(u)`; all arcs between two clusters are merged into
/// one coarse edge carrying their total weight; intra-cluster edges vanish.
pub fn contract<G: GraphView>(
    g: &G,
    c: &Clustering,
    config: &ContractionConfig,
    tracker: Option<&MemoryTracker>,
) -> Result<(Graph, CoarseMapping, ContractionStats)> {
    let n = g.n();
    if c.n() != n {
        return Err(Error::Structural(format!("clustering has {} entries for {n} vertices", c.n())));
    }
    let total: i128 = (0..n as NodeId).into_par_iter().map(|u| g.weighted_degree(u) as i128).sum();
    if total > EdgeWeight::MAX as i128 {
        return Err(Error::Overflow("coarse edge weights"));
    }
    let assignment = c.assignment();
    let cluster_weights = c.cluster_weights();

    // Members of every cluster, bucketed by cluster ID.
    let _bucket_bytes = tracker.map(|t| t.track((2 * n + 1) * std::mem::size_of::<NodeId>()));
    let mut starts = vec![0u32; n + 1];
    for &a in assignment {
        starts[a as usize + 1] += 1;
    }
    let clusters: Vec<NodeId> = (0..n).filter(|&a| starts[a + 1] > 0).map(|a| a as NodeId).collect();
    for i in 0..n {
        starts[i + 1] += starts[i];
    }
    let mut members = vec![0 as NodeId; n];
    {
        let mut fill = starts.clone();
        for (u, &a) in assignment.iter().enumerate() {
            members[fill[a as usize] as usize] = u as NodeId;
            fill[a as usize] += 1;
        }
    }
    let members_of = |a: NodeId| &members[starts[a as usize] as usize..starts[a as usize + 1] as usize];
    let n_coarse = clusters.len();

    let arc_bound = g.arc_count();
    let out = CoarseOutput::new(arc_bound, n_coarse, n);
    let counter = DualCounter::new();
    let ranges = Mutex::new(Vec::new());
    let bumped = Mutex::new(Vec::new());
    let failure: Mutex<Option<Error>> = Mutex::new(None);
    let charged = AtomicUsize::new(0);
    let charge = |bytes: usize| {
        charged.fetch_add(bytes, Ordering::Relaxed);
        if let Some(t) = tracker {
            t.add(bytes);
        }
    };

    let map_limit = config.t_bump.max(2).min(n_coarse + 1);
    let buffer_capacity = config.buffer_capacity.max(config.t_bump);
    let mut locals: ThreadLocal<RefCell<(FixedCapacityRatingMap, NeighborhoodBuffer)>> = ThreadLocal::new();
    let place = |buffer: &mut NeighborhoodBuffer| match finalize_neighborhoods(buffer, &counter, &out, cluster_weights) {
        Ok(Some(range)) => {
            if config.record_ranges {
                ranges.lock().unwrap().push(range);
            }
        }
        Ok(None) => {}
        Err(e) => {
            failure.lock().unwrap().get_or_insert(e);
        }
    };

    clusters.par_iter().for_each(|&a| {
        let cell = locals.get_or(|| {
            let map = FixedCapacityRatingMap::new(map_limit);
            let buffer = NeighborhoodBuffer::new(buffer_capacity);
            charge(map.memory_bytes() + buffer.memory_bytes());
            RefCell::new((map, buffer))
        });
        let mut state = cell.borrow_mut();
        let (map, buffer) = &mut *state;
        if !aggregate_coarse_neighborhood(g, assignment, members_of(a), a, map) {
            bumped.lock().unwrap().push(a);
            return;
        }
        if !buffer.fits(map.len()) {
            place(buffer);
        }
        buffer.push(a, map.iter());
    });
    for cell in locals.iter_mut() {
        place(&mut cell.get_mut().1);
    }
    drop(locals);

    // High-degree clusters: member-parallel aggregation into one sparse
    // array, then sequential placement without contention.
    let mut bumped = bumped.into_inner().unwrap();
    bumped.sort_unstable();
    if !bumped.is_empty() {
        let a_arr = SparseRatingArray::new(n);
        charge(a_arr.memory_bytes());
        let mut flush_maps: ThreadLocal<RefCell<(FixedCapacityRatingMap, Vec<u32>)>> = ThreadLocal::new();
        let mut buffer = NeighborhoodBuffer::new(0);
        let assignment_ref = assignment;
        for &a in &bumped {
            {
                let maps = &flush_maps;
                members_of(a).par_iter().for_each(|&u| {
                    let cell = maps.get_or(|| {
                        let map = FixedCapacityRatingMap::new(config.t_bump.max(2));
                        charge(map.memory_bytes());
                        RefCell::new((map, Vec::new()))
                    });
                    let mut st = cell.borrow_mut();
                    let (map, list) = &mut *st;
                    g.for_each_neighbor(u, |_, v, w| {
                        let b = assignment_ref[v as usize];
                        if b != a && !map.add(b, w) {
                            flush_rating_map(&a_arr, map, list);
                            let _ = map.add(b, w);
                        }
                    });
                });
            }
            for cell in flush_maps.iter_mut() {
                let (map, list) = cell.get_mut();
                flush_rating_map(&a_arr, map, list);
            }
            buffer.push(
                a,
                flush_maps.iter_mut().flat_map(|cell| cell.get_mut().1.iter().map(|&b| (b, a_arr.get(b))).collect::<Vec<_>>()),
            );
            a_arr.reset(flush_maps.iter_mut().map(|cell| &mut cell.get_mut().1));
            place(&mut buffer);
        }
    }
    if let Some(t) = tracker {
        t.sub(charged.load(Ordering::Relaxed));
    }
    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e);
    }

    let (arcs, placed) = counter.get();
    if placed != n_coarse {
        return Err(Error::Internal(format!("placed {placed} of {n_coarse} coarse vertices")));
    }
    let committed_arcs = out.targets.committed_len();
    let CoarseOutput { targets, weights, offsets, node_weights, mapping } = out;
    let mut offsets: Vec<usize> = offsets.into_iter().map(AtomicUsize::into_inner).collect();
    offsets[n_coarse] = arcs;
    let mapping: Vec<NodeId> = mapping.into_iter().map(AtomicU32::into_inner).collect();
    let mut targets = targets.into_vec(arcs)?;
    remap_targets(&mut targets, &mapping)?;
    let weights = weights.into_vec(arcs)?;
    let node_weights = node_weights.into_iter().map(AtomicI64::into_inner).collect();
    let coarse = Graph::from_raw_parts(offsets, targets, weights, node_weights)?;
    let mut ranges = ranges.into_inner().unwrap();
    ranges.sort_unstable_by_key(|r| r.d);
    let stats = ContractionStats { bumped: bumped.len(), ranges, reserved_arcs: arc_bound, committed_arcs };
    Ok((coarse, CoarseMapping { cluster_to_coarse: mapping }, stats))
}
