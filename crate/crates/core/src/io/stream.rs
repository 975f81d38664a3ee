//! Parallel compression in a single pass over the neighborhoods.
//!
//! Vertices are cut into packets of consecutive IDs with similar work. Each
//! worker claims the next packet, encodes its neighborhood bodies into a local
//! buffer, then waits until all preceding packets have been placed. Placement
//! fixes the packet's first edge ID and byte range (headers are materialized
//! only now, since they depend on the preceding degrees), advances the shared
//! end position, and releases the next packet; the copy into the
//! over-reserved output happens after the release.

use std::sync::atomic::{AtomicI64, AtomicUsize, Ordering};
use std::sync::{Condvar, Mutex};

use crate::compressed::{codec, varint, CompressedGraph, CompressionConfig, FORMAT_VERSION};
use crate::error::{Error, Result};
use crate::graph::GraphView;
use crate::io::reserved::ReservedBuffer;
use crate::{EdgeWeight, NodeId, NodeWeight};

/// Random access to the neighborhoods of an input that is being compressed.
pub trait NeighborhoodSource: Sync {
    fn n(&self) -> usize;

    /// Upper bound on the number of arcs (2m).
    fn arc_count_bound(&self) -> usize;

    fn has_edge_weights(&self) -> bool;

    /// Relative cost of reading `u`, used to size packets.
    fn work_estimate(&self, u: NodeId) -> usize;

    /// Reads `u`'s neighborhood (any order, no self-loops) into `out` and
    /// returns `u`'s weight.
    fn read_vertex(&self, u: NodeId, out: &mut Vec<(NodeId, EdgeWeight)>) -> Result<NodeWeight>;
}

/// Adapter exposing an in-memory graph as a source.
pub struct GraphSource<'a, G>(pub &'a G);

impl<G: GraphView> NeighborhoodSource for GraphSource<'_, G> {
    fn n(&self) -> usize {
        self.0.n()
    }

    fn arc_count_bound(&self) -> usize {
        self.0.arc_count()
    }

    fn has_edge_weights(&self) -> bool {
        self.0.is_edge_weighted()
    }

    fn work_estimate(&self, u: NodeId) -> usize {
        self.0.degree(u)
    }

    fn read_vertex(&self, u: NodeId, out: &mut Vec<(NodeId, EdgeWeight)>) -> Result<NodeWeight> {
        out.clear();
        self.0.for_each_neighbor(u, |_, v, w| out.push((v, w)));
        Ok(self.0.node_weight(u))
    }
}

/// Instrumentation of one [`stream_compress`] run.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StreamStats {
    pub packets: usize,
    /// `(packet index, byte start, byte length)` in placement order.
    pub placements: Vec<(usize, usize, usize)>,
    pub capacity_upper_bound: usize,
    pub committed_len: usize,
    pub neighborhood_reads: usize,
}

/// Default packet size: `max(4096, 2m / (8 · workers))` units of work.
pub fn default_packet_budget(arcs: usize, workers: usize) -> usize {
    (arcs / (8 * workers.max(1))).max(4096)
}

/// Worst-case size of the whole blob for `n` vertices and `arcs` arcs.
fn blob_upper_bound(n: usize, arcs: usize, params: &codec::CodecParams) -> usize {
    let header = varint::encoded_len(arcs as u64);
    let per_arc = 5 + if params.edge_weights { varint::MAX_VARINT_LEN } else { 0 };
    let counts = if params.interval_encoding { 5 } else { 0 };
    let chunk_count = arcs / params.chunk_len.max(1) + 2 * (arcs / params.chunk_threshold.max(1)) + 1;
    let directory = (varint::MAX_VARINT_LEN + counts) * chunk_count;
    1 + n * (header + counts) + arcs * per_arc + directory
}

fn make_packets<S: NeighborhoodSource + ?Sized>(source: &S, budget: usize) -> Vec<(NodeId, NodeId)> {
    let n = source.n() as NodeId;
    let mut packets = Vec::new();
    let mut start = 0;
    let mut work = 0usize;
    for u in 0..n {
        work += source.work_estimate(u) + 1;
        if work >= budget {
            packets.push((start, u + 1));
            start = u + 1;
            work = 0;
        }
    }
    if start < n {
        packets.push((start, n));
    }
    packets
}

struct Cursor {
    next_packet: usize,
    byte_end: usize,
    edge_end: usize,
}

struct EncodedPacket {
    bodies: Vec<u8>,
    /// Per vertex: end of its body in `bodies`, and its degree.
    vertices: Vec<(usize, usize)>,
}

/// Compresses `source` in one pass using `workers` threads. The result is
/// byte-identical for every worker count and packet budget.
pub fn stream_compress<S: NeighborhoodSource + ?Sized>(
    source: &S,
    config: &CompressionConfig,
    packet_budget: Option<usize>,
    workers: usize,
) -> Result<(CompressedGraph, StreamStats)> {
    let workers = workers.max(1);
    let n = source.n();
    let params = config.params(source.has_edge_weights());
    let budget = packet_budget.unwrap_or_else(|| default_packet_budget(source.arc_count_bound(), workers)).max(1);
    let packets = make_packets(source, budget);

    let capacity = blob_upper_bound(n, source.arc_count_bound(), &params);
    let blob = ReservedBuffer::<u8>::new(capacity);
    unsafe { blob.write_at(0, &[FORMAT_VERSION])? };
    let offsets: Vec<AtomicUsize> = (0..n + 1).map(|_| AtomicUsize::new(0)).collect();
    let node_weights: Vec<AtomicI64> = (0..n).map(|_| AtomicI64::new(0)).collect();

    let claim = AtomicUsize::new(0);
    let reads = AtomicUsize::new(0);
    let cursor = Mutex::new(Cursor { next_packet: 0, byte_end: 1, edge_end: 0 });
    let turn = Condvar::new();
    let placements = Mutex::new(Vec::with_capacity(packets.len()));
    let failure: Mutex<Option<Error>> = Mutex::new(None);

    let encode_packet = |(start, end): (NodeId, NodeId)| -> Result<EncodedPacket> {
        let mut nbrs = Vec::new();
        let mut packet = EncodedPacket { bodies: Vec::new(), vertices: Vec::with_capacity((end - start) as usize) };
        for u in start..end {
            let w = source.read_vertex(u, &mut nbrs)?;
            reads.fetch_add(1, Ordering::Relaxed);
            node_weights[u as usize].store(w, Ordering::Relaxed);
            nbrs.sort_unstable_by_key(|&(v, _)| v);
            codec::encode_body(u, &nbrs, &params, &mut packet.bodies)?;
            packet.vertices.push((packet.bodies.len(), nbrs.len()));
        }
        Ok(packet)
    };

    let worker = || loop {
        let i = claim.fetch_add(1, Ordering::Relaxed);
        if i >= packets.len() {
            return;
        }
        let (start, _) = packets[i];
        let encoded = encode_packet(packets[i]);

        let mut cur = cursor.lock().unwrap();
        while cur.next_packet != i {
            cur = turn.wait(cur).unwrap();
        }
        let placed = encoded.and_then(|p| {
            let mut edge = cur.edge_end;
            let mut bytes = 0usize;
            for &(_, degree) in &p.vertices {
                bytes += varint::encoded_len(edge as u64);
                edge += degree;
            }
            bytes += p.bodies.len();
            let byte_start = cur.byte_end;
            if byte_start + bytes > capacity {
                return Err(Error::Internal(format!(
                    "compressed size exceeds the reserved upper bound {capacity}"
                )));
            }
            let edge_start = cur.edge_end;
            cur.byte_end += bytes;
            cur.edge_end = edge;
            Ok((p, byte_start, edge_start, bytes))
        });
        cur.next_packet += 1;
        drop(cur);
        turn.notify_all();

        match placed {
            Ok((p, byte_start, edge_start, bytes)) => {
                placements.lock().unwrap().push((i, byte_start, bytes));
                let mut out = Vec::with_capacity(bytes);
                let mut edge = edge_start;
                let mut body_start = 0;
                for (j, &(body_end, degree)) in p.vertices.iter().enumerate() {
                    offsets[start as usize + j].store(byte_start + out.len(), Ordering::Relaxed);
                    varint::encode(edge as u64, &mut out);
                    out.extend_from_slice(&p.bodies[body_start..body_end]);
                    body_start = body_end;
                    edge += degree;
                }
                // SAFETY: placement hands out disjoint byte ranges.
                if let Err(e) = unsafe { blob.write_at(byte_start, &out) } {
                    failure.lock().unwrap().get_or_insert(e);
                }
            }
            Err(e) => {
                failure.lock().unwrap().get_or_insert(e);
            }
        }
    };

    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(worker);
        }
    });

    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e);
    }
    let cur = cursor.into_inner().unwrap();
    if cur.edge_end % 2 != 0 {
        return Err(Error::Structural("odd number of arcs; the input is not symmetric".into()));
    }
    let mut offsets: Vec<usize> = offsets.into_iter().map(AtomicUsize::into_inner).collect();
    offsets[n] = cur.byte_end;
    let committed_len = blob.committed_len();
    let stats = StreamStats {
        packets: packets.len(),
        placements: placements.into_inner().unwrap(),
        capacity_upper_bound: capacity,
        committed_len,
        neighborhood_reads: reads.into_inner(),
    };
    let blob = blob.into_vec(cur.byte_end)?;
    let node_weights = node_weights.into_iter().map(AtomicI64::into_inner).collect();
    let graph = CompressedGraph::from_parts(node_weights, cur.edge_end, &offsets, blob, params)?;
    Ok((graph, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compressed::compress_graph;
    use crate::{generators, Graph};

    #[test]
    fn matches_sequential_compression() {
        let g = generators::random_geometric(3000, 12.0, 5);
        let reference = compress_graph(&g, &CompressionConfig::default()).unwrap();
        for workers in [1, 3, 8] {
            let (cg, stats) = stream_compress(&GraphSource(&g), &CompressionConfig::default(), Some(500), workers).unwrap();
            assert_eq!(cg, reference);
            assert_eq!(stats.neighborhood_reads, g.n());
            assert_eq!(stats.committed_len, cg.blob().len());
            assert!(stats.capacity_upper_bound >= stats.committed_len);
        }
    }

    #[test]
    fn triangle_with_unit_budget_places_three_packets_in_order() {
        let g = Graph::from_unweighted_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let (_, stats) = stream_compress(&GraphSource(&g), &CompressionConfig::default(), Some(1), 2).unwrap();
        assert_eq!(stats.packets, 3);
        let idx: Vec<usize> = stats.placements.iter().map(|p| p.0).collect();
        assert_eq!(idx, vec![0, 1, 2]);
        for w in stats.placements.windows(2) {
            assert_eq!(w[0].1 + w[0].2, w[1].1);
        }
    }

    #[test]
    fn empty_input() {
        let g = Graph::from_unweighted_edges(0, &[]).unwrap();
        let (cg, stats) = stream_compress(&GraphSource(&g), &CompressionConfig::default(), None, 4).unwrap();
        assert_eq!(cg.n(), 0);
        assert_eq!(cg.blob(), &[FORMAT_VERSION]);
        assert_eq!(cg.offsets().len(), 1);
        assert_eq!(stats.packets, 0);
    }

    #[test]
    fn read_errors_propagate_without_deadlock() {
        struct Failing;
        impl NeighborhoodSource for Failing {
            fn n(&self) -> usize {
                100
            }
            fn arc_count_bound(&self) -> usize {
                0
            }
            fn has_edge_weights(&self) -> bool {
                false
            }
            fn work_estimate(&self, _: NodeId) -> usize {
                1
            }
            fn read_vertex(&self, u: NodeId, out: &mut Vec<(NodeId, EdgeWeight)>) -> Result<NodeWeight> {
                out.clear();
                if u == 17 {
                    return Err(Error::Structural("boom".into()));
                }
                Ok(1)
            }
        }
        assert!(stream_compress(&Failing, &CompressionConfig::default(), Some(3), 4).is_err());
    }
}
