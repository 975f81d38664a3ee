//! Compressed adjacency: gap + interval + VarInt encoded neighborhoods
//! concatenated into one byte blob, with compact per-vertex byte offsets.
//!
//! Degrees are not stored; each neighborhood starts with its first edge ID and
//! the degree is the difference to the next vertex's header.

pub mod codec;
pub mod varint;

use rayon::prelude::*;

pub use codec::{CodecParams, CHUNK_LEN, CHUNK_THRESHOLD, MIN_INTERVAL_LEN};

use crate::error::{Error, Result};
use crate::graph::GraphView;
use crate::{EdgeId, EdgeWeight, NodeId, NodeWeight};

/// Leading byte of every blob.
pub const FORMAT_VERSION: u8 = 1;

/// Unsigned integers stored with the minimal number of bytes for the largest value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompactOffsets {
    width: usize,
    len: usize,
    bytes: Vec<u8>,
}

impl CompactOffsets {
    pub fn from_values(values: &[usize]) -> Self {
        let max = values.iter().copied().max().unwrap_or(0) as u64;
        let width = ((64 - max.leading_zeros() as usize).div_ceil(8)).max(1);
        let mut bytes = Vec::with_capacity(values.len() * width);
        for &v in values {
            bytes.extend_from_slice(&(v as u64).to_le_bytes()[..width]);
        }
        Self { width, len: values.len(), bytes }
    }

    #[inline]
    pub fn get(&self, i: usize) -> usize {
        let mut buf = [0u8; 8];
        buf[..self.width].copy_from_slice(&self.bytes[i * self.width..(i + 1) * self.width]);
        u64::from_le_bytes(buf) as usize
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn memory_bytes(&self) -> usize {
        self.bytes.len()
    }
}

/// Graph with byte-compressed neighborhoods.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompressedGraph {
    n: usize,
    arcs: usize,
    node_weights: Vec<NodeWeight>,
    offsets: CompactOffsets,
    blob: Vec<u8>,
    params: CodecParams,
    total_node_weight: NodeWeight,
    max_node_weight: NodeWeight,
    max_degree: usize,
}

impl CompressedGraph {
    /// Assembles a graph from an encoded blob. `offsets` holds `n + 1` byte
    /// positions (the last one is the blob length) and the blob must start with
    /// [`FORMAT_VERSION`].
    pub fn from_parts(
        node_weights: Vec<NodeWeight>,
        arcs: usize,
        offsets: &[usize],
        blob: Vec<u8>,
        params: CodecParams,
    ) -> Result<Self> {
        let n = node_weights.len();
        if offsets.len() != n + 1 {
            return Err(Error::Structural(format!("{} offsets for {n} vertices", offsets.len())));
        }
        if blob.first() != Some(&FORMAT_VERSION) {
            return Err(Error::MalformedEncoding { offset: 0, reason: "unknown format version" });
        }
        if offsets[n] != blob.len() || offsets.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Structural("compressed offsets are inconsistent with the blob".into()));
        }
        if arcs % 2 != 0 {
            return Err(Error::Structural(format!("odd arc count {arcs}")));
        }
        let total_node_weight = node_weights
            .iter()
            .try_fold(0i64, |acc, &w| acc.checked_add(w))
            .ok_or(Error::Overflow("summing vertex weights"))?;
        let max_node_weight = node_weights.iter().copied().max().unwrap_or(0);
        let mut g = Self {
            n,
            arcs,
            node_weights,
            offsets: CompactOffsets::from_values(offsets),
            blob,
            params,
            total_node_weight,
            max_node_weight,
            max_degree: 0,
        };
        let mut prev = 0usize;
        for u in 0..n {
            let first = g.try_first_edge(u as NodeId)?;
            if first != prev {
                return Err(Error::MalformedEncoding {
                    offset: g.offsets.get(u),
                    reason: "first-edge headers do not match preceding degrees",
                });
            }
            let next = if u + 1 < n { g.try_first_edge(u as NodeId + 1)? } else { arcs };
            if next < first {
                return Err(Error::MalformedEncoding {
                    offset: g.offsets.get(u + 1),
                    reason: "first-edge headers are not monotone",
                });
            }
            g.max_degree = g.max_degree.max(next - first);
            prev = next;
        }
        if prev != arcs {
            return Err(Error::Structural("first-edge headers do not sum to the arc count".into()));
        }
        Ok(g)
    }

    pub fn params(&self) -> &CodecParams {
        &self.params
    }

    pub fn blob(&self) -> &[u8] {
        &self.blob
    }

    pub fn offsets(&self) -> &CompactOffsets {
        &self.offsets
    }

    pub fn node_weights(&self) -> &[NodeWeight] {
        &self.node_weights
    }

    fn try_first_edge(&self, u: NodeId) -> Result<EdgeId> {
        varint::decode_at(&self.blob, self.offsets.get(u as usize)).map(|(v, _)| v as EdgeId)
    }

    /// Decodes `u`'s header: (first edge, degree, body position).
    fn header(&self, u: NodeId) -> Result<(EdgeId, usize, usize)> {
        let (first, body) = varint::decode_at(&self.blob, self.offsets.get(u as usize))?;
        let next = if (u as usize) + 1 < self.n { self.try_first_edge(u + 1)? } else { self.arcs };
        let first = first as usize;
        if next < first {
            return Err(Error::MalformedEncoding { offset: self.offsets.get(u as usize), reason: "negative degree" });
        }
        Ok((first, next - first, body))
    }

    /// Checked neighborhood decoding; arcs are visited in increasing target order.
    pub fn try_for_each_neighbor<F: FnMut(EdgeId, NodeId, EdgeWeight)>(&self, u: NodeId, f: F) -> Result<()> {
        if u as usize >= self.n {
            return Err(Error::Precondition(format!("vertex {u} out of range")));
        }
        let (first, degree, body) = self.header(u)?;
        let end = codec::decode_body(&self.blob, body, u, degree, first, self.n, &self.params, f)?;
        if end != self.offsets.get(u as usize + 1) {
            return Err(Error::MalformedEncoding { offset: end, reason: "neighborhood length mismatch" });
        }
        Ok(())
    }

    /// Checked parallel decoding (chunks of high-degree vertices in parallel).
    pub fn try_par_for_each_neighbor<F>(&self, u: NodeId, f: F) -> Result<()>
    where
        F: Fn(EdgeId, NodeId, EdgeWeight) + Sync + Send,
    {
        if u as usize >= self.n {
            return Err(Error::Precondition(format!("vertex {u} out of range")));
        }
        let (first, degree, body) = self.header(u)?;
        codec::par_decode_body(&self.blob, body, u, degree, first, self.n, &self.params, f)
    }

    /// Bytes of the compressed representation: blob plus compact offsets.
    pub fn compressed_bytes(&self) -> usize {
        self.blob.len() + self.offsets.memory_bytes()
    }

    /// Bytes of the equivalent CSR with 64-bit offsets, targets, and weights.
    pub fn uncompressed_bytes(&self) -> usize {
        8 * (self.n + 1) + 16 * self.arcs
    }

    /// `uncompressed_bytes / compressed_bytes`.
    pub fn compression_ratio(&self) -> f64 {
        self.uncompressed_bytes() as f64 / self.compressed_bytes() as f64
    }

    pub fn memory_bytes(&self) -> usize {
        self.compressed_bytes() + self.node_weights.len() * std::mem::size_of::<NodeWeight>()
    }
}

impl GraphView for CompressedGraph {
    fn n(&self) -> usize {
        self.n
    }

    fn m(&self) -> usize {
        self.arcs / 2
    }

    fn arc_count(&self) -> usize {
        self.arcs
    }

    fn degree(&self, u: NodeId) -> usize {
        self.header(u).expect("corrupt compressed graph").1
    }

    fn first_edge(&self, u: NodeId) -> EdgeId {
        self.try_first_edge(u).expect("corrupt compressed graph")
    }

    fn node_weight(&self, u: NodeId) -> NodeWeight {
        self.node_weights[u as usize]
    }

    fn total_node_weight(&self) -> NodeWeight {
        self.total_node_weight
    }

    fn max_node_weight(&self) -> NodeWeight {
        self.max_node_weight
    }

    fn max_degree(&self) -> usize {
        self.max_degree
    }

    fn is_edge_weighted(&self) -> bool {
        self.params.edge_weights
    }

    fn for_each_neighbor<F: FnMut(EdgeId, NodeId, EdgeWeight)>(&self, u: NodeId, f: F) {
        self.try_for_each_neighbor(u, f).expect("corrupt compressed graph");
    }

    fn par_for_each_neighbor<F>(&self, u: NodeId, f: F)
    where
        F: Fn(EdgeId, NodeId, EdgeWeight) + Sync + Send,
    {
        self.try_par_for_each_neighbor(u, f).expect("corrupt compressed graph");
    }
}

/// Options for [`compress_graph`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CompressionConfig {
    pub interval_encoding: bool,
    pub chunk_threshold: usize,
    pub chunk_len: usize,
}

impl Default for CompressionConfig {
    fn default() -> Self {
        Self { interval_encoding: true, chunk_threshold: CHUNK_THRESHOLD, chunk_len: CHUNK_LEN }
    }
}

impl CompressionConfig {
    pub fn gap_only() -> Self {
        Self { interval_encoding: false, ..Self::default() }
    }

    pub fn params(&self, edge_weights: bool) -> CodecParams {
        CodecParams {
            interval_encoding: self.interval_encoding,
            edge_weights,
            chunk_threshold: self.chunk_threshold,
            chunk_len: self.chunk_len.max(1),
        }
    }
}

/// Sorted copy of `u`'s neighborhood.
pub(crate) fn sorted_neighborhood<G: GraphView>(g: &G, u: NodeId, buf: &mut Vec<(NodeId, EdgeWeight)>) {
    buf.clear();
    g.for_each_neighbor(u, |_, v, w| buf.push((v, w)));
    if buf.windows(2).any(|w| w[0].0 > w[1].0) {
        buf.sort_unstable_by_key(|&(v, _)| v);
    }
}

/// Sequential compression of a validated graph. Neighborhoods are sorted by
/// target before encoding, so edge IDs of the result follow sorted order.
pub fn compress_graph<G: GraphView>(g: &G, config: &CompressionConfig) -> Result<CompressedGraph> {
    let params = config.params(g.is_edge_weighted());
    let n = g.n();
    let mut blob = vec![FORMAT_VERSION];
    let mut offsets = Vec::with_capacity(n + 1);
    let mut buf = Vec::new();
    let mut first_edge = 0usize;
    for u in 0..n as NodeId {
        offsets.push(blob.len());
        sorted_neighborhood(g, u, &mut buf);
        codec::encode_neighborhood(u, first_edge, &buf, &params, &mut blob)?;
        first_edge += buf.len();
    }
    offsets.push(blob.len());
    let node_weights = (0..n as NodeId).into_par_iter().map(|u| g.node_weight(u)).collect();
    CompressedGraph::from_parts(node_weights, first_edge, &offsets, blob, params)
}

/// `bytes(64-bit CSR) / bytes(compressed)` for `g` under `config`.
pub fn compression_ratio<G: GraphView>(g: &G, config: &CompressionConfig) -> Result<f64> {
    Ok(compress_graph(g, config)?.compression_ratio())
}
