//! Byte layout of one encoded neighborhood.
//!
//! ```text
//! neighborhood := firstEdgeId:varint body
//! body         := segment                                  if degree <= chunk threshold
//!               | chunkCount:varint chunkLen:varint* segment*   otherwise
//! segment      := [intervalCount:varint] interval* residual*
//! interval     := startCode:varint (length - 3):varint weight*length
//! residual     := gapCode:varint weight
//! ```
//!
//! * The first interval start and the first residual are stored as
//!   `zigzag(target - source)`; later ones as the gap to the previous element
//!   minus one (interval gaps are measured from the exclusive end of the
//!   previous interval).
//! * `intervalCount` is present only when interval encoding is enabled.
//! * Weights are present only for edge-weighted graphs. They follow the
//!   emission order (all interval members, then residuals): the first weight
//!   of a segment is stored as is, every other one as `zigzag(w - previous)`.
//! * Every chunk is a self-contained segment of `chunk_len` arcs (the last
//!   one may be shorter), so chunks decode independently.
//!
//! Decoding merges the interval and residual streams, so arcs are reported in
//! increasing target order together with `firstEdgeId + position`.

use rayon::prelude::*;

use super::varint::{self, decode_at, unzigzag, zigzag};
use crate::error::{Error, Result};
use crate::{EdgeId, EdgeWeight, NodeId};

/// Shortest run of consecutive neighbor IDs stored as an interval.
pub const MIN_INTERVAL_LEN: usize = 3;
/// Neighborhoods with more arcs than this are split into chunks.
pub const CHUNK_THRESHOLD: usize = 10_000;
/// Arcs per chunk.
pub const CHUNK_LEN: usize = 1_000;

/// Graph-wide encoding switches. They are stored with the graph and must be
/// identical for encoder and decoder.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CodecParams {
    pub interval_encoding: bool,
    pub edge_weights: bool,
    pub chunk_threshold: usize,
    pub chunk_len: usize,
}

impl Default for CodecParams {
    fn default() -> Self {
        Self {
            interval_encoding: true,
            edge_weights: true,
            chunk_threshold: CHUNK_THRESHOLD,
            chunk_len: CHUNK_LEN,
        }
    }
}

impl CodecParams {
    pub fn num_chunks(&self, degree: usize) -> usize {
        if degree > self.chunk_threshold {
            degree.div_ceil(self.chunk_len)
        } else {
            1
        }
    }

    /// Worst-case encoded size of a neighborhood body of the given degree
    /// (without the first-edge header).
    pub fn body_upper_bound(&self, degree: usize) -> usize {
        // Targets are 32-bit, so a zigzag-mapped difference needs at most 33
        // bits (5 VarInt bytes); weight deltas may need all 10.
        let per_arc = 5 + if self.edge_weights { varint::MAX_VARINT_LEN } else { 0 };
        let chunks = self.num_chunks(degree);
        let directory = if chunks > 1 { varint::MAX_VARINT_LEN * (chunks + 1) } else { 0 };
        let counts = if self.interval_encoding { 5 * chunks } else { 0 };
        directory + counts + degree * per_arc
    }
}

fn check_sorted(source: NodeId, neighbors: &[(NodeId, EdgeWeight)]) -> Result<()> {
    for (i, &(v, w)) in neighbors.iter().enumerate() {
        if v == source {
            return Err(Error::Precondition(format!("self-loop at vertex {source}")));
        }
        if w < 1 {
            return Err(Error::Precondition(format!("weight {w} on arc ({source},{v}) is not positive")));
        }
        if i > 0 && neighbors[i - 1].0 >= v {
            return Err(Error::Precondition(format!(
                "neighbors of {source} are not strictly increasing at position {i}"
            )));
        }
    }
    Ok(())
}

struct WeightWriter {
    prev: Option<EdgeWeight>,
}

impl WeightWriter {
    #[inline]
    fn push(&mut self, w: EdgeWeight, out: &mut Vec<u8>) {
        match self.prev {
            None => varint::encode(w as u64, out),
            Some(p) => varint::encode(zigzag(w.wrapping_sub(p)), out),
        }
        self.prev = Some(w);
    }
}

/// Greedy left-to-right extraction of maximal runs with length ≥ 3.
/// Returns `(start index, length)` pairs into `neighbors`.
pub fn find_intervals(neighbors: &[(NodeId, EdgeWeight)]) -> Vec<(usize, usize)> {
    let mut intervals = Vec::new();
    let mut i = 0;
    while i < neighbors.len() {
        let mut j = i;
        while j + 1 < neighbors.len() && neighbors[j + 1].0 == neighbors[j].0 + 1 {
            j += 1;
        }
        let len = j - i + 1;
        if len >= MIN_INTERVAL_LEN {
            intervals.push((i, len));
        }
        i = j + 1;
    }
    intervals
}

fn encode_segment(source: NodeId, neighbors: &[(NodeId, EdgeWeight)], params: &CodecParams, out: &mut Vec<u8>) {
    let mut weights = WeightWriter { prev: None };
    let intervals = if params.interval_encoding { find_intervals(neighbors) } else { Vec::new() };
    if params.interval_encoding {
        varint::encode(intervals.len() as u64, out);
    }
    let mut prev_end: Option<i64> = None;
    for &(i, len) in &intervals {
        let start = neighbors[i].0 as i64;
        match prev_end {
            None => varint::encode(zigzag(start - source as i64), out),
            Some(end) => varint::encode((start - end - 1) as u64, out),
        }
        varint::encode((len - MIN_INTERVAL_LEN) as u64, out);
        if params.edge_weights {
            for &(_, w) in &neighbors[i..i + len] {
                weights.push(w, out);
            }
        }
        prev_end = Some(start + len as i64);
    }

    let mut prev: Option<i64> = None;
    let mut next_interval = intervals.iter().peekable();
    let mut i = 0;
    while i < neighbors.len() {
        if let Some(&&(start, len)) = next_interval.peek() {
            if start == i {
                i += len;
                next_interval.next();
                continue;
            }
        }
        let (v, w) = neighbors[i];
        match prev {
            None => varint::encode(zigzag(v as i64 - source as i64), out),
            Some(p) => varint::encode((v as i64 - p - 1) as u64, out),
        }
        if params.edge_weights {
            weights.push(w, out);
        }
        prev = Some(v as i64);
        i += 1;
    }
}

/// Encodes the body of `source`'s neighborhood (everything after the
/// first-edge header). `neighbors` must be sorted by strictly increasing target.
pub fn encode_body(
    source: NodeId,
    neighbors: &[(NodeId, EdgeWeight)],
    params: &CodecParams,
    out: &mut Vec<u8>,
) -> Result<()> {
    check_sorted(source, neighbors)?;
    if neighbors.len() <= params.chunk_threshold {
        encode_segment(source, neighbors, params, out);
        return Ok(());
    }
    let chunks: Vec<Vec<u8>> = neighbors
        .chunks(params.chunk_len)
        .map(|chunk| {
            let mut buf = Vec::new();
            encode_segment(source, chunk, params, &mut buf);
            buf
        })
        .collect();
    varint::encode(chunks.len() as u64, out);
    for c in &chunks {
        varint::encode(c.len() as u64, out);
    }
    for c in &chunks {
        out.extend_from_slice(c);
    }
    Ok(())
}

/// Encodes a whole neighborhood: first-edge header followed by the body.
pub fn encode_neighborhood(
    source: NodeId,
    first_edge: EdgeId,
    neighbors: &[(NodeId, EdgeWeight)],
    params: &CodecParams,
    out: &mut Vec<u8>,
) -> Result<()> {
    varint::encode(first_edge as u64, out);
    encode_body(source, neighbors, params, out)
}

#[inline]
fn read(bytes: &[u8], pos: &mut usize) -> Result<u64> {
    let (v, next) = decode_at(bytes, *pos)?;
    *pos = next;
    Ok(v)
}

struct WeightReader {
    prev: Option<EdgeWeight>,
}

impl WeightReader {
    #[inline]
    fn next(&mut self, bytes: &[u8], pos: &mut usize, weighted: bool) -> Result<EdgeWeight> {
        if !weighted {
            return Ok(1);
        }
        let at = *pos;
        let raw = read(bytes, pos)?;
        let w = match self.prev {
            None => i64::try_from(raw).ok(),
            Some(p) => p.checked_add(unzigzag(raw)),
        };
        match w {
            Some(w) if w >= 1 => {
                self.prev = Some(w);
                Ok(w)
            }
            _ => Err(Error::MalformedEncoding { offset: at, reason: "non-positive edge weight" }),
        }
    }
}

#[inline]
fn target_from(base: i64, delta: i64, n: usize, at: usize) -> Result<NodeId> {
    match base.checked_add(delta) {
        Some(v) if v >= 0 && (v as u64) < n as u64 => Ok(v as NodeId),
        _ => Err(Error::MalformedEncoding { offset: at, reason: "neighbor out of range" }),
    }
}

/// Decodes one segment of `count` arcs starting at `pos` and returns the
/// position just past it.
fn decode_segment<F: FnMut(EdgeId, NodeId, EdgeWeight)>(
    bytes: &[u8],
    mut pos: usize,
    source: NodeId,
    count: usize,
    first_edge: EdgeId,
    n: usize,
    params: &CodecParams,
    visit: &mut F,
) -> Result<usize> {
    let weighted = params.edge_weights;
    let src = source as i64;
    let mut interval_count = 0usize;
    let interval_pos = if params.interval_encoding {
        interval_count = read(bytes, &mut pos)? as usize;
        pos
    } else {
        pos
    };

    // Skip over the interval section to locate the residuals and the weight
    // that precedes them in the delta chain.
    let mut interval_arcs = 0usize;
    let mut chain = WeightReader { prev: None };
    for _ in 0..interval_count {
        let _start = read(bytes, &mut pos)?;
        let at = pos;
        let len = read(bytes, &mut pos)? as usize + MIN_INTERVAL_LEN;
        interval_arcs = interval_arcs
            .checked_add(len)
            .filter(|&a| a <= count)
            .ok_or(Error::MalformedEncoding { offset: at, reason: "intervals exceed degree" })?;
        for _ in 0..len {
            chain.next(bytes, &mut pos, weighted)?;
        }
    }
    let residual_count = count - interval_arcs;

    let mut ipos = interval_pos;
    let mut iw = WeightReader { prev: None };
    let mut intervals_left = interval_count;
    let mut cur_target = 0i64;
    let mut cur_left = 0usize;
    let mut prev_end: Option<i64> = None;

    let mut rpos = pos;
    let mut rw = chain;
    let mut residuals_left = residual_count;
    let mut next_residual: Option<i64> = None;
    let mut prev_residual: Option<i64> = None;

    let mut edge = first_edge;
    loop {
        if cur_left == 0 && intervals_left > 0 {
            let at = ipos;
            let code = read(bytes, &mut ipos)?;
            let start = match prev_end {
                None => target_from(src, unzigzag(code), n, at)? as i64,
                Some(end) => target_from(end, code as i64 + 1, n, at)? as i64,
            };
            cur_left = read(bytes, &mut ipos)? as usize + MIN_INTERVAL_LEN;
            cur_target = start;
            prev_end = Some(start + cur_left as i64);
            intervals_left -= 1;
        }
        if next_residual.is_none() && residuals_left > 0 {
            let at = rpos;
            let code = read(bytes, &mut rpos)?;
            let v = match prev_residual {
                None => target_from(src, unzigzag(code), n, at)?,
                Some(p) => target_from(p, code as i64 + 1, n, at)?,
            };
            next_residual = Some(v as i64);
            prev_residual = Some(v as i64);
            residuals_left -= 1;
        }
        let take_interval = match (cur_left > 0, next_residual) {
            (false, None) => break,
            (true, None) => true,
            (false, Some(_)) => false,
            (true, Some(r)) => cur_target < r,
        };
        if take_interval {
            let w = iw.next(bytes, &mut ipos, weighted)?;
            if cur_target as u64 >= n as u64 {
                return Err(Error::MalformedEncoding { offset: ipos, reason: "interval leaves vertex range" });
            }
            visit(edge, cur_target as NodeId, w);
            cur_target += 1;
            cur_left -= 1;
        } else {
            let v = next_residual.take().unwrap();
            let w = rw.next(bytes, &mut rpos, weighted)?;
            visit(edge, v as NodeId, w);
        }
        edge += 1;
    }
    Ok(rpos)
}

/// Location of the chunks of a chunked neighborhood.
struct ChunkDirectory {
    /// Absolute byte offsets of each chunk, plus the end offset.
    bounds: Vec<usize>,
}

fn read_chunk_directory(bytes: &[u8], mut pos: usize, degree: usize, params: &CodecParams) -> Result<ChunkDirectory> {
    let at = pos;
    let count = read(bytes, &mut pos)? as usize;
    if count != params.num_chunks(degree) {
        return Err(Error::MalformedEncoding { offset: at, reason: "unexpected chunk count" });
    }
    let mut lens = Vec::with_capacity(count);
    for _ in 0..count {
        lens.push(read(bytes, &mut pos)? as usize);
    }
    let mut bounds = Vec::with_capacity(count + 1);
    bounds.push(pos);
    for len in lens {
        let next = pos
            .checked_add(len)
            .filter(|&e| e <= bytes.len())
            .ok_or(Error::MalformedEncoding { offset: at, reason: "chunk extends past the blob" })?;
        bounds.push(next);
        pos = next;
    }
    Ok(ChunkDirectory { bounds })
}

/// Decodes the body at `pos` for a neighborhood with `degree` arcs whose
/// first edge ID is `first_edge`. Returns the end position.
pub fn decode_body<F: FnMut(EdgeId, NodeId, EdgeWeight)>(
    bytes: &[u8],
    pos: usize,
    source: NodeId,
    degree: usize,
    first_edge: EdgeId,
    n: usize,
    params: &CodecParams,
    mut visit: F,
) -> Result<usize> {
    if degree <= params.chunk_threshold {
        return decode_segment(bytes, pos, source, degree, first_edge, n, params, &mut visit);
    }
    let dir = read_chunk_directory(bytes, pos, degree, params)?;
    for c in 0..dir.bounds.len() - 1 {
        let arcs = params.chunk_len.min(degree - c * params.chunk_len);
        let first = first_edge + c * params.chunk_len;
        let end = decode_segment(bytes, dir.bounds[c], source, arcs, first, n, params, &mut visit)?;
        if end != dir.bounds[c + 1] {
            return Err(Error::MalformedEncoding { offset: dir.bounds[c], reason: "chunk length mismatch" });
        }
    }
    Ok(*dir.bounds.last().unwrap())
}

/// Parallel variant of [`decode_body`]: chunks are decoded by independent
/// workers of the current rayon pool. Unchunked bodies, and pools with a
/// single worker, decode sequentially in order.
pub fn par_decode_body<F>(
    bytes: &[u8],
    pos: usize,
    source: NodeId,
    degree: usize,
    first_edge: EdgeId,
    n: usize,
    params: &CodecParams,
    visit: F,
) -> Result<()>
where
    F: Fn(EdgeId, NodeId, EdgeWeight) + Sync + Send,
{
    if degree <= params.chunk_threshold || rayon::current_num_threads() == 1 {
        return decode_body(bytes, pos, source, degree, first_edge, n, params, &visit).map(|_| ());
    }
    let dir = read_chunk_directory(bytes, pos, degree, params)?;
    (0..dir.bounds.len() - 1).into_par_iter().try_for_each(|c| {
        let arcs = params.chunk_len.min(degree - c * params.chunk_len);
        let first = first_edge + c * params.chunk_len;
        let mut f = |e, v, w| visit(e, v, w);
        let end = decode_segment(bytes, dir.bounds[c], source, arcs, first, n, params, &mut f)?;
        if end != dir.bounds[c + 1] {
            return Err(Error::MalformedEncoding { offset: dir.bounds[c], reason: "chunk length mismatch" });
        }
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unweighted() -> CodecParams {
        CodecParams { edge_weights: false, ..CodecParams::default() }
    }

    fn unit(targets: &[NodeId]) -> Vec<(NodeId, EdgeWeight)> {
        targets.iter().map(|&v| (v, 1)).collect()
    }

    fn roundtrip(source: NodeId, nbrs: &[(NodeId, EdgeWeight)], params: &CodecParams, n: usize) -> Vec<u8> {
        let mut out = Vec::new();
        encode_body(source, nbrs, params, &mut out).unwrap();
        let mut decoded = Vec::new();
        let end = decode_body(&out, 0, source, nbrs.len(), 7, n, params, |e, v, w| decoded.push((e, v, w))).unwrap();
        assert_eq!(end, out.len());
        let expected: Vec<_> = nbrs.iter().enumerate().map(|(i, &(v, w))| (7 + i, v, w)).collect();
        assert_eq!(decoded, expected);
        out
    }

    #[test]
    fn interval_and_residual_layout() {
        // source 10: interval (3, len 3) and residual 9
        let bytes = roundtrip(10, &unit(&[3, 4, 5, 9]), &unweighted(), 16);
        // count=1, start=zigzag(3-10)=13, len-3=0, residual zigzag(9-10)=1
        assert_eq!(bytes, vec![1, 13, 0, 1]);
    }

    #[test]
    fn residual_gaps_layout() {
        let bytes = roundtrip(0, &unit(&[5, 7, 12]), &unweighted(), 16);
        // count=0, zigzag(5)=10, 7-5-1=1, 12-7-1=4
        assert_eq!(bytes, vec![0, 10, 1, 4]);
        let gap_only = CodecParams { interval_encoding: false, ..unweighted() };
        assert_eq!(roundtrip(0, &unit(&[5, 7, 12]), &gap_only, 16), vec![10, 1, 4]);
    }

    #[test]
    fn empty_neighborhood() {
        assert_eq!(roundtrip(3, &[], &unweighted(), 4), vec![0]);
        let gap_only = CodecParams { interval_encoding: false, ..unweighted() };
        assert!(roundtrip(3, &[], &gap_only, 4).is_empty());
    }

    #[test]
    fn weights_follow_emission_order() {
        let nbrs = vec![(1, 5), (2, 3), (3, 9), (8, 2), (20, 1_000_000)];
        let bytes = roundtrip(0, &nbrs, &CodecParams::default(), 32);
        // count=1; interval start zigzag(1)=2, len 0, weights 5, zz(-2)=3, zz(6)=12;
        // residual zigzag(8)=16, weight zz(2-9)=13; residual 20-8-1=11, weight zz(999998)
        let mut expected = vec![1, 2, 0, 5, 3, 12, 16, 13, 11];
        varint::encode(zigzag(999_998), &mut expected);
        assert_eq!(bytes, expected);
    }

    #[test]
    fn interleaved_intervals_decode_in_order() {
        let targets: Vec<NodeId> = vec![0, 2, 3, 4, 6, 7, 8, 9, 11, 13, 14, 15, 100];
        let nbrs: Vec<_> = targets.iter().map(|&v| (v, v as i64 + 1)).collect();
        roundtrip(50, &nbrs, &CodecParams::default(), 200);
        assert_eq!(find_intervals(&nbrs), vec![(1, 3), (4, 4), (9, 3)]);
    }

    #[test]
    fn chunked_neighborhood_roundtrip() {
        let params = CodecParams { chunk_threshold: 10, chunk_len: 4, ..CodecParams::default() };
        let nbrs: Vec<_> = (1..=23).map(|v| (v * 2, (v % 5 + 1) as i64)).collect();
        let bytes = roundtrip(0, &nbrs, &params, 64);
        assert_eq!(bytes[0], 6); // ⌈23/4⌉ chunks
    }

    #[test]
    fn threshold_plus_one_gives_two_chunks() {
        let params = CodecParams::default();
        assert_eq!(params.num_chunks(CHUNK_THRESHOLD), 1);
        assert_eq!(params.num_chunks(CHUNK_THRESHOLD + 1), 11);
        let small = CodecParams { chunk_threshold: 1000, chunk_len: 1000, ..params };
        assert_eq!(small.num_chunks(1001), 2);
        let nbrs: Vec<_> = (1..=1001).map(|v| (v, 1)).collect();
        let bytes = roundtrip(0, &nbrs, &small, 2000);
        let (chunks, _) = varint::decode(&bytes).unwrap();
        assert_eq!(chunks, 2);
    }

    #[test]
    fn precondition_errors() {
        let mut out = Vec::new();
        let p = CodecParams::default();
        assert!(matches!(encode_body(0, &unit(&[3, 2]), &p, &mut out), Err(Error::Precondition(_))));
        assert!(matches!(encode_body(0, &unit(&[2, 2]), &p, &mut out), Err(Error::Precondition(_))));
        assert!(matches!(encode_body(2, &unit(&[2]), &p, &mut out), Err(Error::Precondition(_))));
        assert!(matches!(encode_body(0, &[(1, 0)], &p, &mut out), Err(Error::Precondition(_))));
    }

    #[test]
    fn corrupt_bytes_are_reported() {
        let p = unweighted();
        // residual pointing outside [0, n)
        let err = decode_body(&[0, 40], 0, 0, 1, 0, 4, &p, |_, _, _| {}).unwrap_err();
        assert!(matches!(err, Error::MalformedEncoding { offset: 1, .. }));
        // truncated
        assert!(decode_body(&[0], 0, 0, 1, 0, 4, &p, |_, _, _| {}).is_err());
        // intervals claiming more arcs than the degree
        assert!(decode_body(&[1, 2, 5], 0, 0, 3, 0, 64, &p, |_, _, _| {}).is_err());
    }

    #[test]
    fn upper_bound_holds() {
        let params = CodecParams { chunk_threshold: 10, chunk_len: 4, ..CodecParams::default() };
        let nbrs: Vec<_> = (0..40).map(|v| (v * 100_000 + 1, i64::MAX - v as i64)).collect();
        let mut out = Vec::new();
        encode_body(0, &nbrs, &params, &mut out).unwrap();
        assert!(out.len() <= params.body_upper_bound(nbrs.len()));
    }
}
