//! Binary CSR format for fast fixtures:
//!
//! ```text
//! magic "SLIMCSR\0" | version u64 | n u64 | m u64 | flags u64
//! offsets (n+1)×u64 | targets 2m×u64 | [edge weights 2m×u64] | [vertex weights n×u64]
//! ```
//!
//! All integers are little-endian. Flag bit 0 marks vertex weights, bit 1
//! edge weights.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::os::unix::fs::FileExt;
use std::path::Path;

use byteorder::{ByteOrder, LittleEndian, ReadBytesExt, WriteBytesExt};

use super::stream::NeighborhoodSource;
use crate::error::{Error, Result};
use crate::{EdgeWeight, Graph, GraphView, NodeId, NodeWeight};

pub const MAGIC: &[u8; 8] = b"SLIMCSR\0";
pub const VERSION: u64 = 1;
const HEADER_BYTES: u64 = 40;
const VERTEX_WEIGHTS: u64 = 1;
const EDGE_WEIGHTS: u64 = 2;

pub fn write_csr_binary(path: impl AsRef<Path>, g: &Graph) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    let vw = g.node_weights().iter().any(|&w| w != 1);
    let ew = g.is_edge_weighted();
    out.write_all(MAGIC)?;
    out.write_u64::<LittleEndian>(VERSION)?;
    out.write_u64::<LittleEndian>(g.n() as u64)?;
    out.write_u64::<LittleEndian>(g.m() as u64)?;
    out.write_u64::<LittleEndian>(if vw { VERTEX_WEIGHTS } else { 0 } | if ew { EDGE_WEIGHTS } else { 0 })?;
    for &o in g.offsets() {
        out.write_u64::<LittleEndian>(o as u64)?;
    }
    for &t in g.targets() {
        out.write_u64::<LittleEndian>(t as u64)?;
    }
    if ew {
        for &w in g.edge_weights() {
            out.write_u64::<LittleEndian>(w as u64)?;
        }
    }
    if vw {
        for &w in g.node_weights() {
            out.write_u64::<LittleEndian>(w as u64)?;
        }
    }
    out.flush()?;
    Ok(())
}

#[derive(Clone, Copy, Debug)]
struct BinaryHeader {
    n: usize,
    m: usize,
    vertex_weights: bool,
    edge_weights: bool,
}

fn read_header(r: &mut impl Read) -> Result<BinaryHeader> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Parse { line: 0, message: "not a binary CSR file".into() });
    }
    let version = r.read_u64::<LittleEndian>()?;
    if version != VERSION {
        return Err(Error::Parse { line: 0, message: format!("unsupported binary CSR version {version}") });
    }
    let n = r.read_u64::<LittleEndian>()? as usize;
    let m = r.read_u64::<LittleEndian>()? as usize;
    let flags = r.read_u64::<LittleEndian>()?;
    if n > NodeId::MAX as usize {
        return Err(Error::Parse { line: 0, message: format!("{n} vertices exceed the 32-bit ID range") });
    }
    Ok(BinaryHeader { n, m, vertex_weights: flags & VERTEX_WEIGHTS != 0, edge_weights: flags & EDGE_WEIGHTS != 0 })
}

fn read_u64s(r: &mut impl Read, count: usize) -> Result<Vec<u64>> {
    let mut out = vec![0u64; count];
    r.read_u64_into::<LittleEndian>(&mut out)?;
    Ok(out)
}

pub fn read_csr_binary(path: impl AsRef<Path>) -> Result<Graph> {
    let mut r = BufReader::new(File::open(path)?);
    let h = read_header(&mut r)?;
    let offsets: Vec<usize> = read_u64s(&mut r, h.n + 1)?.into_iter().map(|v| v as usize).collect();
    let targets: Vec<NodeId> = read_u64s(&mut r, 2 * h.m)?
        .into_iter()
        .map(|v| NodeId::try_from(v).map_err(|_| Error::Parse { line: 0, message: format!("target {v} too large") }))
        .collect::<Result<_>>()?;
    let edge_weights = if h.edge_weights {
        read_u64s(&mut r, 2 * h.m)?.into_iter().map(|v| v as EdgeWeight).collect()
    } else {
        vec![1; 2 * h.m]
    };
    let node_weights = if h.vertex_weights {
        read_u64s(&mut r, h.n)?.into_iter().map(|v| v as NodeWeight).collect()
    } else {
        vec![1; h.n]
    };
    let g = Graph::from_raw_parts(offsets, targets, edge_weights, node_weights)?;
    if let Some(v) = g.validate().first() {
        return Err(Error::Structural(format!("binary CSR violates invariants: {v}")));
    }
    Ok(g)
}

/// File-backed binary CSR: only the offsets (and vertex weights) are held in
/// memory; neighborhoods are read with positioned reads on demand.
pub struct BinaryCsrSource {
    file: File,
    header: BinaryHeader,
    offsets: Vec<u64>,
    node_weights: Option<Vec<NodeWeight>>,
}

impl BinaryCsrSource {
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let mut r = BufReader::new(File::open(path.as_ref())?);
        let header = read_header(&mut r)?;
        let offsets = read_u64s(&mut r, header.n + 1)?;
        if offsets.last().copied() != Some(2 * header.m as u64) || offsets.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Structural("binary CSR offsets are inconsistent".into()));
        }
        let file = File::open(path)?;
        let node_weights = if header.vertex_weights {
            let ew = if header.edge_weights { 2 * header.m as u64 } else { 0 };
            let at = HEADER_BYTES + 8 * (header.n as u64 + 1 + 2 * header.m as u64 + ew);
            let mut buf = vec![0u8; 8 * header.n];
            file.read_exact_at(&mut buf, at)?;
            Some(buf.chunks_exact(8).map(|c| LittleEndian::read_u64(c) as NodeWeight).collect())
        } else {
            None
        };
        Ok(Self { file, header, offsets, node_weights })
    }
}

impl NeighborhoodSource for BinaryCsrSource {
    fn n(&self) -> usize {
        self.header.n
    }

    fn arc_count_bound(&self) -> usize {
        2 * self.header.m
    }

    fn has_edge_weights(&self) -> bool {
        self.header.edge_weights
    }

    fn work_estimate(&self, u: NodeId) -> usize {
        (self.offsets[u as usize + 1] - self.offsets[u as usize]) as usize
    }

    fn read_vertex(&self, u: NodeId, out: &mut Vec<(NodeId, EdgeWeight)>) -> Result<NodeWeight> {
        out.clear();
        let (s, e) = (self.offsets[u as usize], self.offsets[u as usize + 1]);
        let deg = (e - s) as usize;
        let mut buf = vec![0u8; 8 * deg];
        let targets_at = HEADER_BYTES + 8 * (self.header.n as u64 + 1);
        self.file.read_exact_at(&mut buf, targets_at + 8 * s)?;
        let mut weights = vec![0u8; if self.header.edge_weights { 8 * deg } else { 0 }];
        if self.header.edge_weights {
            self.file.read_exact_at(&mut weights, targets_at + 8 * (2 * self.header.m as u64 + s))?;
        }
        for i in 0..deg {
            let v = LittleEndian::read_u64(&buf[8 * i..]);
            if v >= self.header.n as u64 {
                return Err(Error::Structural(format!("arc ({u},{v}) out of range")));
            }
            let w = if self.header.edge_weights { LittleEndian::read_u64(&weights[8 * i..]) as EdgeWeight } else { 1 };
            if v != u as u64 {
                out.push((v as NodeId, w));
            }
        }
        Ok(self.node_weights.as_ref().map_or(1, |w| w[u as usize]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;

    #[test]
    fn roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.bin");
        for g in [
            generators::grid(5, 7),
            generators::with_random_node_weights(&generators::random_weighted(30, 0.2, 99, 1), 5, 2),
        ] {
            write_csr_binary(&path, &g).unwrap();
            assert_eq!(read_csr_binary(&path).unwrap(), g);
            let src = BinaryCsrSource::open(&path).unwrap();
            let mut buf = Vec::new();
            for u in 0..g.n() as NodeId {
                let w = src.read_vertex(u, &mut buf).unwrap();
                assert_eq!(w, g.node_weight(u));
                assert_eq!(buf, g.neighbors(u).collect::<Vec<_>>());
            }
        }
    }

    #[test]
    fn rejects_foreign_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.bin");
        std::fs::write(&path, b"NOTCSR..........").unwrap();
        assert!(read_csr_binary(&path).is_err());
    }
}
