//! METIS text format: header `n m [fmt [ncon]]`, then one line per vertex
//! with an optional vertex weight followed by 1-based neighbor IDs, each
//! optionally followed by an edge weight. Lines starting with `%` are comments.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use log::warn;

use super::stream::NeighborhoodSource;
use crate::error::{Error, Result};
use crate::{EdgeWeight, Graph, GraphView, NodeId, NodeWeight};

/// Repairs applied while loading.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MetisReport {
    pub self_loops_dropped: usize,
    /// Arcs whose reverse was missing (or had a different weight) and was added.
    pub asymmetric_arcs_repaired: usize,
    pub duplicate_arcs_dropped: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Header {
    n: usize,
    m: usize,
    vertex_weights: bool,
    edge_weights: bool,
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn parse_header(line: &str, line_no: usize) -> Result<Header> {
    let fields: Vec<&str> = line.split_whitespace().collect();
    if fields.len() < 2 || fields.len() > 4 {
        return Err(parse_err(line_no, "header must be `n m [fmt [ncon]]`"));
    }
    let num = |s: &str| s.parse::<usize>().map_err(|e| parse_err(line_no, format!("bad header field {s:?}: {e}")));
    let n = num(fields[0])?;
    let m = num(fields[1])?;
    if n > NodeId::MAX as usize {
        return Err(parse_err(line_no, format!("{n} vertices exceed the 32-bit ID range")));
    }
    let fmt = fields.get(2).copied().unwrap_or("0");
    if fmt.len() > 3 || !fmt.chars().all(|c| c == '0' || c == '1') {
        return Err(parse_err(line_no, format!("unsupported fmt code {fmt:?}")));
    }
    let fmt = format!("{fmt:0>3}");
    let flags: Vec<bool> = fmt.chars().map(|c| c == '1').collect();
    if flags[0] {
        return Err(parse_err(line_no, "vertex sizes (fmt 1xx) are not supported"));
    }
    if let Some(ncon) = fields.get(3) {
        if *ncon != "1" {
            return Err(parse_err(line_no, "multi-constraint vertex weights are not supported"));
        }
    }
    Ok(Header { n, m, vertex_weights: flags[1], edge_weights: flags[2] })
}

/// Parses one vertex line into `(target, weight)` pairs (0-based targets).
fn parse_vertex_line(
    line: &str,
    line_no: usize,
    u: usize,
    header: &Header,
    out: &mut Vec<(NodeId, EdgeWeight)>,
) -> Result<NodeWeight> {
    out.clear();
    let mut tokens = line.split_ascii_whitespace();
    let mut node_weight = 1;
    if header.vertex_weights {
        let t = tokens.next().ok_or_else(|| parse_err(line_no, "missing vertex weight"))?;
        node_weight = t.parse().map_err(|e| parse_err(line_no, format!("bad vertex weight {t:?}: {e}")))?;
        if node_weight <= 0 {
            return Err(parse_err(line_no, format!("vertex {} has non-positive weight", u + 1)));
        }
    }
    while let Some(t) = tokens.next() {
        let v: usize = t.parse().map_err(|e| parse_err(line_no, format!("bad neighbor {t:?}: {e}")))?;
        if v == 0 || v > header.n {
            return Err(parse_err(line_no, format!("neighbor {v} out of range 1..={}", header.n)));
        }
        let w = if header.edge_weights {
            let t = tokens.next().ok_or_else(|| parse_err(line_no, "missing edge weight"))?;
            let w: EdgeWeight = t.parse().map_err(|e| parse_err(line_no, format!("bad edge weight {t:?}: {e}")))?;
            if w <= 0 {
                return Err(parse_err(line_no, format!("non-positive edge weight {w}")));
            }
            w
        } else {
            1
        };
        out.push(((v - 1) as NodeId, w));
    }
    Ok(node_weight)
}

/// Splits text into (header, vertex lines with their 1-based line numbers).
fn index_lines(text: &str) -> Result<(Header, Vec<(usize, &str)>)> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.starts_with('%'));
    let (hno, hline) = loop {
        match lines.next() {
            Some((i, l)) if l.trim().is_empty() => {
                let _ = i;
                continue;
            }
            Some((i, l)) => break (i + 1, l),
            None => return Err(parse_err(1, "missing header")),
        }
    };
    let header = parse_header(hline, hno)?;
    let mut vertex_lines = Vec::with_capacity(header.n);
    for (i, l) in lines {
        if vertex_lines.len() == header.n {
            if !l.trim().is_empty() {
                return Err(parse_err(i + 1, format!("more than {} vertex lines", header.n)));
            }
            continue;
        }
        vertex_lines.push((i + 1, l));
    }
    if vertex_lines.len() < header.n {
        return Err(parse_err(text.lines().count() + 1, format!("expected {} vertex lines", header.n)));
    }
    Ok((header, vertex_lines))
}

/// Parses METIS text into a symmetric, self-loop-free graph with sorted
/// neighborhoods. Missing reverse arcs are added and reported.
pub fn parse_metis(text: &str) -> Result<(Graph, MetisReport)> {
    let (header, lines) = index_lines(text)?;
    let n = header.n;
    let mut report = MetisReport::default();
    let mut arcs: Vec<(NodeId, NodeId, EdgeWeight)> = Vec::with_capacity(2 * header.m);
    let mut node_weights = Vec::with_capacity(n);
    let mut buf = Vec::new();
    for (u, &(line_no, line)) in lines.iter().enumerate() {
        node_weights.push(parse_vertex_line(line, line_no, u, &header, &mut buf)?);
        for &(v, w) in &buf {
            if v as usize == u {
                report.self_loops_dropped += 1;
            } else {
                arcs.push((u as NodeId, v, w));
            }
        }
    }
    arcs.sort_unstable();
    // Duplicate (u, v) pairs: keep the first (smallest weight after sorting).
    let before = arcs.len();
    arcs.dedup_by_key(|a| (a.0, a.1));
    report.duplicate_arcs_dropped = before - arcs.len();

    let mut repaired = Vec::new();
    for &(u, v, w) in &arcs {
        match arcs.binary_search_by_key(&(v, u), |a| (a.0, a.1)) {
            Ok(i) => {
                let rw = arcs[i].2;
                if rw < w {
                    // Keep the heavier weight in both directions.
                    repaired.push((v, u, w));
                }
            }
            Err(_) => repaired.push((v, u, w)),
        }
    }
    report.asymmetric_arcs_repaired = repaired.len();
    if !repaired.is_empty() {
        warn!("repaired {} asymmetric arcs", repaired.len());
        arcs.extend(repaired);
        arcs.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)).then(b.2.cmp(&a.2)));
        arcs.dedup_by_key(|a| (a.0, a.1));
    }
    if report.self_loops_dropped > 0 {
        warn!("dropped {} self-loops", report.self_loops_dropped);
    }
    if arcs.len() != 2 * header.m {
        warn!("header announces {} edges, found {}", header.m, arcs.len() / 2);
    }

    let mut offsets = vec![0usize; n + 1];
    for &(u, _, _) in &arcs {
        offsets[u as usize + 1] += 1;
    }
    for i in 0..n {
        offsets[i + 1] += offsets[i];
    }
    let targets = arcs.iter().map(|a| a.1).collect();
    let weights = arcs.iter().map(|a| a.2).collect();
    Ok((Graph::from_raw_parts(offsets, targets, weights, node_weights)?, report))
}

pub fn read_metis_graph(path: impl AsRef<Path>) -> Result<(Graph, MetisReport)> {
    parse_metis(&std::fs::read_to_string(path)?)
}

/// Writes `g` in METIS format, emitting weights only when they are not all 1.
pub fn write_metis_graph(path: impl AsRef<Path>, g: &Graph) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    let vw = g.node_weights().iter().any(|&w| w != 1);
    let ew = g.is_edge_weighted();
    let fmt = match (vw, ew) {
        (false, false) => String::new(),
        (false, true) => " 1".into(),
        (true, false) => " 10".into(),
        (true, true) => " 11".into(),
    };
    writeln!(out, "{} {}{}", g.n(), g.m(), fmt)?;
    for u in 0..g.n() as NodeId {
        let mut first = true;
        let mut sep = |out: &mut BufWriter<File>| -> std::io::Result<()> {
            if !first {
                write!(out, " ")?;
            }
            first = false;
            Ok(())
        };
        if vw {
            sep(&mut out)?;
            write!(out, "{}", g.node_weight(u))?;
        }
        for (v, w) in g.neighbors(u) {
            sep(&mut out)?;
            write!(out, "{}", v + 1)?;
            if ew {
                write!(out, " {w}")?;
            }
        }
        writeln!(out)?;
    }
    out.flush()?;
    Ok(())
}

/// METIS text held in memory, indexed by vertex line, for single-pass
/// compression. The input must already be symmetric; self-loops are dropped.
pub struct MetisTextSource {
    text: String,
    header: Header,
    /// Byte range and 1-based line number of every vertex line.
    lines: Vec<(usize, usize, usize)>,
}

impl MetisTextSource {
    pub fn new(text: String) -> Result<Self> {
        let base = text.as_ptr() as usize;
        let (header, lines) = index_lines(&text)?;
        let lines = lines
            .iter()
            .map(|&(no, l)| {
                let start = l.as_ptr() as usize - base;
                (start, start + l.len(), no)
            })
            .collect();
        Ok(Self { text, header, lines })
    }

    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        Self::new(std::fs::read_to_string(path)?)
    }
}

impl NeighborhoodSource for MetisTextSource {
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
        let (s, e, _) = self.lines[u as usize];
        // Roughly two bytes per token on typical inputs.
        1 + (e - s) / 2
    }

    fn read_vertex(&self, u: NodeId, out: &mut Vec<(NodeId, EdgeWeight)>) -> Result<NodeWeight> {
        let (s, e, no) = self.lines[u as usize];
        let w = parse_vertex_line(&self.text[s..e], no, u as usize, &self.header, out)?;
        out.retain(|&(v, _)| v != u);
        Ok(w)
    }
}
