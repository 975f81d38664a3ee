//! Uncompressed CSR graph and the read-only graph interface shared by all
//! algorithms.

use std::collections::HashMap;
use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::{EdgeId, EdgeWeight, NodeId, NodeWeight};

/// Read-only access to a weighted undirected graph.
///
/// Both the CSR [`Graph`] and the [`crate::CompressedGraph`] implement this,
/// so every algorithm can run on either representation of the input.
pub trait GraphView: Sync {
    fn n(&self) -> usize;

    /// Number of undirected edges; the adjacency stores `2m` arcs.
    fn m(&self) -> usize;

    fn arc_count(&self) -> usize {
        2 * self.m()
    }

    fn degree(&self, u: NodeId) -> usize;

    /// Edge ID of the first arc of `u`'s neighborhood.
    fn first_edge(&self, u: NodeId) -> EdgeId;

    fn node_weight(&self, u: NodeId) -> NodeWeight;

    fn total_node_weight(&self) -> NodeWeight;

    fn max_node_weight(&self) -> NodeWeight;

    fn max_degree(&self) -> usize;

    /// Whether any edge weight differs from 1.
    fn is_edge_weighted(&self) -> bool;

    /// Visits every arc `(edge id, target, weight)` of `u`.
    fn for_each_neighbor<F: FnMut(EdgeId, NodeId, EdgeWeight)>(&self, u: NodeId, f: F);

    /// Visits the arcs of `u` from several workers of the current rayon pool.
    /// Every arc is visited exactly once; the order is unspecified.
    fn par_for_each_neighbor<F>(&self, u: NodeId, f: F)
    where
        F: Fn(EdgeId, NodeId, EdgeWeight) + Sync + Send;

    /// Sum of incident edge weights of `u`.
    fn weighted_degree(&self, u: NodeId) -> EdgeWeight {
        let mut sum = 0;
        self.for_each_neighbor(u, |_, _, w| sum += w);
        sum
    }
}

/// A single violated CSR invariant, as reported by [`Graph::validate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    LengthMismatch { what: &'static str, expected: usize, found: usize },
    OffsetStart { found: usize },
    NonMonotoneOffset { index: usize },
    OffsetEnd { expected: usize, found: usize },
    TargetOutOfRange { arc: EdgeId, target: NodeId },
    SelfLoop { arc: EdgeId, vertex: NodeId },
    Asymmetry { arc: EdgeId, source: NodeId, target: NodeId },
    NonPositiveEdgeWeight { arc: EdgeId },
    NonPositiveNodeWeight { vertex: NodeId },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::LengthMismatch { what, expected, found } => {
                write!(f, "{what} has length {found}, expected {expected}")
            }
            Violation::OffsetStart { found } => write!(f, "offsets[0] = {found}, expected 0"),
            Violation::NonMonotoneOffset { index } => write!(f, "non-monotone offset at index {index}"),
            Violation::OffsetEnd { expected, found } => {
                write!(f, "offsets[n] = {found}, expected {expected}")
            }
            Violation::TargetOutOfRange { arc, target } => {
                write!(f, "arc {arc} points to out-of-range vertex {target}")
            }
            Violation::SelfLoop { arc, vertex } => write!(f, "self-loop at vertex {vertex} (arc {arc})"),
            Violation::Asymmetry { source, target, .. } => {
                write!(f, "asymmetry at arc ({source},{target})")
            }
            Violation::NonPositiveEdgeWeight { arc } => write!(f, "non-positive weight on arc {arc}"),
            Violation::NonPositiveNodeWeight { vertex } => {
                write!(f, "non-positive weight on vertex {vertex}")
            }
        }
    }
}

/// Weighted undirected graph in CSR form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<EdgeId>,
    targets: Vec<NodeId>,
    edge_weights: Vec<EdgeWeight>,
    node_weights: Vec<NodeWeight>,
    total_node_weight: NodeWeight,
    max_node_weight: NodeWeight,
    max_degree: usize,
    edge_weighted: bool,
}

impl Graph {
    /// Wraps raw CSR arrays. Only array lengths and weight sums are checked
    /// here; use [`Graph::validate`] for the structural invariants.
    pub fn from_raw_parts(
        offsets: Vec<EdgeId>,
        targets: Vec<NodeId>,
        edge_weights: Vec<EdgeWeight>,
        node_weights: Vec<NodeWeight>,
    ) -> Result<Self> {
        if offsets.is_empty() {
            return Err(Error::Structural("offsets must have n + 1 entries".into()));
        }
        let n = offsets.len() - 1;
        if node_weights.len() != n {
            return Err(Error::Structural(format!(
                "{} vertex weights for {n} vertices",
                node_weights.len()
            )));
        }
        if edge_weights.len() != targets.len() {
            return Err(Error::Structural(format!(
                "{} edge weights for {} arcs",
                edge_weights.len(),
                targets.len()
            )));
        }
        let total_node_weight = node_weights
            .iter()
            .try_fold(0i64, |acc, &w| acc.checked_add(w))
            .ok_or(Error::Overflow("summing vertex weights"))?;
        let max_node_weight = node_weights.iter().copied().max().unwrap_or(0);
        let max_degree = offsets
            .windows(2)
            .map(|w| w[1].saturating_sub(w[0]))
            .max()
            .unwrap_or(0);
        let edge_weighted = edge_weights.iter().any(|&w| w != 1);
        Ok(Self {
            offsets,
            targets,
            edge_weights,
            node_weights,
            total_node_weight,
            max_node_weight,
            max_degree,
            edge_weighted,
        })
    }

    /// Builds a graph from undirected edges, each listed once in either
    /// direction. Self-loops are dropped, parallel edges are merged by summing
    /// their weights, and neighborhoods are sorted by target.
    pub fn from_edges(
        n: usize,
        edges: &[(NodeId, NodeId, EdgeWeight)],
        node_weights: Option<Vec<NodeWeight>>,
    ) -> Result<Self> {
        let mut arcs: Vec<(NodeId, NodeId, EdgeWeight)> = Vec::with_capacity(2 * edges.len());
        for &(u, v, w) in edges {
            if u as usize >= n || v as usize >= n {
                return Err(Error::Structural(format!("edge ({u},{v}) out of range for n={n}")));
            }
            if w <= 0 {
                return Err(Error::Structural(format!("edge ({u},{v}) has weight {w}")));
            }
            if u != v {
                arcs.push((u, v, w));
                arcs.push((v, u, w));
            }
        }
        arcs.par_sort_unstable_by_key(|&(u, v, _)| (u, v));
        let mut merged: Vec<(NodeId, NodeId, EdgeWeight)> = Vec::with_capacity(arcs.len());
        for (u, v, w) in arcs {
            match merged.last_mut() {
                Some(last) if last.0 == u && last.1 == v => {
                    last.2 = last.2.checked_add(w).ok_or(Error::Overflow("merging parallel edges"))?;
                }
                _ => merged.push((u, v, w)),
            }
        }
        let mut offsets = vec![0; n + 1];
        for &(u, _, _) in &merged {
            offsets[u as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let targets = merged.iter().map(|a| a.1).collect();
        let edge_weights = merged.iter().map(|a| a.2).collect();
        let node_weights = node_weights.unwrap_or_else(|| vec![1; n]);
        Self::from_raw_parts(offsets, targets, edge_weights, node_weights)
    }

    /// Unit-weight graph from an undirected edge list.
    pub fn from_unweighted_edges(n: usize, edges: &[(NodeId, NodeId)]) -> Result<Self> {
        let edges: Vec<_> = edges.iter().map(|&(u, v)| (u, v, 1)).collect();
        Self::from_edges(n, &edges, None)
    }

    /// Materializes any graph view (e.g. a compressed graph) as CSR.
    pub fn from_view<G: GraphView>(g: &G) -> Self {
        let n = g.n();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut targets = Vec::with_capacity(g.arc_count());
        let mut edge_weights = Vec::with_capacity(g.arc_count());
        let mut node_weights = Vec::with_capacity(n);
        offsets.push(0);
        for u in 0..n as NodeId {
            g.for_each_neighbor(u, |_, v, w| {
                targets.push(v);
                edge_weights.push(w);
            });
            offsets.push(targets.len());
            node_weights.push(g.node_weight(u));
        }
        Self::from_raw_parts(offsets, targets, edge_weights, node_weights)
            .expect("graph view produced inconsistent arrays")
    }

    pub fn offsets(&self) -> &[EdgeId] {
        &self.offsets
    }

    pub fn targets(&self) -> &[NodeId] {
        &self.targets
    }

    pub fn edge_weights(&self) -> &[EdgeWeight] {
        &self.edge_weights
    }

    pub fn node_weights(&self) -> &[NodeWeight] {
        &self.node_weights
    }

    pub fn neighbors(&self, u: NodeId) -> impl Iterator<Item = (NodeId, EdgeWeight)> + '_ {
        let range = self.offsets[u as usize]..self.offsets[u as usize + 1];
        self.targets[range.clone()]
            .iter()
            .copied()
            .zip(self.edge_weights[range].iter().copied())
    }

    /// Bytes used by the CSR arrays as stored in memory.
    pub fn memory_bytes(&self) -> usize {
        self.offsets.len() * std::mem::size_of::<EdgeId>()
            + self.targets.len() * std::mem::size_of::<NodeId>()
            + self.edge_weights.len() * std::mem::size_of::<EdgeWeight>()
            + self.node_weights.len() * std::mem::size_of::<NodeWeight>()
    }

    /// Checks the CSR invariants: monotone offsets spanning all arcs, targets
    /// in range, no self-loops, symmetric arcs with equal weights, and
    /// positive weights. Returns one entry per violation.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let n = self.node_weights.len();
        let arcs = self.targets.len();
        if self.offsets.len() != n + 1 {
            out.push(Violation::LengthMismatch {
                what: "offsets",
                expected: n + 1,
                found: self.offsets.len(),
            });
            return out;
        }
        if self.offsets[0] != 0 {
            out.push(Violation::OffsetStart { found: self.offsets[0] });
        }
        let mut monotone = true;
        for i in 1..self.offsets.len() {
            if self.offsets[i] < self.offsets[i - 1] {
                out.push(Violation::NonMonotoneOffset { index: i });
                monotone = false;
            }
        }
        if self.offsets[n] != arcs {
            out.push(Violation::OffsetEnd { expected: arcs, found: self.offsets[n] });
        }
        for (u, &w) in self.node_weights.iter().enumerate() {
            if w <= 0 {
                out.push(Violation::NonPositiveNodeWeight { vertex: u as NodeId });
            }
        }
        for (e, &w) in self.edge_weights.iter().enumerate() {
            if w <= 0 {
                out.push(Violation::NonPositiveEdgeWeight { arc: e });
            }
        }
        if !monotone || self.offsets[0] != 0 || self.offsets[n] != arcs {
            return out;
        }

        // Multiset of arcs for the symmetry check.
        let mut seen: HashMap<(NodeId, NodeId, EdgeWeight), usize> = HashMap::new();
        for u in 0..n {
            for e in self.offsets[u]..self.offsets[u + 1] {
                let v = self.targets[e];
                if v as usize >= n {
                    out.push(Violation::TargetOutOfRange { arc: e, target: v });
                } else if v as usize == u {
                    out.push(Violation::SelfLoop { arc: e, vertex: v });
                } else {
                    *seen.entry((u as NodeId, v, self.edge_weights[e])).or_default() += 1;
                }
            }
        }
        for u in 0..n {
            for e in self.offsets[u]..self.offsets[u + 1] {
                let v = self.targets[e];
                if v as usize >= n || v as usize == u {
                    continue;
                }
                let w = self.edge_weights[e];
                let forward = seen.get(&(u as NodeId, v, w)).copied().unwrap_or(0);
                let backward = seen.get(&(v, u as NodeId, w)).copied().unwrap_or(0);
                if forward != backward {
                    out.push(Violation::Asymmetry { arc: e, source: u as NodeId, target: v });
                }
            }
        }
        out
    }
}

impl GraphView for Graph {
    fn n(&self) -> usize {
        self.node_weights.len()
    }

    fn m(&self) -> usize {
        self.targets.len() / 2
    }

    fn arc_count(&self) -> usize {
        self.targets.len()
    }

    fn degree(&self, u: NodeId) -> usize {
        self.offsets[u as usize + 1] - self.offsets[u as usize]
    }

    fn first_edge(&self, u: NodeId) -> EdgeId {
        self.offsets[u as usize]
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
        self.edge_weighted
    }

    #[inline]
    fn for_each_neighbor<F: FnMut(EdgeId, NodeId, EdgeWeight)>(&self, u: NodeId, mut f: F) {
        let start = self.offsets[u as usize];
        let end = self.offsets[u as usize + 1];
        for e in start..end {
            f(e, self.targets[e], self.edge_weights[e]);
        }
    }

    fn par_for_each_neighbor<F>(&self, u: NodeId, f: F)
    where
        F: Fn(EdgeId, NodeId, EdgeWeight) + Sync + Send,
    {
        let start = self.offsets[u as usize];
        let end = self.offsets[u as usize + 1];
        (start..end)
            .into_par_iter()
            .with_min_len(512)
            .for_each(|e| f(e, self.targets[e], self.edge_weights[e]));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> Graph {
        Graph::from_unweighted_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    #[test]
    fn valid_triangle_has_no_violations() {
        let g = triangle();
        assert_eq!(g.validate(), vec![]);
        assert_eq!(g.n(), 3);
        assert_eq!(g.m(), 3);
        assert_eq!(g.degree(1), 2);
    }

    #[test]
    fn missing_reverse_arc_is_reported() {
        // arc (0,1) present, (1,0) absent
        let g = Graph::from_raw_parts(vec![0, 1, 1], vec![1], vec![1], vec![1, 1]).unwrap();
        let v = g.validate();
        assert_eq!(v, vec![Violation::Asymmetry { arc: 0, source: 0, target: 1 }]);
        assert_eq!(v[0].to_string(), "asymmetry at arc (0,1)");
    }

    #[test]
    fn non_monotone_offsets_are_reported() {
        let g = Graph::from_raw_parts(vec![0, 2, 1, 2], vec![1, 2], vec![1, 1], vec![1, 1, 1]).unwrap();
        assert_eq!(g.validate(), vec![Violation::NonMonotoneOffset { index: 2 }]);
    }

    #[test]
    fn self_loops_and_bad_weights_are_reported() {
        let g = Graph::from_raw_parts(vec![0, 1], vec![0], vec![0], vec![0]).unwrap();
        let v = g.validate();
        assert!(v.contains(&Violation::SelfLoop { arc: 0, vertex: 0 }));
        assert!(v.contains(&Violation::NonPositiveEdgeWeight { arc: 0 }));
        assert!(v.contains(&Violation::NonPositiveNodeWeight { vertex: 0 }));
    }

    #[test]
    fn from_edges_merges_and_drops_loops() {
        let g = Graph::from_edges(3, &[(0, 1, 2), (1, 0, 3), (2, 2, 1)], None).unwrap();
        assert_eq!(g.validate(), vec![]);
        assert_eq!(g.m(), 1);
        assert_eq!(g.neighbors(0).collect::<Vec<_>>(), vec![(1, 5)]);
        assert!(g.is_edge_weighted());
    }

    #[test]
    fn parallel_visit_covers_all_arcs() {
        let edges: Vec<_> = (1..3000).map(|v| (0, v)).collect();
        let g = Graph::from_unweighted_edges(3000, &edges).unwrap();
        let sum = std::sync::atomic::AtomicUsize::new(0);
        g.par_for_each_neighbor(0, |e, v, _| {
            assert_eq!(g.targets()[e], v);
            sum.fetch_add(v as usize, std::sync::atomic::Ordering::Relaxed);
        });
        assert_eq!(sum.into_inner(), (1..3000).sum::<usize>());
    }
}
