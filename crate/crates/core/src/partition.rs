//! Partitions, clusterings, and the objective/constraint arithmetic.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::GraphView;
use crate::{BlockId, NodeId, NodeWeight};

/// Imbalance parameter ε kept as an exact rational so that budgets such as
/// `⌈1.03 · 10 / 3⌉` are computed without floating-point rounding.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Epsilon(Ratio<i64>);

impl Epsilon {
    pub fn zero() -> Self {
        Epsilon(Ratio::from_integer(0))
    }

    pub fn from_ratio(numer: i64, denom: i64) -> Result<Self> {
        if denom <= 0 || numer < 0 {
            return Err(Error::Domain(format!("epsilon {numer}/{denom} must be a nonnegative ratio")));
        }
        Ok(Epsilon(Ratio::new(numer, denom)))
    }

    /// Converts through the shortest decimal representation, so `0.03`
    /// becomes exactly `3/100`.
    pub fn from_f64(value: f64) -> Result<Self> {
        if !value.is_finite() || value < 0.0 {
            return Err(Error::Domain(format!("epsilon {value} must be finite and nonnegative")));
        }
        value.to_string().parse()
    }

    pub fn ratio(&self) -> Ratio<i64> {
        self.0
    }

    pub fn as_f64(&self) -> f64 {
        *self.0.numer() as f64 / *self.0.denom() as f64
    }
}

impl Default for Epsilon {
    fn default() -> Self {
        Epsilon(Ratio::new(3, 100))
    }
}

impl FromStr for Epsilon {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Domain(format!("cannot parse epsilon {s:?}"));
        let s = s.trim();
        let (int, frac) = match s.split_once('.') {
            Some((i, f)) => (i, f),
            None => (s, ""),
        };
        if (int.is_empty() && frac.is_empty())
            || !int.chars().all(|c| c.is_ascii_digit())
            || !frac.chars().all(|c| c.is_ascii_digit())
            || frac.len() > 15
        {
            return Err(bad());
        }
        let denom = 10i64.pow(frac.len() as u32);
        let int: i64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
        let frac: i64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
        let numer = int.checked_mul(denom).and_then(|x| x.checked_add(frac)).ok_or_else(bad)?;
        Epsilon::from_ratio(numer, denom)
    }
}

impl fmt::Display for Epsilon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_f64())
    }
}

/// `⌈(1 + ε) · total / k⌉`, evaluated exactly.
pub fn max_block_weight(total: NodeWeight, k: usize, epsilon: Epsilon) -> Result<NodeWeight> {
    if k == 0 {
        return Err(Error::Domain("k must be at least 1".into()));
    }
    if total < 0 {
        return Err(Error::Domain("total weight must be nonnegative".into()));
    }
    let num = *epsilon.0.numer() as i128;
    let den = *epsilon.0.denom() as i128;
    let top = (den + num) * total as i128;
    let bottom = k as i128 * den;
    let ceil = (top + bottom - 1) / bottom;
    NodeWeight::try_from(ceil).map_err(|_| Error::Overflow("computing the block budget"))
}

/// Block budget actually enforced: the ceiling formula, raised to the heaviest
/// vertex weight so that a feasible partition always exists.
pub fn balance_budget<G: GraphView>(g: &G, k: usize, epsilon: Epsilon) -> Result<NodeWeight> {
    Ok(max_block_weight(g.total_node_weight(), k, epsilon)?.max(g.max_node_weight()))
}

/// `Σ ω(u,v)` over undirected edges whose endpoints lie in different blocks.
pub fn edge_cut<G: GraphView>(g: &G, assignment: &[BlockId]) -> Result<i64> {
    if assignment.len() != g.n() {
        return Err(Error::Structural(format!(
            "partition has {} entries for {} vertices",
            assignment.len(),
            g.n()
        )));
    }
    let doubled: i128 = (0..g.n() as NodeId)
        .into_par_iter()
        .map(|u| {
            let bu = assignment[u as usize];
            let mut local = 0i128;
            g.for_each_neighbor(u, |_, v, w| {
                if assignment[v as usize] != bu {
                    local += w as i128;
                }
            });
            local
        })
        .sum();
    i64::try_from(doubled / 2).map_err(|_| Error::Overflow("summing the edge cut"))
}

/// k-way partition with maintained block weights and a balance budget.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    k: usize,
    epsilon: Epsilon,
    assignment: Vec<BlockId>,
    block_weights: Vec<NodeWeight>,
    max_block_weight: NodeWeight,
}

impl Partition {
    /// Partition of `g` with budget [`balance_budget`].
    pub fn new<G: GraphView>(g: &G, k: usize, epsilon: Epsilon, assignment: Vec<BlockId>) -> Result<Self> {
        let budget = balance_budget(g, k, epsilon)?;
        Self::with_budget(g, k, epsilon, assignment, budget)
    }

    pub fn with_budget<G: GraphView>(
        g: &G,
        k: usize,
        epsilon: Epsilon,
        assignment: Vec<BlockId>,
        max_block_weight: NodeWeight,
    ) -> Result<Self> {
        if k == 0 {
            return Err(Error::Domain("k must be at least 1".into()));
        }
        if assignment.len() != g.n() {
            return Err(Error::Structural(format!(
                "partition has {} entries for {} vertices",
                assignment.len(),
                g.n()
            )));
        }
        let mut block_weights = vec![0 as NodeWeight; k];
        for (u, &b) in assignment.iter().enumerate() {
            let slot = block_weights
                .get_mut(b as usize)
                .ok_or_else(|| Error::Structural(format!("vertex {u} assigned to block {b} >= k={k}")))?;
            *slot = slot
                .checked_add(g.node_weight(u as NodeId))
                .ok_or(Error::Overflow("summing block weights"))?;
        }
        Ok(Self { k, epsilon, assignment, block_weights, max_block_weight })
    }

    /// Assembles a partition from already-aggregated parts without a graph.
    pub fn from_parts(
        k: usize,
        epsilon: Epsilon,
        assignment: Vec<BlockId>,
        block_weights: Vec<NodeWeight>,
        max_block_weight: NodeWeight,
    ) -> Result<Self> {
        if block_weights.len() != k {
            return Err(Error::Structural(format!("{} block weights for k={k}", block_weights.len())));
        }
        if let Some(&b) = assignment.iter().find(|&&b| b as usize >= k) {
            return Err(Error::Structural(format!("block {b} out of range for k={k}")));
        }
        Ok(Self { k, epsilon, assignment, block_weights, max_block_weight })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn epsilon(&self) -> Epsilon {
        self.epsilon
    }

    pub fn n(&self) -> usize {
        self.assignment.len()
    }

    pub fn assignment(&self) -> &[BlockId] {
        &self.assignment
    }

    pub fn into_assignment(self) -> Vec<BlockId> {
        self.assignment
    }

    #[inline]
    pub fn block(&self, u: NodeId) -> BlockId {
        self.assignment[u as usize]
    }

    pub fn block_weights(&self) -> &[NodeWeight] {
        &self.block_weights
    }

    pub fn max_block_weight(&self) -> NodeWeight {
        self.max_block_weight
    }

    pub fn total_weight(&self) -> NodeWeight {
        self.block_weights.iter().sum()
    }

    pub fn is_balanced(&self) -> bool {
        self.block_weights.iter().all(|&w| w <= self.max_block_weight)
    }

    /// `max_i blockWeight_i · k / W − 1`.
    pub fn imbalance(&self) -> f64 {
        let total = self.total_weight();
        if total == 0 {
            return 0.0;
        }
        let heaviest = self.block_weights.iter().copied().max().unwrap_or(0);
        heaviest as f64 * self.k as f64 / total as f64 - 1.0
    }

    /// Moves `u` (of weight `weight`) to block `to`, ignoring the budget.
    pub fn move_vertex(&mut self, u: NodeId, weight: NodeWeight, to: BlockId) {
        let from = self.assignment[u as usize];
        self.block_weights[from as usize] -= weight;
        self.block_weights[to as usize] += weight;
        self.assignment[u as usize] = to;
    }

    /// Recomputes block weights from scratch and compares with the maintained ones.
    pub fn weights_consistent<G: GraphView>(&self, g: &G) -> bool {
        let mut w = vec![0; self.k];
        for (u, &b) in self.assignment.iter().enumerate() {
            w[b as usize] += g.node_weight(u as NodeId);
        }
        w == self.block_weights
    }

    pub(crate) fn parts_mut(&mut self) -> (&mut [BlockId], &mut [NodeWeight]) {
        (&mut self.assignment, &mut self.block_weights)
    }
}

/// `true` iff every block weight is within the partition's budget.
pub fn is_balanced(p: &Partition) -> bool {
    p.is_balanced()
}

/// Vertex → cluster mapping with maintained cluster weights.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Clustering {
    assignment: Vec<NodeId>,
    cluster_weights: Vec<NodeWeight>,
    max_cluster_weight: NodeWeight,
}

impl Clustering {
    /// Every vertex in its own cluster (`C[u] = u`).
    pub fn singletons<G: GraphView>(g: &G, max_cluster_weight: NodeWeight) -> Self {
        let n = g.n();
        Self {
            assignment: (0..n as NodeId).collect(),
            cluster_weights: (0..n as NodeId).map(|u| g.node_weight(u)).collect(),
            max_cluster_weight,
        }
    }

    pub fn from_assignment<G: GraphView>(
        g: &G,
        assignment: Vec<NodeId>,
        max_cluster_weight: NodeWeight,
    ) -> Result<Self> {
        let n = g.n();
        if assignment.len() != n {
            return Err(Error::Structural(format!("clustering has {} entries for {n} vertices", assignment.len())));
        }
        let mut cluster_weights = vec![0; n];
        for (u, &c) in assignment.iter().enumerate() {
            if c as usize >= n {
                return Err(Error::Structural(format!("vertex {u} assigned to cluster {c} >= n")));
            }
            cluster_weights[c as usize] += g.node_weight(u as NodeId);
        }
        Ok(Self { assignment, cluster_weights, max_cluster_weight })
    }

    pub fn n(&self) -> usize {
        self.assignment.len()
    }

    pub fn assignment(&self) -> &[NodeId] {
        &self.assignment
    }

    #[inline]
    pub fn cluster(&self, u: NodeId) -> NodeId {
        self.assignment[u as usize]
    }

    pub fn cluster_weights(&self) -> &[NodeWeight] {
        &self.cluster_weights
    }

    pub fn max_cluster_weight(&self) -> NodeWeight {
        self.max_cluster_weight
    }

    pub fn num_clusters(&self) -> usize {
        self.cluster_weights.iter().filter(|&&w| w > 0).count()
    }

    /// Recomputed weights equal the maintained ones.
    pub fn weights_consistent<G: GraphView>(&self, g: &G) -> bool {
        let mut w = vec![0; self.n()];
        for (u, &c) in self.assignment.iter().enumerate() {
            w[c as usize] += g.node_weight(u as NodeId);
        }
        w == self.cluster_weights
    }

    pub(crate) fn parts_mut(&mut self) -> (&mut [NodeId], &mut [NodeWeight]) {
        (&mut self.assignment, &mut self.cluster_weights)
    }
}
