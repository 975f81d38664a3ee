//! Multilevel driver: coarsen, partition the coarsest graph, then project
//! and refine level by level.

use std::time::Instant;

use crate::clustering::{cluster_coarsening, LpConfig, RatingMode};
use crate::contraction::{contract, ContractionConfig};
use crate::error::{Error, Result};
use crate::graph::{Graph, GraphView};
use crate::initial::{initial_partition_with_budget, rebalance, InitialConfig};
use crate::memory::MemoryTracker;
use crate::partition::{edge_cut, max_block_weight, Epsilon, Partition};
use crate::refinement::{fm_refine, lp_refine, FmConfig, GainTable, GainTableMode, LpRefineConfig};
use crate::util::{splitmix64, with_pool};
use crate::{BlockId, NodeId, NodeWeight};

/// Refinement algorithms applied on every level.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Refiner {
    Lp,
    LpFm,
}

impl std::str::FromStr for Refiner {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lp" => Ok(Self::Lp),
            "lp+fm" => Ok(Self::LpFm),
            _ => Err(Error::Domain(format!("unknown refiner {s:?} (expected lp or lp+fm)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub k: usize,
    pub epsilon: Epsilon,
    pub seed: u64,
    pub workers: usize,
    pub coarsening_rounds: usize,
    pub refinement_rounds: usize,
    pub t_bump: usize,
    pub refiner: Refiner,
    pub gain_table: GainTableMode,
    /// One worker and fixed tie-breaking everywhere.
    pub deterministic: bool,
    /// Coarsening stops once a level has at most `C·k` vertices.
    pub contraction_limit: usize,
    pub rating_mode: RatingMode,
    pub portfolio: usize,
    pub fm: FmConfig,
}

impl RunConfig {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            epsilon: Epsilon::default(),
            seed: 0,
            workers: 1,
            coarsening_rounds: 5,
            refinement_rounds: 5,
            t_bump: 10_000,
            refiner: Refiner::LpFm,
            gain_table: GainTableMode::Sparse,
            deterministic: false,
            contraction_limit: 32,
            rating_mode: RatingMode::TwoPhase,
            portfolio: 32,
            fm: FmConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Domain("k must be at least 1".into()));
        }
        if self.workers == 0 {
            return Err(Error::Domain("workers must be at least 1".into()));
        }
        if self.t_bump < 2 {
            return Err(Error::Domain("T_bump must be at least 2".into()));
        }
        if self.contraction_limit == 0 {
            return Err(Error::Domain("contraction limit must be at least 1".into()));
        }
        if self.k > u32::MAX as usize {
            return Err(Error::Domain("k does not fit a block ID".into()));
        }
        Ok(())
    }
}

/// Wall time in seconds per phase.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PhaseTimes {
    pub total: f64,
    pub coarsen: f64,
    pub initial: f64,
    pub refine: f64,
}

/// Peak auxiliary bytes per phase: instrumented data structures beyond the
/// input graph (rating maps, buffers, clusterings, coarse levels, gain tables).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PhaseMemory {
    pub coarsen: usize,
    pub initial: usize,
    pub refine: usize,
}

impl PhaseMemory {
    pub fn max(&self) -> usize {
        self.coarsen.max(self.initial).max(self.refine)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LevelStats {
    pub n: usize,
    pub m: usize,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunReport {
    pub cut: i64,
    pub imbalance: f64,
    pub times: PhaseTimes,
    pub peak_aux: PhaseMemory,
    /// Level 0 is the input.
    pub levels: Vec<LevelStats>,
    /// Set by callers that partition a compressed input.
    pub compression_ratio: Option<f64>,
}

/// `Π_fine(u) = Π_coarse(fine_to_coarse[u])`. Block weights carry over
/// unchanged.
pub fn project_partition(coarse: &Partition, fine_to_coarse: &[NodeId]) -> Partition {
    let assignment: Vec<BlockId> = fine_to_coarse.iter().map(|&c| coarse.block(c)).collect();
    Partition::from_parts(
        coarse.k(),
        coarse.epsilon(),
        assignment,
        coarse.block_weights().to_vec(),
        coarse.max_block_weight(),
    )
    .expect("projection keeps block IDs in range")
}

struct Level {
    graph: Graph,
    /// Maps vertices of the next finer level to this level.
    fine_to_coarse: Vec<NodeId>,
}

/// Partitions `g` into `config.k` balanced blocks.
pub fn partition<G: GraphView>(g: &G, config: &RunConfig) -> Result<(Partition, RunReport)> {
    config.validate()?;
    let workers = if config.deterministic { 1 } else { config.workers };
    with_pool(workers, || run(g, config))
}

fn run<G: GraphView>(g: &G, config: &RunConfig) -> Result<(Partition, RunReport)> {
    let start = Instant::now();
    let k = config.k;
    let budget = max_block_weight(g.total_node_weight(), k, config.epsilon)?;
    if g.max_node_weight() > budget {
        return Err(Error::Infeasible(format!(
            "vertex of weight {} exceeds the block budget {budget}",
            g.max_node_weight()
        )));
    }
    let tracker = MemoryTracker::new();
    let mut report = RunReport { levels: vec![LevelStats { n: g.n(), m: g.m() }], ..RunReport::default() };

    // Coarsening.
    let phase = Instant::now();
    let mut levels: Vec<Level> = Vec::new();
    let mut level_bytes = Vec::new();
    let limit = config.contraction_limit.saturating_mul(k);
    loop {
        let level_seed = splitmix64(config.seed ^ (levels.len() as u64 + 1));
        let next = match levels.last() {
            None => coarsen_once(g, k, config, level_seed, &tracker, limit)?,
            Some(l) => coarsen_once(&l.graph, k, config, level_seed, &tracker, limit)?,
        };
        let Some(level) = next else { break };
        report.levels.push(LevelStats { n: level.graph.n(), m: level.graph.m() });
        level_bytes.push(tracker.track(level.graph.memory_bytes() + level.fine_to_coarse.len() * 4));
        levels.push(level);
    }
    report.times.coarsen = phase.elapsed().as_secs_f64();
    report.peak_aux.coarsen = tracker.peak();
    log::debug!("coarsened through {} levels: {:?}", levels.len(), report.levels);

    // Initial partitioning.
    let phase = Instant::now();
    tracker.reset_peak();
    let initial_config = InitialConfig { portfolio: config.portfolio, seed: config.seed, ..InitialConfig::default() };
    let mut p = match levels.last() {
        None => initial_partition_with_budget(g, k, config.epsilon, budget, &initial_config)?,
        Some(l) => {
            let _copy = tracker.track(l.graph.memory_bytes());
            initial_partition_with_budget(&l.graph, k, config.epsilon, budget, &initial_config)?
        }
    };
    report.times.initial = phase.elapsed().as_secs_f64();
    report.peak_aux.initial = tracker.peak();

    // Uncoarsening.
    let phase = Instant::now();
    tracker.reset_peak();
    while let Some(level) = levels.pop() {
        level_bytes.pop();
        refine(&level.graph, &mut p, config, levels.len() as u64 + 1, &tracker)?;
        let _projected = tracker.track(level.fine_to_coarse.len() * 4);
        p = project_partition(&p, &level.fine_to_coarse);
    }
    refine(g, &mut p, config, 0, &tracker)?;
    if !p.is_balanced() {
        rebalance(g, &mut p);
    }
    report.times.refine = phase.elapsed().as_secs_f64();
    report.peak_aux.refine = tracker.peak();

    if !p.is_balanced() {
        return Err(Error::Infeasible(format!(
            "could not balance blocks {:?} under budget {budget}",
            p.block_weights()
        )));
    }
    report.cut = edge_cut(g, p.assignment())?;
    report.imbalance = p.imbalance();
    report.times.total = start.elapsed().as_secs_f64();
    Ok((p, report))
}

/// Weight bound for clusters on a level with `n` vertices and total weight
/// `total`: `⌈total / max(2k, n/4)⌉`.
pub fn max_cluster_weight(total: NodeWeight, n: usize, k: usize) -> NodeWeight {
    let target = (2 * k).max(n / 4).max(1) as NodeWeight;
    ((total + target - 1) / target).max(1)
}

/// Builds the next level, or `None` if `g` is small enough or contraction
/// would shrink it by less than a factor of 1.05.
fn coarsen_once<H: GraphView>(
    g: &H,
    k: usize,
    config: &RunConfig,
    seed: u64,
    tracker: &MemoryTracker,
    limit: usize,
) -> Result<Option<Level>> {
    let n = g.n();
    if n <= limit || n < 2 {
        return Ok(None);
    }
    let lp = LpConfig {
        rounds: config.coarsening_rounds,
        t_bump: config.t_bump,
        seed,
        deterministic: config.deterministic,
        mode: config.rating_mode,
        ..LpConfig::default()
    };
    let cap = max_cluster_weight(g.total_node_weight(), n, k);
    let clustering = cluster_coarsening(g, cap, &lp, Some(tracker))?;
    let _clustering_bytes = tracker.track(n * 12);
    let contraction = ContractionConfig { t_bump: config.t_bump, ..ContractionConfig::default() };
    let (coarse, mapping, _) = contract(g, &clustering, &contraction, Some(tracker))?;
    if (coarse.n() as f64) * 1.05 > n as f64 {
        return Ok(None);
    }
    let fine_to_coarse = mapping.fine_to_coarse(&clustering);
    Ok(Some(Level { graph: coarse, fine_to_coarse }))
}

fn refine<H: GraphView>(g: &H, p: &mut Partition, config: &RunConfig, level: u64, tracker: &MemoryTracker) -> Result<()> {
    let seed = splitmix64(config.seed ^ (level << 32) ^ 0xabcd);
    let lp = LpRefineConfig {
        rounds: config.refinement_rounds,
        seed,
        deterministic: config.deterministic,
    };
    {
        let _order = tracker.track(g.n() * 4);
        lp_refine(g, p, &lp);
    }
    if config.refiner == Refiner::LpFm {
        let table = GainTable::build(g, p.assignment(), p.k(), config.gain_table);
        let _table = tracker.track(table.memory_footprint().bytes);
        // Owner array, pass snapshot and replay copy.
        let _fm = tracker.track(g.n() * 12);
        fm_refine(g, p, &table, &FmConfig { seed, ..config.fm })?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contraction::contract;
    use crate::generators;
    use crate::partition::Clustering;

    #[test]
    fn projection_keeps_cut_and_weights() {
        let g = generators::path(4);
        let c = Clustering::from_assignment(&g, vec![0, 0, 2, 2], 10).unwrap();
        let (coarse, mapping, _) = contract(&g, &c, &ContractionConfig::default(), None).unwrap();
        let f2c = mapping.fine_to_coarse(&c);
        let coarse_p = Partition::new(&coarse, 2, Epsilon::zero(), vec![0, 1]).unwrap();
        let fine_p = project_partition(&coarse_p, &f2c);
        assert_eq!(edge_cut(&g, fine_p.assignment()).unwrap(), 1);
        assert_eq!(fine_p.assignment()[0], fine_p.assignment()[1]);
        assert_ne!(fine_p.assignment()[1], fine_p.assignment()[2]);
        assert!(fine_p.weights_consistent(&g));

        let id: Vec<NodeId> = (0..4).collect();
        let p = Partition::new(&g, 2, Epsilon::zero(), vec![0, 1, 1, 0]).unwrap();
        assert_eq!(project_partition(&p, &id), p);
    }

    #[test]
    fn projection_preserves_cut_on_random_instances() {
        for seed in 0..20 {
            let g = generators::random_weighted(80, 0.1, 7, seed);
            let c = Clustering::from_assignment(&g, (0..80).map(|u| (u * 13 % 17) as NodeId).collect(), 100).unwrap();
            let (coarse, mapping, _) = contract(&g, &c, &ContractionConfig::default(), None).unwrap();
            let f2c = mapping.fine_to_coarse(&c);
            let blocks: Vec<BlockId> = (0..coarse.n() as u32).map(|x| x % 3).collect();
            let coarse_p = Partition::new(&coarse, 3, Epsilon::default(), blocks).unwrap();
            let fine_p = project_partition(&coarse_p, &f2c);
            assert_eq!(edge_cut(&g, fine_p.assignment()).unwrap(), edge_cut(&coarse, coarse_p.assignment()).unwrap());
            assert!(fine_p.weights_consistent(&g));
        }
    }

    #[test]
    fn k1_has_zero_cut() {
        let g = generators::grid(20, 20);
        let (p, report) = partition(&g, &RunConfig::new(1)).unwrap();
        assert_eq!(report.cut, 0);
        assert!(p.is_balanced());
    }

    #[test]
    fn complete_graph_split() {
        let g = generators::complete(8);
        let config = RunConfig { epsilon: Epsilon::zero(), ..RunConfig::new(2) };
        let (p, report) = partition(&g, &config).unwrap();
        assert_eq!(report.cut, 16);
        assert_eq!(p.block_weights(), &[4, 4]);
    }

    #[test]
    fn grid_quadrants() {
        let g = generators::grid(64, 64);
        for seed in 0..3 {
            let config = RunConfig { seed, workers: 2, ..RunConfig::new(4) };
            let (p, report) = partition(&g, &config).unwrap();
            assert!(p.is_balanced());
            assert!(report.cut <= 192, "cut {}", report.cut);
            assert_eq!(report.cut, edge_cut(&g, p.assignment()).unwrap());
            assert!(report.levels.len() > 1);
            assert!(report.levels.windows(2).all(|w| w[1].n < w[0].n));
        }
    }

    #[test]
    fn deterministic_mode_is_reproducible() {
        let g = generators::random_geometric(3000, 8.0, 9);
        let config = RunConfig { seed: 4, deterministic: true, workers: 4, ..RunConfig::new(5) };
        let a = partition(&g, &config).unwrap().0;
        let b = partition(&g, &config).unwrap().0;
        assert_eq!(a, b);
    }

    #[test]
    fn infeasible_and_invalid_configs() {
        let g = Graph::from_edges(3, &[(0, 1, 1)], Some(vec![10, 1, 1])).unwrap();
        assert!(matches!(partition(&g, &RunConfig::new(2)), Err(Error::Infeasible(_))));
        assert!(partition(&g, &RunConfig::new(0)).is_err());
        assert!(partition(&g, &RunConfig { t_bump: 1, ..RunConfig::new(2) }).is_err());
    }
}
