//! Memory-lean shared-memory multilevel graph partitioning.
//!
//! The pipeline follows the classic multilevel scheme: the input graph is
//! coarsened by size-constrained label propagation clustering and one-pass
//! contraction, the coarsest graph is split by recursive bisection, and the
//! partition is projected back level by level while label propagation and
//! (optionally) localized k-way FM refine it.
//!
//! The memory-relevant pieces are all available on their own:
//!
//! * [`compressed`]: gap/interval/VarInt compressed adjacency that can be
//!   used everywhere a [`GraphView`] is expected.
//! * [`io`]: METIS and binary CSR readers, plus parallel single-pass
//!   compression into an over-reserved buffer.
//! * [`clustering`]: two-phase label propagation with fixed-capacity rating
//!   maps and one shared sparse rating array.
//! * [`contraction`]: one-pass contraction writing the coarse CSR directly
//!   through a packed (arcs, vertices) counter.
//! * [`refinement::gain_table`]: sparse gain tables sized by
//!   `Σ min(deg(v), k)` instead of `n·k`.

pub mod clustering;
pub mod compressed;
pub mod contraction;
pub mod error;
pub mod generators;
pub mod graph;
pub mod initial;
pub mod io;
pub mod memory;
pub mod metrics;
pub mod multilevel;
pub mod partition;
pub mod refinement;
pub(crate) mod util;

pub use compressed::CompressedGraph;
pub use error::{Error, Result};
pub use graph::{Graph, GraphView, Violation};
pub use multilevel::{partition, RunConfig, RunReport};
pub use partition::{edge_cut, is_balanced, max_block_weight, Clustering, Epsilon, Partition};

/// Vertex identifier.
pub type NodeId = u32;
/// Arc identifier (position in the concatenated adjacency).
pub type EdgeId = usize;
/// Block identifier of a k-way partition.
pub type BlockId = u32;
/// Vertex weights. Always positive.
pub type NodeWeight = i64;
/// Edge weights. Always positive.
pub type EdgeWeight = i64;

/// Sentinel for "no vertex" / "no block".
pub const INVALID: u32 = u32::MAX;
