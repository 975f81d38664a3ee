//! Refinement during uncoarsening: size-constrained label propagation and
//! localized k-way FM backed by gain tables.

pub mod fm;
pub mod gain_table;
pub mod lp;

pub use fm::{fm_refine, FmConfig, FmStats};
pub use gain_table::{GainTable, GainTableMode, SparseGainTable};
pub use lp::{lp_refine, LpRefineConfig};
