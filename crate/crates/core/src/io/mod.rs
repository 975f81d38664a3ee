//! Graph and partition file formats, and single-pass parallel compression.
//!
//! I/O time is kept out of the partitioner's phase timers: callers load the
//! graph first and pass the loaded representation to [`crate::partition`].

pub mod binary;
pub mod metis;
pub mod partition_file;
pub mod reserved;
pub mod stream;

pub use binary::{read_csr_binary, write_csr_binary, BinaryCsrSource};
pub use metis::{parse_metis, read_metis_graph, write_metis_graph, MetisReport, MetisTextSource};
pub use partition_file::{read_partition, write_partition};
pub use reserved::ReservedBuffer;
pub use stream::{stream_compress, GraphSource, NeighborhoodSource, StreamStats};
