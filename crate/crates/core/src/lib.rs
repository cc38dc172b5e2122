//! Steiner transitive-closure spanners of posets embedded in hypergrids.
//!
//! * [`poset`]: dominance order, hypergrids, canonical embeddings, closure.
//! * [`build`]: the prefix-point Steiner 2-TC-spanner and `O(d)` path queries.
//! * [`verify`]: spanner verification and Steiner-vertex replacement.
//! * [`oracle`]: exact minimum 2-TC (and k-TC) spanners of tiny posets.
//! * [`dual`]: the volume-based dual certificate for hypergrid lower bounds.
//! * [`integral`]: numerical checks of the integrals behind the certificate.
//! * [`jumps`]: random posets, box partitions and jump counting.
//! * [`io`]: JSON/CSV/DOT file formats.
//! * [`report`]: comparison tables.

pub mod build;
pub mod dual;
pub mod error;
pub mod graph;
pub mod integral;
pub mod io;
pub mod jumps;
pub mod oracle;
pub mod poset;
pub mod report;
pub mod verify;

pub use error::{Error, Result};
pub use graph::{SpannerGraph, VertexId};
pub use poset::{GridPoint, Poset, Relation};
