//! Property-graph label store built on tuple indices.
//!
//! Every distinct set of labels is interned once as a tuple id; each node or
//! edge then points at exactly one tuple and is threaded onto that tuple's
//! in-place ring. Storage for the entity side is two `u32` per entity no matter
//! how many labels it carries.
//!
//! On top of the store: ingestion from delimited files, label-filtered N-hop
//! queries, ontology extraction with DOT output, Louvain clustering of the
//! label graph with partition assignment, binary snapshots and a benchmark
//! harness against a hash-map baseline.

pub mod bench;
pub mod cli;
pub mod dictionary;
pub mod error;
pub mod graph;
pub mod ids;
pub mod ingest;
pub mod label_store;
pub mod louvain;
pub mod mem;
pub mod ontology;
pub mod persistence;
pub mod query;
pub mod tuple_registry;

pub use dictionary::LabelDict;
pub use error::{Error, Result};
pub use graph::{Direction, Graph};
pub use ids::{EntityId, LabelId, TupleId};
pub use label_store::{LabelStore, MemoryReport};
pub use tuple_registry::TupleRegistry;
