// SPDX-License-Identifier: Apache-2.0

//! Embedded property-graph engine for bibliographic collaboration networks:
//! ingestion of dblp-style XML, label propagation community detection on a
//! superstep engine, partition metrics, depth-bounded traversal and an HTTP
//! query service.

pub mod analytics;
pub mod api;
pub mod ingest;
pub mod pregel;
pub mod store;
pub mod traversal;

pub use analytics::{
    clustering_coefficient, clustering_coefficients, modularity_m, modularity_q, stats_report,
    strongly_connected_components, triangle_count, weakly_connected_components, AnalyticsError,
    StatsReport,
};
pub use ingest::{BibEntry, DerivationReport, EntryKind, DEFAULT_GRAPH};
pub use pregel::{
    annotate_graph, detect_communities, partition_stats, LpaParams, Partition, PartitionStats,
    TieBreak,
};
pub use store::{
    load_store, save_store, Attributes, CollectionKind, Direction, EdgeId, EdgeRecord, GraphStore,
    GraphView, NamedGraph, StoreError, VertexId, VertexRecord,
};
pub use traversal::{distinct_communities, traverse, TraversalResult, TraversalSpec};
