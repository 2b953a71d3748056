// SPDX-License-Identifier: Apache-2.0

//! dblp-style XML to typed vertex and edge collections.

mod chunk;
pub mod derive;
mod entities;
mod parse;
mod pipeline;
mod scan;

pub use chunk::{repair_xml, split_chunks, split_chunks_to_dir, DEFAULT_CHUNK_LINES};
pub use derive::{
    derive_edges, derive_vertices, normalize_name, prepare_store, DerivationReport, Deriver,
    DEFAULT_GRAPH, EDGE_COLLECTIONS, VERTEX_COLLECTIONS,
};
pub use parse::{parse_entries, parse_entry, BibEntry, EntryError, EntryKind, EntryStream};
pub use pipeline::{ingest_file, ingest_reader, IngestError, IngestOptions};
