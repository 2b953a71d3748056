// SPDX-License-Identifier: Apache-2.0

use rayon::prelude::*;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use thiserror::Error;

use super::chunk::{repair_xml, split_chunks_to_dir, DEFAULT_CHUNK_LINES};
use super::derive::{DerivationReport, Deriver};
use super::parse::{parse_entries, BibEntry, EntryError};
use crate::store::{GraphStore, StoreError};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error(transparent)]
    Store(#[from] StoreError),
}

fn io_at(path: &Path) -> impl FnOnce(io::Error) -> IngestError + '_ {
    move |source| IngestError::Io { path: path.to_path_buf(), source }
}

#[derive(Clone, Debug)]
pub struct IngestOptions {
    pub chunk_lines: usize,
    /// Where repaired and chunked files go; a temporary directory otherwise.
    pub work_dir: Option<PathBuf>,
    /// Also write every parsed entry as one JSON object per line.
    pub emit_jsonl: Option<PathBuf>,
}

impl Default for IngestOptions {
    fn default() -> Self {
        Self { chunk_lines: DEFAULT_CHUNK_LINES, work_dir: None, emit_jsonl: None }
    }
}

type Parsed = Vec<Result<BibEntry, EntryError>>;

fn parse_chunk(path: &Path) -> Result<Parsed, IngestError> {
    let file = File::open(path).map_err(io_at(path))?;
    let items: Parsed = parse_entries(BufReader::new(file)).collect();
    for item in &items {
        if let Err(EntryError::Io(e)) = item {
            return Err(IngestError::Io {
                path: path.to_path_buf(),
                source: io::Error::new(e.kind(), e.to_string()),
            });
        }
    }
    Ok(items)
}

/// Parses chunks a batch at a time (one chunk per worker) and hands the
/// results to `sink` in chunk order, so derivation stays deterministic.
fn for_each_chunk<F>(chunks: &[PathBuf], mut sink: F) -> Result<(), IngestError>
where
    F: FnMut(Parsed) -> Result<(), IngestError>,
{
    let batch = rayon::current_num_threads().max(1);
    for group in chunks.chunks(batch) {
        let parsed: Vec<Result<Parsed, IngestError>> =
            group.par_iter().map(|p| parse_chunk(p)).collect();
        for p in parsed {
            sink(p?)?;
        }
    }
    Ok(())
}

/// Repair, split, parse and derive `input` into `store`.
pub fn ingest_file(
    input: &Path,
    store: &mut GraphStore,
    options: &IngestOptions,
) -> Result<DerivationReport, IngestError> {
    let file = File::open(input).map_err(io_at(input))?;
    ingest_reader(BufReader::new(file), store, options)
}

pub fn ingest_reader<R: BufRead>(
    input: R,
    store: &mut GraphStore,
    options: &IngestOptions,
) -> Result<DerivationReport, IngestError> {
    let tmp;
    let work: &Path = match &options.work_dir {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(io_at(dir))?;
            dir
        }
        None => {
            tmp = tempfile::tempdir().map_err(io_at(Path::new("<tempdir>")))?;
            tmp.path()
        }
    };

    let repaired = work.join("repaired.xml");
    {
        let out = File::create(&repaired).map_err(io_at(&repaired))?;
        let inserted = repair_xml(input, BufWriter::new(out)).map_err(io_at(&repaired))?;
        log::info!("repair: {inserted} entries moved to their own line");
    }
    let chunk_dir = work.join("chunks");
    let source = File::open(&repaired).map_err(io_at(&repaired))?;
    let chunks = split_chunks_to_dir(BufReader::new(source), &chunk_dir, options.chunk_lines)
        .map_err(io_at(&chunk_dir))?;
    log::info!("split into {} chunk(s)", chunks.len());

    let mut jsonl = match &options.emit_jsonl {
        Some(p) => Some((BufWriter::new(File::create(p).map_err(io_at(p))?), p.clone())),
        None => None,
    };

    let mut deriver = Deriver::attach(store)?;
    for_each_chunk(&chunks, |items| {
        for item in items {
            match item {
                Ok(entry) => {
                    if let Some((w, p)) = jsonl.as_mut() {
                        serde_json::to_writer(&mut *w, &entry.to_import_json())
                            .map_err(|e| IngestError::Io { path: p.clone(), source: e.into() })?;
                        w.write_all(b"\n").map_err(io_at(p))?;
                    }
                    deriver.add_vertices(store, &entry)?;
                }
                Err(e) => {
                    log::warn!("{e}");
                    deriver.note_malformed(1);
                }
            }
        }
        Ok(())
    })?;
    if let Some((mut w, p)) = jsonl {
        w.flush().map_err(io_at(&p))?;
    }

    for_each_chunk(&chunks, |items| {
        for entry in items.into_iter().flatten() {
            deriver.add_edges(store, &entry)?;
        }
        Ok(())
    })?;
    Ok(deriver.take_report())
}
