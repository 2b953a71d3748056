// SPDX-License-Identifier: Apache-2.0

//! JSON-lines persistence: `manifest.json` lists collections and named graphs,
//! and each collection lives in `<name>.jsonl`, one document per line.
//!
//! Lines carry a `_seq` system attribute recording global insertion order so
//! a reload reproduces vertex ordinals and neighbor order exactly. Files
//! without `_seq` load in file order.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use super::{Attributes, CollectionKind, GraphStore, NamedGraph, StoreError};

const MANIFEST: &str = "manifest.json";

#[derive(Serialize, Deserialize)]
struct Manifest {
    collections: Vec<ManifestCollection>,
    #[serde(default)]
    graphs: Vec<NamedGraph>,
}

#[derive(Serialize, Deserialize)]
struct ManifestCollection {
    name: String,
    kind: CollectionKind,
    /// Next auto-assigned key, so keys of deleted documents are not reissued.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    next_key: Option<u64>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn collection_file(dir: &Path, name: &str) -> PathBuf {
    dir.join(format!("{name}.jsonl"))
}

pub fn save_store(store: &GraphStore, dir: impl AsRef<Path>) -> Result<(), StoreError> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(io_err(dir))?;

    let manifest = Manifest {
        collections: store
            .collections()
            .map(|c| ManifestCollection {
                name: c.name().to_string(),
                kind: c.kind(),
                next_key: Some(c.next_key),
            })
            .collect(),
        graphs: store.graphs().cloned().collect(),
    };
    let path = dir.join(MANIFEST);
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&path, json + "\n").map_err(io_err(&path))?;

    for c in store.collections() {
        let path = collection_file(dir, c.name());
        let file = File::create(&path).map_err(io_err(&path))?;
        let mut out = BufWriter::new(file);
        match c.kind() {
            CollectionKind::Vertex => {
                for (id, v) in store.collection_vertices(c.name()) {
                    let mut doc = Map::new();
                    doc.insert("_key".into(), v.key().into());
                    doc.insert("_id".into(), v.handle().into());
                    doc.insert("_seq".into(), id.0.into());
                    for (k, val) in &v.attributes {
                        doc.insert(k.clone(), val.clone());
                    }
                    if let Some(community) = v.community {
                        doc.insert("community".into(), community.into());
                    }
                    write_line(&mut out, &doc).map_err(io_err(&path))?;
                }
            }
            CollectionKind::Edge => {
                for (id, e) in store.collection_edges(c.name()) {
                    let from = store.vertex(e.from).expect("no dangling edges");
                    let to = store.vertex(e.to).expect("no dangling edges");
                    let mut doc = Map::new();
                    doc.insert("_key".into(), e.key().into());
                    doc.insert("_id".into(), e.handle().into());
                    doc.insert("_seq".into(), id.0.into());
                    doc.insert("_from".into(), from.handle().into());
                    doc.insert("_to".into(), to.handle().into());
                    if let Some(label) = &e.label {
                        doc.insert("label".into(), label.clone().into());
                    }
                    if e.weight != 1.0 {
                        doc.insert("weight".into(), e.weight.into());
                    }
                    write_line(&mut out, &doc).map_err(io_err(&path))?;
                }
            }
        }
        out.flush().map_err(io_err(&path))?;
    }
    Ok(())
}

fn write_line(out: &mut impl Write, doc: &Map<String, Value>) -> std::io::Result<()> {
    serde_json::to_writer(&mut *out, doc)?;
    out.write_all(b"\n")
}

struct PendingLine {
    seq: u64,
    file: usize,
    line: usize,
    doc: Map<String, Value>,
}

pub fn load_store(dir: impl AsRef<Path>) -> Result<GraphStore, StoreError> {
    let dir = dir.as_ref();
    let manifest_path = dir.join(MANIFEST);
    let text = fs::read_to_string(&manifest_path).map_err(io_err(&manifest_path))?;
    let manifest: Manifest = serde_json::from_str(&text).map_err(|e| StoreError::Parse {
        file: manifest_path.clone(),
        line: e.line(),
        message: e.to_string(),
    })?;

    let mut store = GraphStore::new();
    let mut files = Vec::new();
    let mut vertex_lines = Vec::new();
    let mut edge_lines = Vec::new();
    for c in &manifest.collections {
        store.create_collection(&c.name, c.kind)?;
        let path = collection_file(dir, &c.name);
        let file_idx = files.len();
        let target = match c.kind {
            CollectionKind::Vertex => &mut vertex_lines,
            CollectionKind::Edge => &mut edge_lines,
        };
        read_lines(&path, file_idx, target)?;
        files.push((path, c.name.clone()));
    }

    vertex_lines.sort_by_key(|l| (l.seq, l.file, l.line));
    for pending in vertex_lines {
        let (path, collection) = &files[pending.file];
        let parse_err = |message: String| StoreError::Parse {
            file: path.clone(),
            line: pending.line,
            message,
        };
        let mut doc = pending.doc;
        let key = take_string(&mut doc, "_key").ok_or_else(|| parse_err("missing `_key`".into()))?;
        if let Some(id) = take_string(&mut doc, "_id") {
            if id != format!("{collection}/{key}") {
                return Err(parse_err(format!("`_id` {id} does not match collection and key")));
            }
        }
        doc.retain(|k, _| !k.starts_with('_'));
        let attributes: Attributes = doc;
        store
            .insert_vertex(collection, &key, attributes)
            .map_err(|e| parse_err(e.to_string()))?;
    }

    edge_lines.sort_by_key(|l| (l.seq, l.file, l.line));
    for pending in edge_lines {
        let (path, collection) = &files[pending.file];
        let parse_err = |message: String| StoreError::Parse {
            file: path.clone(),
            line: pending.line,
            message,
        };
        let mut doc = pending.doc;
        let key = take_string(&mut doc, "_key").ok_or_else(|| parse_err("missing `_key`".into()))?;
        let from = take_string(&mut doc, "_from").ok_or_else(|| parse_err("missing `_from`".into()))?;
        let to = take_string(&mut doc, "_to").ok_or_else(|| parse_err("missing `_to`".into()))?;
        let label = match doc.shift_remove("label") {
            None | Some(Value::Null) => None,
            Some(Value::String(s)) => Some(s),
            Some(_) => return Err(parse_err("`label` must be a string".into())),
        };
        let weight = match doc.shift_remove("weight") {
            None => 1.0,
            Some(v) => v
                .as_f64()
                .ok_or_else(|| parse_err("`weight` must be a number".into()))?,
        };
        let from_id = store
            .resolve(&from)
            .ok_or_else(|| parse_err(format!("dangling `_from` {from}")))?;
        let to_id = store
            .resolve(&to)
            .ok_or_else(|| parse_err(format!("dangling `_to` {to}")))?;
        store
            .link_with_key(collection, &key, from_id, to_id, label, weight)
            .map_err(|e| parse_err(e.to_string()))?;
    }

    for c in &manifest.collections {
        if let Some(n) = c.next_key {
            store.raise_next_key(&c.name, n);
        }
    }
    for g in manifest.graphs {
        store.create_graph(g)?;
    }
    Ok(store)
}

fn take_string(doc: &mut Map<String, Value>, field: &str) -> Option<String> {
    match doc.shift_remove(field) {
        Some(Value::String(s)) => Some(s),
        _ => None,
    }
}

fn read_lines(path: &Path, file: usize, out: &mut Vec<PendingLine>) -> Result<(), StoreError> {
    let reader = BufReader::new(File::open(path).map_err(io_err(path))?);
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let value: Value = serde_json::from_str(&line).map_err(|e| StoreError::Parse {
            file: path.to_path_buf(),
            line: line_no,
            message: e.to_string(),
        })?;
        let Value::Object(doc) = value else {
            return Err(StoreError::Parse {
                file: path.to_path_buf(),
                line: line_no,
                message: "expected a JSON object".into(),
            });
        };
        let seq = doc.get("_seq").and_then(Value::as_u64).unwrap_or(u64::MAX);
        out.push(PendingLine {
            seq,
            file,
            line: line_no,
            doc,
        });
    }
    Ok(())
}
