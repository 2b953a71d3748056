// SPDX-License-Identifier: Apache-2.0

//! In-memory property-graph store.
//!
//! Vertices and edges live in named collections and are addressed by
//! `<collection>/<key>` handles. Every vertex keeps outbound and inbound
//! adjacency lists sorted by edge id, so neighbor lookup never scans the edge
//! table. Deleting a vertex removes its incident edges; an edge can only be
//! inserted between vertices that exist.

mod persist;
mod record;
mod view;

pub use persist::{load_store, save_store};
pub use record::{
    Attributes, CollectionKind, Direction, EdgeId, EdgeRecord, NamedGraph, VertexId, VertexRecord,
};
pub use view::{Csr, GraphView, ViewEdge};

use indexmap::IndexMap;
use serde_json::Value;
use std::collections::{BTreeSet, HashMap};
use std::path::PathBuf;
use thiserror::Error;

use record::{validate_attributes, validate_key};

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("collection `{0}` already exists")]
    DuplicateCollection(String),
    #[error("unknown collection `{0}`")]
    UnknownCollection(String),
    #[error("collection `{name}` is a {actual} collection, expected {expected}")]
    WrongCollectionKind {
        name: String,
        expected: CollectionKind,
        actual: CollectionKind,
    },
    #[error("key `{key}` already exists in collection `{collection}`")]
    DuplicateKey { collection: String, key: String },
    #[error("invalid document key `{0}`")]
    InvalidKey(String),
    #[error("attribute `{0}` is reserved")]
    ReservedAttribute(String),
    #[error("attribute `{0}` nests deeper than one level of maps")]
    InvalidAttribute(String),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("edge endpoint `{0}` does not exist")]
    DanglingEndpoint(String),
    #[error("edge weight must be positive and finite, got {0}")]
    InvalidWeight(f64),
    #[error("graph `{0}` already exists")]
    DuplicateGraph(String),
    #[error("unknown graph `{0}`")]
    UnknownGraph(String),
    #[error("integrity violation: {0}")]
    Integrity(String),
    #[error("{}:{line}: {message}", file.display())]
    Parse {
        file: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Clone, Debug)]
pub struct Collection {
    name: String,
    kind: CollectionKind,
    keys: HashMap<String, u32>,
    members: BTreeSet<u32>,
    next_key: u64,
}

impl Collection {
    fn new(name: &str, kind: CollectionKind) -> Self {
        Self {
            name: name.to_string(),
            kind,
            keys: HashMap::new(),
            members: BTreeSet::new(),
            next_key: 1,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> CollectionKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    fn next_auto_key(&mut self) -> String {
        loop {
            let key = self.next_key.to_string();
            self.next_key += 1;
            if !self.keys.contains_key(&key) {
                return key;
            }
        }
    }

    fn register(&mut self, key: &str, slot: u32) {
        if let Ok(n) = key.parse::<u64>() {
            self.next_key = self.next_key.max(n.saturating_add(1));
        }
        self.keys.insert(key.to_string(), slot);
        self.members.insert(slot);
    }

    fn unregister(&mut self, key: &str) {
        if let Some(slot) = self.keys.remove(key) {
            self.members.remove(&slot);
        }
    }
}

/// Restricts adjacency walks to the edge collections of a named graph.
#[derive(Clone, Debug, Default)]
pub struct EdgeFilter {
    allowed: Option<Vec<bool>>,
}

impl EdgeFilter {
    /// Accepts every edge in the store.
    pub fn all() -> Self {
        Self { allowed: None }
    }

    #[inline]
    pub fn accepts(&self, edge: &EdgeRecord) -> bool {
        match &self.allowed {
            None => true,
            Some(mask) => mask.get(edge.collection).copied().unwrap_or(false),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct GraphStore {
    collections: Vec<Collection>,
    collection_index: HashMap<String, usize>,
    vertices: Vec<Option<VertexRecord>>,
    edges: Vec<Option<EdgeRecord>>,
    out_adj: Vec<Vec<EdgeId>>,
    in_adj: Vec<Vec<EdgeId>>,
    graphs: IndexMap<String, NamedGraph>,
    vertex_count: usize,
    edge_count: usize,
}

impl GraphStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn create_collection(
        &mut self,
        name: &str,
        kind: CollectionKind,
    ) -> Result<&Collection, StoreError> {
        if name.is_empty() || name.contains('/') {
            return Err(StoreError::InvalidKey(name.to_string()));
        }
        if self.collection_index.contains_key(name) {
            return Err(StoreError::DuplicateCollection(name.to_string()));
        }
        let idx = self.collections.len();
        self.collections.push(Collection::new(name, kind));
        self.collection_index.insert(name.to_string(), idx);
        Ok(&self.collections[idx])
    }

    /// Creates the collection unless it already exists with the same kind.
    pub fn ensure_collection(&mut self, name: &str, kind: CollectionKind) -> Result<(), StoreError> {
        match self.collection(name) {
            Some(c) if c.kind == kind => Ok(()),
            Some(c) => Err(StoreError::WrongCollectionKind {
                name: name.to_string(),
                expected: kind,
                actual: c.kind,
            }),
            None => self.create_collection(name, kind).map(|_| ()),
        }
    }

    pub(crate) fn raise_next_key(&mut self, collection: &str, next: u64) {
        if let Some(&idx) = self.collection_index.get(collection) {
            let c = &mut self.collections[idx];
            c.next_key = c.next_key.max(next);
        }
    }

    pub fn collection(&self, name: &str) -> Option<&Collection> {
        self.collection_index.get(name).map(|&i| &self.collections[i])
    }

    /// Collections in creation order.
    pub fn collections(&self) -> impl Iterator<Item = &Collection> {
        self.collections.iter()
    }

    fn collection_of_kind(&self, name: &str, kind: CollectionKind) -> Result<usize, StoreError> {
        let idx = *self
            .collection_index
            .get(name)
            .ok_or_else(|| StoreError::UnknownCollection(name.to_string()))?;
        let actual = self.collections[idx].kind;
        if actual != kind {
            return Err(StoreError::WrongCollectionKind {
                name: name.to_string(),
                expected: kind,
                actual,
            });
        }
        Ok(idx)
    }

    pub fn insert_vertex(
        &mut self,
        collection: &str,
        key: &str,
        attributes: Attributes,
    ) -> Result<VertexId, StoreError> {
        let cidx = self.collection_of_kind(collection, CollectionKind::Vertex)?;
        validate_key(key)?;
        if self.collections[cidx].keys.contains_key(key) {
            return Err(StoreError::DuplicateKey {
                collection: collection.to_string(),
                key: key.to_string(),
            });
        }
        self.push_vertex(cidx, key, attributes)
    }

    /// Inserts with the next free decimal key of the collection.
    pub fn insert_vertex_auto(
        &mut self,
        collection: &str,
        attributes: Attributes,
    ) -> Result<VertexId, StoreError> {
        let cidx = self.collection_of_kind(collection, CollectionKind::Vertex)?;
        let key = self.collections[cidx].next_auto_key();
        self.push_vertex(cidx, &key, attributes)
    }

    fn push_vertex(
        &mut self,
        cidx: usize,
        key: &str,
        mut attributes: Attributes,
    ) -> Result<VertexId, StoreError> {
        let community = match attributes.shift_remove("community") {
            None | Some(Value::Null) => None,
            Some(v) => Some(
                v.as_u64()
                    .ok_or_else(|| StoreError::InvalidAttribute("community".into()))?,
            ),
        };
        validate_attributes(&attributes)?;
        let slot = u32::try_from(self.vertices.len()).expect("vertex slots exhausted");
        let mut record = VertexRecord::new(&self.collections[cidx].name, key, attributes);
        record.community = community;
        self.vertices.push(Some(record));
        self.out_adj.push(Vec::new());
        self.in_adj.push(Vec::new());
        self.collections[cidx].register(key, slot);
        self.vertex_count += 1;
        Ok(VertexId(slot))
    }

    /// Inserts an edge between two existing vertices given by handle.
    pub fn insert_edge(
        &mut self,
        collection: &str,
        from: &str,
        to: &str,
        weight: f64,
    ) -> Result<EdgeId, StoreError> {
        let from = self
            .resolve(from)
            .ok_or_else(|| StoreError::DanglingEndpoint(from.to_string()))?;
        let to = self
            .resolve(to)
            .ok_or_else(|| StoreError::DanglingEndpoint(to.to_string()))?;
        self.link(collection, from, to, None, weight)
    }

    /// Inserts an edge between vertex ids with an auto-assigned key.
    pub fn link(
        &mut self,
        collection: &str,
        from: VertexId,
        to: VertexId,
        label: Option<String>,
        weight: f64,
    ) -> Result<EdgeId, StoreError> {
        let cidx = self.collection_of_kind(collection, CollectionKind::Edge)?;
        let key = self.collections[cidx].next_auto_key();
        self.push_edge(cidx, &key, from, to, label, weight)
    }

    pub(crate) fn link_with_key(
        &mut self,
        collection: &str,
        key: &str,
        from: VertexId,
        to: VertexId,
        label: Option<String>,
        weight: f64,
    ) -> Result<EdgeId, StoreError> {
        let cidx = self.collection_of_kind(collection, CollectionKind::Edge)?;
        validate_key(key)?;
        if self.collections[cidx].keys.contains_key(key) {
            return Err(StoreError::DuplicateKey {
                collection: collection.to_string(),
                key: key.to_string(),
            });
        }
        self.push_edge(cidx, key, from, to, label, weight)
    }

    fn push_edge(
        &mut self,
        cidx: usize,
        key: &str,
        from: VertexId,
        to: VertexId,
        label: Option<String>,
        weight: f64,
    ) -> Result<EdgeId, StoreError> {
        if !(weight > 0.0 && weight.is_finite()) {
            return Err(StoreError::InvalidWeight(weight));
        }
        for v in [from, to] {
            if self.vertex(v).is_none() {
                return Err(StoreError::DanglingEndpoint(format!("#{}", v.0)));
            }
        }
        let slot = u32::try_from(self.edges.len()).expect("edge slots exhausted");
        let id = EdgeId(slot);
        let record = EdgeRecord::new(&self.collections[cidx].name, cidx, key, from, to, label, weight);
        self.edges.push(Some(record));
        self.out_adj[from.index()].push(id);
        self.in_adj[to.index()].push(id);
        self.collections[cidx].register(key, slot);
        self.edge_count += 1;
        Ok(id)
    }

    /// Removes the vertex and every edge touching it; returns how many edges
    /// went with it.
    pub fn delete_vertex(&mut self, handle: &str) -> Result<usize, StoreError> {
        let id = self
            .resolve(handle)
            .ok_or_else(|| StoreError::UnknownVertex(handle.to_string()))?;
        let mut incident: Vec<EdgeId> = self.out_adj[id.index()]
            .iter()
            .chain(self.in_adj[id.index()].iter())
            .copied()
            .collect();
        incident.sort_unstable();
        incident.dedup();
        for &e in &incident {
            self.remove_edge(e);
        }
        let record = self.vertices[id.index()].take().expect("resolved vertex exists");
        let cidx = self.collection_index[record.collection()];
        self.collections[cidx].unregister(record.key());
        self.vertex_count -= 1;
        Ok(incident.len())
    }

    fn remove_edge(&mut self, id: EdgeId) {
        let Some(edge) = self.edges[id.index()].take() else {
            return;
        };
        self.out_adj[edge.from.index()].retain(|&e| e != id);
        self.in_adj[edge.to.index()].retain(|&e| e != id);
        self.collections[edge.collection].unregister(edge.key());
        self.edge_count -= 1;
    }

    pub fn resolve(&self, handle: &str) -> Option<VertexId> {
        let (collection, key) = handle.split_once('/')?;
        let c = self.collection(collection)?;
        if c.kind != CollectionKind::Vertex {
            return None;
        }
        c.keys.get(key).map(|&slot| VertexId(slot))
    }

    pub fn resolve_edge(&self, handle: &str) -> Option<EdgeId> {
        let (collection, key) = handle.split_once('/')?;
        let c = self.collection(collection)?;
        if c.kind != CollectionKind::Edge {
            return None;
        }
        c.keys.get(key).map(|&slot| EdgeId(slot))
    }

    pub fn vertex(&self, id: VertexId) -> Option<&VertexRecord> {
        self.vertices.get(id.index()).and_then(Option::as_ref)
    }

    pub fn vertex_by_handle(&self, handle: &str) -> Option<&VertexRecord> {
        self.resolve(handle).and_then(|id| self.vertex(id))
    }

    pub fn edge(&self, id: EdgeId) -> Option<&EdgeRecord> {
        self.edges.get(id.index()).and_then(Option::as_ref)
    }

    pub fn set_community(&mut self, id: VertexId, community: Option<u64>) -> Result<(), StoreError> {
        let v = self
            .vertices
            .get_mut(id.index())
            .and_then(Option::as_mut)
            .ok_or_else(|| StoreError::UnknownVertex(format!("#{}", id.0)))?;
        v.community = community;
        Ok(())
    }

    /// Sets one attribute; `community` is routed to the community field.
    pub fn set_attribute(&mut self, id: VertexId, name: &str, value: Value) -> Result<(), StoreError> {
        if name == "community" {
            let c = value
                .as_u64()
                .ok_or_else(|| StoreError::InvalidAttribute(name.to_string()))?;
            return self.set_community(id, Some(c));
        }
        let mut single = Attributes::new();
        single.insert(name.to_string(), value);
        validate_attributes(&single)?;
        let v = self
            .vertices
            .get_mut(id.index())
            .and_then(Option::as_mut)
            .ok_or_else(|| StoreError::UnknownVertex(format!("#{}", id.0)))?;
        v.attributes.extend(single);
        Ok(())
    }

    /// Live vertices in insertion order.
    pub fn vertices(&self) -> impl Iterator<Item = (VertexId, &VertexRecord)> {
        self.vertices
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.as_ref().map(|v| (VertexId(i as u32), v)))
    }

    /// Live edges in insertion order.
    pub fn edges(&self) -> impl Iterator<Item = (EdgeId, &EdgeRecord)> {
        self.edges
            .iter()
            .enumerate()
            .filter_map(|(i, e)| e.as_ref().map(|e| (EdgeId(i as u32), e)))
    }

    /// Vertices of one collection in insertion order.
    pub fn collection_vertices<'a>(
        &'a self,
        collection: &str,
    ) -> impl Iterator<Item = (VertexId, &'a VertexRecord)> + 'a {
        let members = self
            .collection(collection)
            .filter(|c| c.kind == CollectionKind::Vertex)
            .map(|c| &c.members);
        members
            .into_iter()
            .flatten()
            .filter_map(move |&slot| self.vertex(VertexId(slot)).map(|v| (VertexId(slot), v)))
    }

    /// Edges of one collection in insertion order.
    pub fn collection_edges<'a>(
        &'a self,
        collection: &str,
    ) -> impl Iterator<Item = (EdgeId, &'a EdgeRecord)> + 'a {
        let members = self
            .collection(collection)
            .filter(|c| c.kind == CollectionKind::Edge)
            .map(|c| &c.members);
        members
            .into_iter()
            .flatten()
            .filter_map(move |&slot| self.edge(EdgeId(slot)).map(|e| (EdgeId(slot), e)))
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// Upper bound on vertex slots, for dense per-vertex tables.
    pub fn vertex_slots(&self) -> usize {
        self.vertices.len()
    }

    pub fn create_graph(&mut self, graph: NamedGraph) -> Result<(), StoreError> {
        if self.graphs.contains_key(&graph.name) {
            return Err(StoreError::DuplicateGraph(graph.name));
        }
        for c in &graph.edge_collections {
            self.collection_of_kind(c, CollectionKind::Edge)?;
        }
        for c in &graph.orphan_collections {
            self.collection_of_kind(c, CollectionKind::Vertex)?;
        }
        self.graphs.insert(graph.name.clone(), graph);
        Ok(())
    }

    pub fn graph(&self, name: &str) -> Option<&NamedGraph> {
        self.graphs.get(name)
    }

    pub fn graphs(&self) -> impl Iterator<Item = &NamedGraph> {
        self.graphs.values()
    }

    pub fn edge_filter(&self, graph: &str) -> Result<EdgeFilter, StoreError> {
        let g = self
            .graphs
            .get(graph)
            .ok_or_else(|| StoreError::UnknownGraph(graph.to_string()))?;
        let mut mask = vec![false; self.collections.len()];
        for c in &g.edge_collections {
            mask[self.collection_index[c.as_str()]] = true;
        }
        Ok(EdgeFilter { allowed: Some(mask) })
    }

    /// Incident edges of `vertex` in `direction`, each paired with the opposite
    /// endpoint, in edge insertion order. A self-loop shows up twice under
    /// [`Direction::Any`].
    pub fn neighbors_of<'a>(
        &'a self,
        vertex: VertexId,
        direction: Direction,
        filter: &'a EdgeFilter,
    ) -> Neighbors<'a> {
        let empty: &[EdgeId] = &[];
        let out = self.out_adj.get(vertex.index()).map_or(empty, Vec::as_slice);
        let inn = self.in_adj.get(vertex.index()).map_or(empty, Vec::as_slice);
        let (out, inn) = match direction {
            Direction::Outbound => (out, empty),
            Direction::Inbound => (empty, inn),
            Direction::Any => (out, inn),
        };
        Neighbors {
            store: self,
            out,
            inn,
            filter,
        }
    }

    /// Handle-level neighbor lookup within a named graph.
    pub fn neighbors(
        &self,
        handle: &str,
        direction: Direction,
        graph: &str,
    ) -> Result<Vec<(EdgeId, VertexId)>, StoreError> {
        let filter = self.edge_filter(graph)?;
        let id = self
            .resolve(handle)
            .ok_or_else(|| StoreError::UnknownVertex(handle.to_string()))?;
        Ok(self.neighbors_of(id, direction, &filter).collect())
    }

    pub fn degree(&self, vertex: VertexId, direction: Direction, filter: &EdgeFilter) -> usize {
        self.neighbors_of(vertex, direction, filter).count()
    }

    /// Full scan: every edge endpoint resolves and the adjacency lists agree
    /// with the edge table.
    pub fn check_integrity(&self) -> Result<(), StoreError> {
        let mut out_expected = vec![Vec::new(); self.vertices.len()];
        let mut in_expected = vec![Vec::new(); self.vertices.len()];
        for (id, e) in self.edges() {
            for (end, v) in [("from", e.from), ("to", e.to)] {
                if self.vertex(v).is_none() {
                    return Err(StoreError::Integrity(format!(
                        "edge {} has a dangling {end} endpoint",
                        e.handle()
                    )));
                }
            }
            out_expected[e.from.index()].push(id);
            in_expected[e.to.index()].push(id);
        }
        for i in 0..self.vertices.len() {
            if self.out_adj[i] != out_expected[i] || self.in_adj[i] != in_expected[i] {
                return Err(StoreError::Integrity(format!(
                    "adjacency index of vertex slot {i} disagrees with the edge table"
                )));
            }
        }
        Ok(())
    }
}

/// Iterator over `(edge, neighbor)` pairs; merges outbound and inbound lists
/// by edge id.
pub struct Neighbors<'a> {
    store: &'a GraphStore,
    out: &'a [EdgeId],
    inn: &'a [EdgeId],
    filter: &'a EdgeFilter,
}

impl Iterator for Neighbors<'_> {
    type Item = (EdgeId, VertexId);

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let take_out = match (self.out.first(), self.inn.first()) {
                (None, None) => return None,
                (Some(_), None) => true,
                (None, Some(_)) => false,
                (Some(a), Some(b)) => a <= b,
            };
            let id = if take_out {
                let id = self.out[0];
                self.out = &self.out[1..];
                id
            } else {
                let id = self.inn[0];
                self.inn = &self.inn[1..];
                id
            };
            let edge = self.store.edges[id.index()]
                .as_ref()
                .expect("adjacency lists only hold live edges");
            if !self.filter.accepts(edge) {
                continue;
            }
            let other = if take_out { edge.to } else { edge.from };
            return Some((id, other));
        }
    }
}
