// SPDX-License-Identifier: Apache-2.0

//! Depth-bounded exploration from one start vertex.

use std::collections::{BTreeSet, HashSet, VecDeque};
use thiserror::Error;

use crate::store::{Direction, EdgeFilter, EdgeId, GraphStore, StoreError, VertexId};

pub const DEFAULT_VERTEX_CAP: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraversalSpec {
    pub start: String,
    pub min_depth: usize,
    pub max_depth: usize,
    pub direction: Direction,
    pub graph: String,
    /// Only continue through vertices in this community (the start is exempt).
    pub community_filter: Option<u64>,
    /// Largest result size, start included. `None` means unbounded.
    pub vertex_cap: Option<usize>,
    /// Keep vertices whose shortest distance lies in the depth range, instead
    /// of every vertex on a qualifying path.
    pub distance_mode: bool,
}

impl TraversalSpec {
    pub fn new(start: impl Into<String>, graph: impl Into<String>) -> Self {
        Self {
            start: start.into(),
            min_depth: 1,
            max_depth: 2,
            direction: Direction::Any,
            graph: graph.into(),
            community_filter: None,
            vertex_cap: Some(DEFAULT_VERTEX_CAP),
            distance_mode: false,
        }
    }

    pub fn depths(mut self, min: usize, max: usize) -> Self {
        self.min_depth = min;
        self.max_depth = max;
        self
    }

    pub fn direction(mut self, direction: Direction) -> Self {
        self.direction = direction;
        self
    }

    pub fn cap(mut self, cap: Option<usize>) -> Self {
        self.vertex_cap = cap;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraversalResult {
    pub start_node: VertexId,
    /// First-encounter order.
    pub vertices: Vec<VertexId>,
    pub edges: Vec<EdgeId>,
    pub communities: Vec<u64>,
    pub truncated: bool,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TraversalError {
    #[error("unknown start vertex {0}")]
    UnknownStart(String),
    #[error("start vertex {0} is not part of graph {1}")]
    StartNotInGraph(String, String),
    #[error("unknown graph {0}")]
    UnknownGraph(String),
    #[error("min_depth {min} is greater than max_depth {max}")]
    DepthRange { min: usize, max: usize },
    #[error("vertex_cap must be at least 1")]
    ZeroCap,
}

/// Sorted, duplicate-free community ids; vertices without one are skipped.
pub fn distinct_communities(store: &GraphStore, vertices: &[VertexId]) -> Vec<u64> {
    vertices
        .iter()
        .filter_map(|v| store.vertex(*v).and_then(|r| r.community))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

struct Collector {
    vertices: Vec<VertexId>,
    seen_v: HashSet<VertexId>,
    edges: Vec<EdgeId>,
    seen_e: HashSet<EdgeId>,
    cap: usize,
    truncated: bool,
}

impl Collector {
    fn new(cap: Option<usize>) -> Self {
        Self {
            vertices: Vec::new(),
            seen_v: HashSet::new(),
            edges: Vec::new(),
            seen_e: HashSet::new(),
            cap: cap.unwrap_or(usize::MAX),
            truncated: false,
        }
    }

    /// Adds a whole path or nothing; returns false once the cap is hit.
    fn add_path(&mut self, vertices: &[VertexId], edges: &[EdgeId]) -> bool {
        let fresh = vertices.iter().filter(|v| !self.seen_v.contains(v)).count();
        if self.vertices.len() + fresh > self.cap {
            self.truncated = true;
            return false;
        }
        for &v in vertices {
            if self.seen_v.insert(v) {
                self.vertices.push(v);
            }
        }
        for &e in edges {
            if self.seen_e.insert(e) {
                self.edges.push(e);
            }
        }
        true
    }
}

fn in_filter(store: &GraphStore, v: VertexId, community: Option<u64>) -> bool {
    community.is_none_or(|c| store.vertex(v).and_then(|r| r.community) == Some(c))
}

fn resolve_start(store: &GraphStore, spec: &TraversalSpec) -> Result<(VertexId, EdgeFilter), TraversalError> {
    if spec.min_depth > spec.max_depth {
        return Err(TraversalError::DepthRange { min: spec.min_depth, max: spec.max_depth });
    }
    if spec.vertex_cap == Some(0) {
        return Err(TraversalError::ZeroCap);
    }
    let filter = store.edge_filter(&spec.graph).map_err(|e| match e {
        StoreError::UnknownGraph(g) => TraversalError::UnknownGraph(g),
        other => TraversalError::UnknownGraph(other.to_string()),
    })?;
    let start = store
        .resolve(&spec.start)
        .ok_or_else(|| TraversalError::UnknownStart(spec.start.clone()))?;
    let g = store.graph(&spec.graph).expect("filter resolved the graph");
    let orphan = g.orphan_collections.iter().any(|c| {
        store.vertex(start).is_some_and(|r| r.collection() == c)
    });
    if !orphan && store.degree(start, Direction::Any, &filter) == 0 {
        return Err(TraversalError::StartNotInGraph(spec.start.clone(), spec.graph.clone()));
    }
    Ok((start, filter))
}

pub fn traverse(store: &GraphStore, spec: &TraversalSpec) -> Result<TraversalResult, TraversalError> {
    let (start, filter) = resolve_start(store, spec)?;
    let mut out = Collector::new(spec.vertex_cap);
    if spec.distance_mode {
        by_distance(store, spec, start, &filter, &mut out);
    } else {
        by_paths(store, spec, start, &filter, &mut out);
    }
    let communities = distinct_communities(store, &out.vertices);
    Ok(TraversalResult {
        start_node: start,
        vertices: out.vertices,
        edges: out.edges,
        communities,
        truncated: out.truncated,
    })
}

/// Every simple path from the start whose length lies in the depth range
/// contributes all of its vertices and edges.
fn by_paths(
    store: &GraphStore,
    spec: &TraversalSpec,
    start: VertexId,
    filter: &EdgeFilter,
    out: &mut Collector,
) {
    let mut path_v = vec![start];
    let mut path_e: Vec<EdgeId> = Vec::new();
    let mut on_path: HashSet<VertexId> = HashSet::from([start]);
    // Each frame holds the remaining neighbours of the vertex at that depth.
    let mut frames: Vec<std::vec::IntoIter<(EdgeId, VertexId)>> = Vec::new();
    if spec.min_depth == 0 && !out.add_path(&path_v, &path_e) {
        return;
    }
    if spec.max_depth == 0 {
        return;
    }
    let expand = |v: VertexId| -> std::vec::IntoIter<(EdgeId, VertexId)> {
        store.neighbors_of(v, spec.direction, filter).collect::<Vec<_>>().into_iter()
    };
    frames.push(expand(start));
    while let Some(frame) = frames.last_mut() {
        let Some((e, v)) = frame.next() else {
            frames.pop();
            if let Some(v) = path_v.pop() {
                on_path.remove(&v);
            }
            path_e.pop();
            continue;
        };
        if on_path.contains(&v) || !in_filter(store, v, spec.community_filter) {
            continue;
        }
        path_v.push(v);
        path_e.push(e);
        on_path.insert(v);
        let depth = path_e.len();
        if depth >= spec.min_depth && !out.add_path(&path_v, &path_e) {
            return;
        }
        if depth < spec.max_depth {
            frames.push(expand(v));
        } else {
            on_path.remove(&v);
            path_v.pop();
            path_e.pop();
        }
    }
}

/// Breadth-first distances; keeps vertices at distance min..=max and the
/// shortest-path edges between kept vertices.
fn by_distance(
    store: &GraphStore,
    spec: &TraversalSpec,
    start: VertexId,
    filter: &EdgeFilter,
    out: &mut Collector,
) {
    let mut dist: std::collections::HashMap<VertexId, usize> = [(start, 0)].into();
    let mut order = vec![start];
    let mut queue = VecDeque::from([start]);
    while let Some(u) = queue.pop_front() {
        let d = dist[&u];
        if d == spec.max_depth {
            continue;
        }
        for (_, v) in store.neighbors_of(u, spec.direction, filter) {
            if !dist.contains_key(&v) && in_filter(store, v, spec.community_filter) {
                dist.insert(v, d + 1);
                order.push(v);
                queue.push_back(v);
            }
        }
    }
    let keep = |v: &VertexId| (spec.min_depth..=spec.max_depth).contains(&dist[v]);
    for v in order.iter().filter(|v| keep(v)) {
        if !out.add_path(&[*v], &[]) {
            return;
        }
    }
    for &u in &order {
        for (e, v) in store.neighbors_of(u, spec.direction, filter) {
            let tree_edge = dist.get(&v) == Some(&(dist[&u] + 1));
            if tree_edge && out.seen_v.contains(&u) && out.seen_v.contains(&v) && out.seen_e.insert(e) {
                out.edges.push(e);
            }
        }
    }
}
