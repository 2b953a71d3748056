// SPDX-License-Identifier: Apache-2.0

use serde_json::{json, Map, Value};
use std::sync::Arc;

use super::types::{ApiError, Community, SlimEdge, SlimGraph, SlimNode, SuggestedNode};
use crate::ingest::DEFAULT_GRAPH;
use crate::store::{Direction, GraphStore, VertexId};
use crate::traversal::{traverse, TraversalError, TraversalResult, TraversalSpec, DEFAULT_VERTEX_CAP};

pub const DEFAULT_SUGGESTION_LIMIT: usize = 10;

#[derive(Clone, Debug)]
pub struct ServiceConfig {
    pub graph: String,
    pub suggestion_limit: usize,
    pub vertex_cap: Option<usize>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            graph: DEFAULT_GRAPH.into(),
            suggestion_limit: DEFAULT_SUGGESTION_LIMIT,
            vertex_cap: Some(DEFAULT_VERTEX_CAP),
        }
    }
}

struct NameEntry {
    folded: String,
    vertex: VertexId,
    appearances: u64,
}

/// The two query operations over a loaded, read-only store.
pub struct QueryService {
    store: Arc<GraphStore>,
    config: ServiceConfig,
    names: Vec<NameEntry>,
}

/// A graph answer plus whether the vertex cap cut it short.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphAnswer {
    pub graph: SlimGraph,
    pub truncated: bool,
}

fn parse_depth(field: &str, raw: Option<&Value>, default: usize) -> Result<usize, ApiError> {
    let text = match raw {
        None | Some(Value::Null) => return Ok(default),
        Some(Value::String(s)) => s.trim().to_string(),
        Some(Value::Number(n)) => n.to_string(),
        Some(other) => {
            return Err(ApiError::validation(field, format!("{field} must be a string, got {other}")))
        }
    };
    text.parse::<usize>()
        .map_err(|_| ApiError::validation(field, format!("{field} must be a non-negative integer, got {text:?}")))
}

fn slim_node(store: &GraphStore, id: VertexId) -> SlimNode {
    let v = store.vertex(id).expect("traversal returns live vertices");
    SlimNode {
        id: v.handle().to_string(),
        graph_name: v.graph_name().unwrap_or(v.handle()).to_string(),
        community: v.community.map(|c| c.to_string()),
    }
}

/// Maps a traversal onto the wire shape. Vertices without `graph_name` show
/// their handle instead.
pub fn to_slim_graph(store: &GraphStore, r: &TraversalResult) -> SlimGraph {
    SlimGraph {
        start_node: slim_node(store, r.start_node),
        vertices: r.vertices.iter().map(|&v| slim_node(store, v)).collect(),
        edges: r
            .edges
            .iter()
            .map(|&e| {
                let e = store.edge(e).expect("traversal returns live edges");
                SlimEdge {
                    from: store.vertex(e.from).expect("live").handle().to_string(),
                    to: store.vertex(e.to).expect("live").handle().to_string(),
                    label: e.label.clone(),
                }
            })
            .collect(),
        communities: r.communities.iter().map(|c| Community { number: c.to_string() }).collect(),
    }
}

impl QueryService {
    pub fn new(store: Arc<GraphStore>, config: ServiceConfig) -> Result<Self, ApiError> {
        let filter = store
            .edge_filter(&config.graph)
            .map_err(|e| ApiError::new(super::types::ErrorKind::Internal, e.to_string()))?;
        let names = store
            .vertices()
            .filter_map(|(id, v)| {
                v.graph_name().map(|name| NameEntry {
                    folded: name.to_lowercase(),
                    vertex: id,
                    appearances: store.degree(id, Direction::Any, &filter) as u64,
                })
            })
            .collect();
        Ok(Self { store, config, names })
    }

    pub fn store(&self) -> &GraphStore {
        &self.store
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.config
    }

    /// Case-insensitive substring search over `graph_name`, most connected
    /// first.
    pub fn nodes_id(&self, name: &str) -> Vec<SuggestedNode> {
        let needle = name.trim().to_lowercase();
        if needle.is_empty() {
            return Vec::new();
        }
        let mut hits: Vec<SuggestedNode> = self
            .names
            .iter()
            .filter(|e| e.folded.contains(&needle))
            .map(|e| {
                let v = self.store.vertex(e.vertex).expect("indexed vertex is live");
                SuggestedNode {
                    id: v.handle().to_string(),
                    graph_name: v.graph_name().unwrap_or_default().to_string(),
                    the_type: v.collection().to_string(),
                    appearances: e.appearances,
                }
            })
            .collect();
        hits.sort_by(|a, b| {
            b.appearances
                .cmp(&a.appearances)
                .then_with(|| a.graph_name.cmp(&b.graph_name))
                .then_with(|| a.id.cmp(&b.id))
        });
        hits.truncate(self.config.suggestion_limit);
        hits
    }

    /// Neighbourhood of `node_id` between the two depths (strings, as the
    /// schema types them; defaults "1" and "2").
    pub fn node_graph(
        &self,
        node_id: &str,
        min_depth: Option<&Value>,
        max_depth: Option<&Value>,
    ) -> Result<GraphAnswer, ApiError> {
        let min = parse_depth("minDepth", min_depth, 1)?;
        let max = parse_depth("maxDepth", max_depth, 2)?;
        if min < 1 {
            return Err(ApiError::validation("minDepth", "minDepth must be 1 or greater"));
        }
        if max < min {
            return Err(ApiError::validation("maxDepth", "maxDepth must be greater than or equal to minDepth"));
        }
        let spec = TraversalSpec::new(node_id, &self.config.graph)
            .depths(min, max)
            .cap(self.config.vertex_cap);
        let r = traverse(&self.store, &spec).map_err(|e| match e {
            TraversalError::UnknownStart(h) | TraversalError::StartNotInGraph(h, _) => {
                ApiError::not_found(format!("no vertex {h}"))
            }
            other => ApiError::new(super::types::ErrorKind::Internal, other.to_string()),
        })?;
        let graph = to_slim_graph(&self.store, &r);
        Ok(GraphAnswer { graph, truncated: r.truncated })
    }

    /// Stored document of one vertex.
    pub fn vertex_detail(&self, handle: &str) -> Result<Value, ApiError> {
        self.store
            .vertex_by_handle(handle)
            .map(|v| v.to_document())
            .ok_or_else(|| ApiError::not_found(format!("no vertex {handle}")))
    }

    pub fn health(&self) -> Value {
        let communities = self
            .store
            .vertices()
            .filter_map(|(_, v)| v.community)
            .collect::<std::collections::HashSet<_>>()
            .len();
        json!({
            "status": "ok",
            "vertices": self.store.vertex_count(),
            "edges": self.store.edge_count(),
            "communities": communities,
        })
    }

    /// Runs one operation of the plain JSON protocol and returns the body
    /// `{data, extensions?}`.
    pub fn execute(&self, operation: &str, variables: &Map<String, Value>) -> Result<Value, ApiError> {
        let string_var = |name: &str| -> Result<String, ApiError> {
            match variables.get(name) {
                Some(Value::String(s)) => Ok(s.clone()),
                Some(other) => Err(ApiError::validation(name, format!("{name} must be a string, got {other}"))),
                None => Err(ApiError::validation(name, format!("missing variable {name}"))),
            }
        };
        match operation {
            "nodesID" => {
                let name = string_var("name")?;
                Ok(json!({ "data": self.nodes_id(&name) }))
            }
            "nodeGraph" => {
                let node = string_var("node_id")?;
                let a = self.node_graph(&node, variables.get("minDepth"), variables.get("maxDepth"))?;
                Ok(json!({ "data": a.graph, "extensions": { "truncated": a.truncated } }))
            }
            other => Err(ApiError::validation(
                "operation",
                format!("unknown operation {other:?} (expected nodesID or nodeGraph)"),
            )),
        }
    }
}
