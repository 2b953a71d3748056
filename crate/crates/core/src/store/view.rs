// SPDX-License-Identifier: Apache-2.0

use super::{EdgeFilter, EdgeId, GraphStore, StoreError, VertexId, VertexRecord};

/// One stored edge expressed in view ordinals.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ViewEdge {
    pub id: EdgeId,
    pub source: usize,
    pub target: usize,
    pub weight: f64,
}

/// A read-only projection of a named graph (or the whole store) onto dense
/// vertex ordinals `0..n`, assigned in store insertion order.
#[derive(Clone, Debug)]
pub struct GraphView<'s> {
    store: &'s GraphStore,
    vertices: Vec<VertexId>,
    ordinal: Vec<u32>,
    edges: Vec<ViewEdge>,
}

const ABSENT: u32 = u32::MAX;

impl<'s> GraphView<'s> {
    /// Vertex set = endpoints of the graph's edges plus its orphan collections.
    pub fn named(store: &'s GraphStore, graph: &str) -> Result<Self, StoreError> {
        let filter = store.edge_filter(graph)?;
        let g = store.graph(graph).expect("filter resolved the graph");
        let mut member = vec![false; store.vertex_slots()];
        for c in &g.orphan_collections {
            for (id, _) in store.collection_vertices(c) {
                member[id.index()] = true;
            }
        }
        for (_, e) in store.edges() {
            if filter.accepts(e) {
                member[e.from.index()] = true;
                member[e.to.index()] = true;
            }
        }
        Ok(Self::build(store, &filter, |id| member[id.index()]))
    }

    /// Every vertex and edge in the store.
    pub fn whole(store: &'s GraphStore) -> Self {
        Self::build(store, &EdgeFilter::all(), |_| true)
    }

    fn build(store: &'s GraphStore, filter: &EdgeFilter, include: impl Fn(VertexId) -> bool) -> Self {
        let mut vertices = Vec::new();
        let mut ordinal = vec![ABSENT; store.vertex_slots()];
        for (id, _) in store.vertices() {
            if include(id) {
                ordinal[id.index()] = vertices.len() as u32;
                vertices.push(id);
            }
        }
        let edges = store
            .edges()
            .filter(|(_, e)| filter.accepts(e))
            .map(|(id, e)| ViewEdge {
                id,
                source: ordinal[e.from.index()] as usize,
                target: ordinal[e.to.index()] as usize,
                weight: e.weight,
            })
            .collect();
        Self {
            store,
            vertices,
            ordinal,
            edges,
        }
    }

    pub fn store(&self) -> &'s GraphStore {
        self.store
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex_ids(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn edges(&self) -> &[ViewEdge] {
        &self.edges
    }

    pub fn ordinal(&self, id: VertexId) -> Option<usize> {
        match self.ordinal.get(id.index()) {
            Some(&o) if o != ABSENT => Some(o as usize),
            _ => None,
        }
    }

    pub fn vertex_id(&self, ordinal: usize) -> VertexId {
        self.vertices[ordinal]
    }

    pub fn record(&self, ordinal: usize) -> &'s VertexRecord {
        self.store
            .vertex(self.vertices[ordinal])
            .expect("view vertices are live")
    }

    /// Undirected adjacency in CSR form: each stored edge contributes an
    /// entry at both endpoints (a self-loop contributes two at its vertex).
    pub fn undirected_csr(&self) -> Csr {
        let n = self.vertices.len();
        let mut degree = vec![0usize; n];
        for e in &self.edges {
            degree[e.source] += 1;
            degree[e.target] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill = offsets[..n].to_vec();
        let total = offsets[n];
        let mut targets = vec![0u32; total];
        let mut weights = vec![0f64; total];
        for e in &self.edges {
            targets[fill[e.source]] = e.target as u32;
            weights[fill[e.source]] = e.weight;
            fill[e.source] += 1;
            targets[fill[e.target]] = e.source as u32;
            weights[fill[e.target]] = e.weight;
            fill[e.target] += 1;
        }
        Csr {
            offsets,
            targets,
            weights,
        }
    }

    /// Sorted, deduplicated neighbor lists with parallel edges collapsed and
    /// self-loops dropped. Each neighbor carries the largest weight among the
    /// collapsed parallel edges.
    pub fn simple_adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.vertices.len()];
        for e in &self.edges {
            if e.source == e.target {
                continue;
            }
            adj[e.source].push((e.target, e.weight));
            adj[e.target].push((e.source, e.weight));
        }
        for list in &mut adj {
            list.sort_unstable_by(|a, b| a.0.cmp(&b.0).then(b.1.total_cmp(&a.1)));
            list.dedup_by_key(|p| p.0);
        }
        adj
    }
}

/// Compressed sparse rows over view ordinals.
#[derive(Clone, Debug)]
pub struct Csr {
    pub offsets: Vec<usize>,
    pub targets: Vec<u32>,
    pub weights: Vec<f64>,
}

impl Csr {
    pub fn vertex_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.offsets[v]..self.offsets[v + 1];
        self.targets[range.clone()]
            .iter()
            .zip(&self.weights[range])
            .map(|(&t, &w)| (t as usize, w))
    }
}

#[cfg(test)]
mod tests {
    use super::super::{Attributes, CollectionKind, NamedGraph};
    use super::*;

    #[test]
    fn named_view_uses_edge_endpoints_and_orphans() {
        let mut s = GraphStore::new();
        s.create_collection("v", CollectionKind::Vertex).unwrap();
        s.create_collection("w", CollectionKind::Vertex).unwrap();
        s.create_collection("e", CollectionKind::Edge).unwrap();
        for k in ["a", "b", "c"] {
            s.insert_vertex("v", k, Attributes::new()).unwrap();
        }
        s.insert_vertex("w", "lonely", Attributes::new()).unwrap();
        s.insert_edge("e", "v/a", "v/c", 1.0).unwrap();
        s.create_graph(NamedGraph::new("g", &["e"])).unwrap();
        s.create_graph(NamedGraph::new("g2", &["e"]).with_orphans(&["w"]))
            .unwrap();

        let g = GraphView::named(&s, "g").unwrap();
        assert_eq!(g.vertex_count(), 2);
        assert_eq!(g.record(1).handle(), "v/c");
        assert_eq!(g.edges()[0].source, 0);
        assert_eq!(g.edges()[0].target, 1);

        let g2 = GraphView::named(&s, "g2").unwrap();
        assert_eq!(g2.vertex_count(), 3);
        assert_eq!(GraphView::whole(&s).vertex_count(), 4);
    }

    #[test]
    fn simple_adjacency_collapses_parallels_and_loops() {
        let mut s = GraphStore::new();
        s.create_collection("v", CollectionKind::Vertex).unwrap();
        s.create_collection("e", CollectionKind::Edge).unwrap();
        for k in ["a", "b"] {
            s.insert_vertex("v", k, Attributes::new()).unwrap();
        }
        s.insert_edge("e", "v/a", "v/b", 1.0).unwrap();
        s.insert_edge("e", "v/b", "v/a", 2.5).unwrap();
        s.insert_edge("e", "v/a", "v/a", 1.0).unwrap();
        let view = GraphView::whole(&s);
        let adj = view.simple_adjacency();
        assert_eq!(adj[0], vec![(1, 2.5)]);
        assert_eq!(adj[1], vec![(0, 2.5)]);
        let csr = view.undirected_csr();
        assert_eq!(csr.degree(0), 4);
        assert_eq!(csr.degree(1), 2);
    }
}
