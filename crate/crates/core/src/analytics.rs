// SPDX-License-Identifier: Apache-2.0

//! Structure and partition-quality metrics. Everything except SCC works on
//! the simple undirected view: parallel edges collapsed, self-loops dropped.

use serde::Serialize;
use std::collections::HashMap;
use thiserror::Error;

use crate::pregel::{partition_stats, Partition, PartitionStats};
use crate::store::{GraphView, VertexId};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AnalyticsError {
    #[error("graph has no edges")]
    EmptyGraph,
    #[error("vertex {0} is not in the graph")]
    UnknownVertex(String),
    #[error("partition has no community for {0}")]
    Incomplete(String),
}

fn common_sorted(a: &[(usize, f64)], b: &[(usize, f64)], mut hit: impl FnMut(usize)) {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                hit(a[i].0);
                i += 1;
                j += 1;
            }
        }
    }
}

/// Edges among the neighbours of `u`.
fn neighbour_links(adj: &[Vec<(usize, f64)>], u: usize) -> u64 {
    let mut twice = 0;
    for &(v, _) in &adj[u] {
        common_sorted(&adj[u], &adj[v], |_| twice += 1);
    }
    twice / 2
}

fn cc_from(adj: &[Vec<(usize, f64)>], u: usize) -> f64 {
    let k = adj[u].len() as f64;
    if k < 2.0 {
        return 0.0;
    }
    2.0 * neighbour_links(adj, u) as f64 / (k * (k - 1.0))
}

pub fn clustering_coefficient(view: &GraphView<'_>, vertex: VertexId) -> Result<f64, AnalyticsError> {
    let u = view
        .ordinal(vertex)
        .ok_or_else(|| AnalyticsError::UnknownVertex(format!("#{}", vertex.index())))?;
    Ok(cc_from(&view.simple_adjacency(), u))
}

/// Per-vertex coefficients in view ordinal order.
pub fn clustering_coefficients(view: &GraphView<'_>) -> Vec<f64> {
    let adj = view.simple_adjacency();
    (0..adj.len()).map(|u| cc_from(&adj, u)).collect()
}

pub fn triangle_count(view: &GraphView<'_>) -> u64 {
    let adj = view.simple_adjacency();
    let mut count = 0;
    for u in 0..adj.len() {
        for &(v, _) in adj[u].iter().filter(|(v, _)| *v > u) {
            common_sorted(&adj[u], &adj[v], |w| {
                if w > v {
                    count += 1;
                }
            });
        }
    }
    count
}

fn labels(view: &GraphView<'_>, partition: &Partition) -> Result<Vec<u64>, AnalyticsError> {
    view.vertex_ids()
        .iter()
        .enumerate()
        .map(|(ord, &v)| {
            partition
                .get(v)
                .ok_or_else(|| AnalyticsError::Incomplete(view.record(ord).handle().to_string()))
        })
        .collect()
}

/// `Σ_c [L_c/L − (k_c/2L)²]` with `L` undirected edges, `L_c` of them inside
/// community `c` and `k_c` the summed degree of its members.
pub fn modularity_m(view: &GraphView<'_>, partition: &Partition) -> Result<f64, AnalyticsError> {
    let adj = view.simple_adjacency();
    let label = labels(view, partition)?;
    let mut l = 0u64;
    let mut per: HashMap<u64, (u64, u64)> = HashMap::new();
    for (u, list) in adj.iter().enumerate() {
        per.entry(label[u]).or_default().1 += list.len() as u64;
        for &(v, _) in list.iter().filter(|(v, _)| *v > u) {
            l += 1;
            if label[u] == label[v] {
                per.get_mut(&label[u]).expect("entry made above").0 += 1;
            }
        }
    }
    if l == 0 {
        return Err(AnalyticsError::EmptyGraph);
    }
    let l = l as f64;
    let mut terms: Vec<(u64, f64)> = per
        .into_iter()
        .map(|(c, (lc, kc))| (c, lc as f64 / l - (kc as f64 / (2.0 * l)).powi(2)))
        .collect();
    terms.sort_unstable_by_key(|t| t.0);
    Ok(terms.iter().map(|t| t.1).sum())
}

/// `(1/2m) Σ_{u,v} [A_uv − k_u k_v / 2m] δ(c_u, c_v)` over ordered pairs,
/// evaluated per community: each community contributes `2·W_c − K_c²/2m`,
/// where `W_c` is its internal edge weight and `K_c` its weighted degree.
pub fn modularity_q(view: &GraphView<'_>, partition: &Partition) -> Result<f64, AnalyticsError> {
    let adj = view.simple_adjacency();
    let label = labels(view, partition)?;
    let mut two_m = 0.0;
    let mut per: HashMap<u64, (f64, f64)> = HashMap::new();
    for (u, list) in adj.iter().enumerate() {
        let k: f64 = list.iter().map(|p| p.1).sum();
        two_m += k;
        let e = per.entry(label[u]).or_default();
        e.1 += k;
        e.0 += list.iter().filter(|(v, _)| label[*v] == label[u]).map(|p| p.1).sum::<f64>();
    }
    if two_m == 0.0 {
        return Err(AnalyticsError::EmptyGraph);
    }
    let mut terms: Vec<(u64, f64)> =
        per.into_iter().map(|(c, (a, k))| (c, a - k * k / two_m)).collect();
    terms.sort_unstable_by_key(|t| t.0);
    Ok(terms.iter().map(|t| t.1).sum::<f64>() / two_m)
}

/// Component id = smallest ordinal in the component, edge direction ignored.
pub fn weakly_connected_components(view: &GraphView<'_>) -> Partition {
    let csr = view.undirected_csr();
    let n = view.vertex_count();
    let mut comp = vec![u64::MAX; n];
    let mut queue = std::collections::VecDeque::new();
    for s in 0..n {
        if comp[s] != u64::MAX {
            continue;
        }
        comp[s] = s as u64;
        queue.push_back(s);
        while let Some(u) = queue.pop_front() {
            for (v, _) in csr.neighbors(u) {
                if comp[v] == u64::MAX {
                    comp[v] = s as u64;
                    queue.push_back(v);
                }
            }
        }
    }
    Partition::from_labels(view, &comp)
}

/// Component id = smallest ordinal in the component, following `_from → _to`.
pub fn strongly_connected_components(view: &GraphView<'_>) -> Partition {
    let n = view.vertex_count();
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
    for e in view.edges() {
        out[e.source].push(e.target);
    }
    // Iterative Tarjan.
    const UNSEEN: usize = usize::MAX;
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comp = vec![0u64; n];
    let mut next = 0;
    let mut frames: Vec<(usize, usize)> = Vec::new();
    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        frames.push((root, 0));
        while let Some(top) = frames.len().checked_sub(1) {
            let (u, edge) = frames[top];
            if index[u] == UNSEEN {
                index[u] = next;
                low[u] = next;
                next += 1;
                stack.push(u);
                on_stack[u] = true;
            }
            if let Some(&v) = out[u].get(edge) {
                frames[top].1 += 1;
                if index[v] == UNSEEN {
                    frames.push((v, 0));
                } else if on_stack[v] {
                    low[u] = low[u].min(index[v]);
                }
                continue;
            }
            frames.pop();
            if let Some(&(parent, _)) = frames.last() {
                low[parent] = low[parent].min(low[u]);
            }
            if low[u] == index[u] {
                let mut members = Vec::new();
                loop {
                    let w = stack.pop().expect("tarjan stack");
                    on_stack[w] = false;
                    members.push(w);
                    if w == u {
                        break;
                    }
                }
                let id = *members.iter().min().expect("non-empty") as u64;
                for w in members {
                    comp[w] = id;
                }
            }
        }
    }
    Partition::from_labels(view, &comp)
}

/// Summary printed by the `stats` command.
#[derive(Clone, Debug, Serialize)]
pub struct StatsReport {
    pub vertices: usize,
    pub edges: usize,
    pub triangles: u64,
    pub avg_cc: f64,
    /// `None` when some vertex has no community.
    #[serde(rename = "modularity_M")]
    pub modularity_m: Option<f64>,
    #[serde(rename = "modularity_Q")]
    pub modularity_q: Option<f64>,
    pub wcc_count: usize,
    pub scc_count: usize,
    pub communities: usize,
    pub per_type_table: PartitionStats,
}

/// Modularity is reported as 0 for a graph without edges.
pub fn stats_report(view: &GraphView<'_>, partition: &Partition) -> StatsReport {
    let cc = clustering_coefficients(view);
    let avg_cc = if cc.is_empty() { 0.0 } else { cc.iter().sum::<f64>() / cc.len() as f64 };
    let score = |r: Result<f64, AnalyticsError>| match r {
        Ok(v) => Some(v),
        Err(AnalyticsError::EmptyGraph) => Some(0.0),
        Err(_) => None,
    };
    StatsReport {
        vertices: view.vertex_count(),
        edges: view.edge_count(),
        triangles: triangle_count(view),
        avg_cc,
        modularity_m: score(modularity_m(view, partition)),
        modularity_q: score(modularity_q(view, partition)),
        wcc_count: weakly_connected_components(view).community_count(),
        scc_count: strongly_connected_components(view).community_count(),
        communities: partition.community_count(),
        per_type_table: partition_stats(partition, view.store()),
    }
}
