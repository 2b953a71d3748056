// SPDX-License-Identifier: Apache-2.0

//! Fixture builders and brute-force reference implementations shared by the
//! integration suites. The reference code works on plain edge lists and never
//! calls into the library's algorithms.

#![allow(dead_code, clippy::needless_range_loop)]

use collabgraph::store::CollectionKind;
use collabgraph::{Direction, GraphStore, NamedGraph, VertexId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Map;
use std::collections::{BTreeMap, BTreeSet, HashSet};

pub const NODES: &str = "node";
pub const LINKS: &str = "link";
pub const GRAPH: &str = "g";

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A store with vertices `node/0..n` (inserted in order) and one `link` edge
/// per pair, plus graph `g` over both.
pub fn store_from_edges(n: usize, edges: &[(usize, usize)]) -> (GraphStore, Vec<VertexId>) {
    let mut s = GraphStore::new();
    s.create_collection(NODES, CollectionKind::Vertex).unwrap();
    s.create_collection(LINKS, CollectionKind::Edge).unwrap();
    let ids: Vec<_> = (0..n)
        .map(|i| s.insert_vertex(NODES, &i.to_string(), Map::new()).unwrap())
        .collect();
    for &(a, b) in edges {
        s.link(LINKS, ids[a], ids[b], None, 1.0).unwrap();
    }
    s.create_graph(NamedGraph::new(GRAPH, &[LINKS]).with_orphans(&[NODES])).unwrap();
    (s, ids)
}

/// `m` uniformly random directed pairs; loops and parallels allowed on request.
pub fn random_edges(r: &mut impl Rng, n: usize, m: usize, loops: bool, parallel: bool) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(m);
    let mut seen = HashSet::new();
    if n == 0 {
        return out;
    }
    let max_pairs = if loops { n * n } else { n * (n - 1) };
    let mut attempts = 0;
    while out.len() < m && attempts < 50 * m + 100 {
        attempts += 1;
        let a = r.random_range(0..n);
        let b = r.random_range(0..n);
        if a == b && !loops {
            continue;
        }
        if !parallel {
            let key = (a.min(b), a.max(b));
            if !seen.insert(key) {
                continue;
            }
        }
        out.push((a, b));
        if !parallel && seen.len() >= max_pairs {
            break;
        }
    }
    out
}

/// Erdos-Renyi style simple undirected graph.
pub fn gnp(r: &mut impl Rng, n: usize, p: f64) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if r.random_bool(p) {
                out.push((a, b));
            }
        }
    }
    out
}

/// Two K5s on 0..5 and 5..10 joined by the edge 4-5.
pub fn barbell() -> Vec<(usize, usize)> {
    let mut e = Vec::new();
    for base in [0, 5] {
        for a in 0..5 {
            for b in a + 1..5 {
                e.push((base + a, base + b));
            }
        }
    }
    e.push((4, 5));
    e
}

/// Adjacency matrix of the simple undirected view.
pub fn simple_matrix(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<bool>> {
    let mut a = vec![vec![false; n]; n];
    for &(x, y) in edges {
        if x != y {
            a[x][y] = true;
            a[y][x] = true;
        }
    }
    a
}

pub fn brute_triangles(n: usize, edges: &[(usize, usize)]) -> u64 {
    let a = simple_matrix(n, edges);
    let mut t = 0;
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                if a[i][j] && a[j][k] && a[i][k] {
                    t += 1;
                }
            }
        }
    }
    t
}

pub fn brute_cc(n: usize, edges: &[(usize, usize)]) -> Vec<f64> {
    let a = simple_matrix(n, edges);
    (0..n)
        .map(|u| {
            let nb: Vec<usize> = (0..n).filter(|&v| a[u][v]).collect();
            let k = nb.len();
            if k < 2 {
                return 0.0;
            }
            let mut r = 0;
            for i in 0..k {
                for j in i + 1..k {
                    if a[nb[i]][nb[j]] {
                        r += 1;
                    }
                }
            }
            2.0 * r as f64 / (k * (k - 1)) as f64
        })
        .collect()
}

/// Double sum over ordered pairs of the modularity definition.
pub fn pairwise_q(n: usize, edges: &[(usize, usize)], community: &[u64]) -> f64 {
    let a = simple_matrix(n, edges);
    let k: Vec<f64> = (0..n).map(|u| a[u].iter().filter(|&&x| x).count() as f64).collect();
    let two_m: f64 = k.iter().sum();
    let mut q = 0.0;
    for u in 0..n {
        for v in 0..n {
            if community[u] == community[v] {
                let auv = if a[u][v] { 1.0 } else { 0.0 };
                q += auv - k[u] * k[v] / two_m;
            }
        }
    }
    q / two_m
}

/// Component label per vertex: smallest member index, via union-find.
pub fn union_find_components(n: usize, edges: &[(usize, usize)]) -> Vec<usize> {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut c = x;
        while p[c] != r {
            let next = p[c];
            p[c] = r;
            c = next;
        }
        r
    }
    for &(a, b) in edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            parent[hi] = lo;
        }
    }
    (0..n).map(|x| find(&mut parent, x)).collect()
}

/// SCC label per vertex from the transitive closure: smallest index among
/// mutually reachable vertices.
pub fn closure_scc(n: usize, edges: &[(usize, usize)]) -> Vec<usize> {
    let mut reach = vec![vec![false; n]; n];
    for (i, row) in reach.iter_mut().enumerate() {
        row[i] = true;
    }
    for &(a, b) in edges {
        reach[a][b] = true;
    }
    for k in 0..n {
        for i in 0..n {
            if reach[i][k] {
                for j in 0..n {
                    if reach[k][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
    }
    (0..n)
        .map(|u| (0..n).find(|&v| reach[u][v] && reach[v][u]).unwrap())
        .collect()
}

/// Groups of vertex indices sharing a label, as a canonical set of sets.
pub fn blocks<L: Ord + Clone>(labels: &[L]) -> BTreeSet<BTreeSet<usize>> {
    let mut m: BTreeMap<L, BTreeSet<usize>> = BTreeMap::new();
    for (i, l) in labels.iter().enumerate() {
        m.entry(l.clone()).or_default().insert(i);
    }
    m.into_values().collect()
}

/// Synchronous label propagation, one vertex at a time: initial labels are
/// indices, the tally is unit-weight over incident edge ends plus (optionally)
/// the own label, and ties go to the smallest label.
pub struct LpaSim {
    pub labels: Vec<u64>,
    pub steps: usize,
    pub converged: bool,
}

pub fn simulate_lpa(n: usize, edges: &[(usize, usize)], include_self: bool, max_gss: usize) -> LpaSim {
    let mut labels: Vec<u64> = (0..n as u64).collect();
    if n == 0 {
        return LpaSim { labels, steps: 0, converged: true };
    }
    let mut ends: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(a, b) in edges {
        ends[a].push(b);
        ends[b].push(a);
    }
    let mut steps = 0;
    while steps < max_gss {
        steps += 1;
        let mut next = labels.clone();
        let mut changed = 0;
        for u in 0..n {
            let mut tally: BTreeMap<u64, u64> = BTreeMap::new();
            if include_self {
                *tally.entry(labels[u]).or_default() += 1;
            }
            for &v in &ends[u] {
                *tally.entry(labels[v]).or_default() += 1;
            }
            let Some(best) = tally.values().max().copied() else { continue };
            let pick = *tally.iter().find(|(_, &c)| c == best).unwrap().0;
            if pick != labels[u] {
                changed += 1;
            }
            next[u] = pick;
        }
        labels = next;
        if changed == 0 {
            return LpaSim { labels, steps, converged: true };
        }
    }
    LpaSim { labels, steps, converged: false }
}

/// Every simple path from `start` whose length is within `min..=max`,
/// reduced to the union of its vertices and edge indices.
pub fn path_oracle(
    n: usize,
    edges: &[(usize, usize)],
    start: usize,
    min: usize,
    max: usize,
    dir: Direction,
) -> (BTreeSet<usize>, BTreeSet<usize>) {
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (i, &(a, b)) in edges.iter().enumerate() {
        if matches!(dir, Direction::Outbound | Direction::Any) {
            adj[a].push((i, b));
        }
        if matches!(dir, Direction::Inbound | Direction::Any) {
            adj[b].push((i, a));
        }
    }
    let mut vs = BTreeSet::new();
    let mut es = BTreeSet::new();
    let mut path = vec![start];
    let mut path_e = Vec::new();
    fn walk(
        adj: &[Vec<(usize, usize)>],
        min: usize,
        max: usize,
        path: &mut Vec<usize>,
        path_e: &mut Vec<usize>,
        vs: &mut BTreeSet<usize>,
        es: &mut BTreeSet<usize>,
    ) {
        if path_e.len() >= min {
            vs.extend(path.iter().copied());
            es.extend(path_e.iter().copied());
        }
        if path_e.len() == max {
            return;
        }
        let u = *path.last().unwrap();
        for &(e, v) in &adj[u] {
            if path.contains(&v) {
                continue;
            }
            path.push(v);
            path_e.push(e);
            walk(adj, min, max, path, path_e, vs, es);
            path.pop();
            path_e.pop();
        }
    }
    walk(&adj, min, max, &mut path, &mut path_e, &mut vs, &mut es);
    (vs, es)
}

/// Checks a value against the wire types: `SlimGraph` with nested
/// `SlimNode`, `SlimEdge` and `Community`. Extra keys are rejected.
pub fn check_slim_graph(v: &serde_json::Value) -> Result<(), String> {
    use serde_json::Value;
    fn object<'a>(v: &'a Value, what: &str, allowed: &[&str]) -> Result<&'a Map<String, Value>, String> {
        let o = v.as_object().ok_or_else(|| format!("{what} is not an object: {v}"))?;
        if let Some(k) = o.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(format!("{what} has unexpected key {k}"));
        }
        Ok(o)
    }
    fn string(o: &Map<String, Value>, key: &str, required: bool, what: &str) -> Result<(), String> {
        match o.get(key) {
            Some(Value::String(_)) => Ok(()),
            None | Some(Value::Null) if !required => Ok(()),
            other => Err(format!("{what}.{key} should be a string, got {other:?}")),
        }
    }
    fn node(v: &Value) -> Result<(), String> {
        let o = object(v, "SlimNode", &["_id", "graph_name", "community"])?;
        string(o, "_id", true, "SlimNode")?;
        string(o, "graph_name", true, "SlimNode")?;
        string(o, "community", false, "SlimNode")
    }
    fn list<'a>(o: &'a Map<String, Value>, key: &str) -> Result<&'a [Value], String> {
        match o.get(key) {
            Some(Value::Array(a)) => Ok(a),
            None | Some(Value::Null) => Ok(&[]),
            other => Err(format!("SlimGraph.{key} should be a list, got {other:?}")),
        }
    }
    let g = object(v, "SlimGraph", &["startNode", "vertices", "edges", "communities"])?;
    node(g.get("startNode").ok_or("SlimGraph.startNode is required")?)?;
    for n in list(g, "vertices")? {
        node(n)?;
    }
    for e in list(g, "edges")? {
        let o = object(e, "SlimEdge", &["_from", "_to", "label"])?;
        string(o, "_from", true, "SlimEdge")?;
        string(o, "_to", true, "SlimEdge")?;
        string(o, "label", false, "SlimEdge")?;
    }
    for c in list(g, "communities")? {
        let o = object(c, "Community", &["number"])?;
        string(o, "number", false, "Community")?;
    }
    Ok(())
}

pub fn check_suggested_node(v: &serde_json::Value) -> Result<(), String> {
    let o = v.as_object().ok_or("SuggestedNode is not an object")?;
    for k in o.keys() {
        if !["_id", "graph_name", "the_type", "appearances"].contains(&k.as_str()) {
            return Err(format!("SuggestedNode has unexpected key {k}"));
        }
    }
    if !o.get("_id").is_some_and(|x| x.is_string()) {
        return Err("SuggestedNode._id should be a string".into());
    }
    for k in ["graph_name", "the_type"] {
        if !o.get(k).is_none_or(|x| x.is_string() || x.is_null()) {
            return Err(format!("SuggestedNode.{k} should be a string"));
        }
    }
    if !o.get("appearances").is_none_or(|x| x.is_i64() || x.is_u64() || x.is_null()) {
        return Err("SuggestedNode.appearances should be an integer".into());
    }
    Ok(())
}

/// A small dblp-style document: articles and proceedings papers drawn from a
/// fixed pool of authors, journals and publishers.
pub fn synthetic_dblp(seed: u64, publications: usize, authors: usize) -> String {
    let mut r = rng(seed);
    let mut xml = String::from("<?xml version=\"1.0\" encoding=\"ISO-8859-1\"?>\n<dblp>\n");
    for i in 0..publications {
        let kind = if r.random_bool(0.6) { "article" } else { "inproceedings" };
        xml.push_str(&format!("<{kind} mdate=\"2020-01-01\" key=\"syn/p{i}\">\n"));
        let count = r.random_range(1..=4);
        let mut picked = BTreeSet::new();
        while picked.len() < count.min(authors) {
            picked.insert(r.random_range(0..authors));
        }
        for a in picked {
            xml.push_str(&format!("<author>Author {a}</author>\n"));
        }
        xml.push_str(&format!("<title>Paper number {i}.</title>\n<year>{}</year>\n", 1990 + i % 30));
        if kind == "article" {
            xml.push_str(&format!("<journal>Journal {}</journal>\n", r.random_range(0..5)));
        } else {
            xml.push_str(&format!("<publisher>Publisher {}</publisher>\n", r.random_range(0..3)));
        }
        xml.push_str(&format!("</{kind}>\n"));
    }
    xml.push_str("</dblp>\n");
    xml
}
