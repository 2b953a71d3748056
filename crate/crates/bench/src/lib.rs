// SPDX-License-Identifier: Apache-2.0

//! Input generators shared by the benchmarks.

use collabgraph::store::CollectionKind;
use collabgraph::{GraphStore, NamedGraph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Map;

pub const GRAPH: &str = "g";

/// `n` vertices and `m` uniformly random edges (loops and repeats allowed).
pub fn random_store(seed: u64, n: usize, m: usize) -> GraphStore {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let mut s = GraphStore::new();
    s.create_collection("node", CollectionKind::Vertex).unwrap();
    s.create_collection("link", CollectionKind::Edge).unwrap();
    let ids: Vec<_> = (0..n).map(|i| s.insert_vertex("node", &i.to_string(), Map::new()).unwrap()).collect();
    for _ in 0..m {
        let (a, b) = (r.random_range(0..n), r.random_range(0..n));
        s.link("link", ids[a], ids[b], None, 1.0).unwrap();
    }
    s.create_graph(NamedGraph::new(GRAPH, &["link"]).with_orphans(&["node"])).unwrap();
    s
}

/// A dblp-shaped document with `publications` entries drawn from `authors` names.
pub fn synthetic_dblp(seed: u64, publications: usize, authors: usize) -> String {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let mut xml = String::from("<?xml version=\"1.0\" encoding=\"ISO-8859-1\"?>\n<dblp>\n");
    for i in 0..publications {
        xml.push_str(&format!("<article mdate=\"2020-01-01\" key=\"syn/p{i}\">\n"));
        for _ in 0..r.random_range(1..=4) {
            xml.push_str(&format!("<author>Author {}</author>\n", r.random_range(0..authors)));
        }
        xml.push_str(&format!("<title>Paper number {i}.</title>\n<year>{}</year>\n", 1990 + i % 30));
        xml.push_str(&format!("<journal>Journal {}</journal>\n</article>\n", r.random_range(0..20)));
    }
    xml.push_str("</dblp>\n");
    xml
}
