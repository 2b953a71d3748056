// SPDX-License-Identifier: Apache-2.0

mod common;

use collabgraph::pregel::{
    detect_communities_with, run_pregel, PregelConfig, VertexProgram, ALL_TYPES,
};
use collabgraph::store::CollectionKind;
use collabgraph::{
    annotate_graph, detect_communities, partition_stats, GraphStore, GraphView, LpaParams,
    NamedGraph, Partition, PartitionStats, TieBreak,
};
use common::*;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;
use serde_json::Map;
use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};

fn labels(view: &GraphView<'_>, p: &Partition) -> Vec<u64> {
    p.labels_for(view).into_iter().map(Option::unwrap).collect()
}

fn graph_strategy() -> impl Strategy<Value = (usize, Vec<(usize, usize)>)> {
    (1usize..40).prop_flat_map(|n| {
        let edge = (0..n, 0..n);
        (Just(n), proptest::collection::vec(edge, 0..n * 3))
    })
}

/// Shortest hop count from vertex 0; one hop per superstep at most.
struct Hops;

impl VertexProgram for Hops {
    type Value = u32;
    type Message = u32;

    fn initial(&self, v: usize) -> u32 {
        if v == 0 { 0 } else { u32::MAX }
    }

    fn message(&self, _: usize, value: &u32, _: f64) -> u32 {
        value.saturating_add(1)
    }

    fn compute(&self, _: usize, _: usize, value: &u32, inbox: &[u32]) -> u32 {
        inbox.iter().copied().fold(*value, u32::min)
    }
}

fn bfs(n: usize, edges: &[(usize, usize)]) -> Vec<u32> {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut d = vec![u32::MAX; n];
    d[0] = 0;
    let mut q = VecDeque::from([0]);
    while let Some(u) = q.pop_front() {
        for &v in &adj[u] {
            if d[v] == u32::MAX {
                d[v] = d[u] + 1;
                q.push_back(v);
            }
        }
    }
    d
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn matches_the_superstep_simulator((n, edges) in graph_strategy(), include_self in any::<bool>(), workers in 1usize..6) {
        let (store, _) = store_from_edges(n, &edges);
        let view = GraphView::named(&store, GRAPH).unwrap();
        let max_gss = 60;
        let params = LpaParams { include_self, workers, max_gss, ..LpaParams::default() };
        let p = detect_communities(&view, &params).unwrap();
        let sim = simulate_lpa(n, &edges, include_self, max_gss);
        prop_assert_eq!(labels(&view, &p), sim.labels);
        prop_assert_eq!(p.supersteps_run, sim.steps);
        prop_assert_eq!(p.converged, sim.converged);
    }

    #[test]
    fn messages_per_step_equal_the_degree_sum((n, edges) in graph_strategy()) {
        let (store, _) = store_from_edges(n, &edges);
        let view = GraphView::named(&store, GRAPH).unwrap();
        let mut seen = Vec::new();
        let p = detect_communities_with(&view, &LpaParams { max_gss: 20, ..LpaParams::default() }, |s| seen.push(*s))
            .unwrap();
        prop_assert_eq!(seen.len(), p.supersteps_run);
        for (i, s) in seen.iter().enumerate() {
            prop_assert_eq!(s.step, i + 1);
            prop_assert_eq!(s.messages, 2 * edges.len() as u64);
        }
        prop_assert!(p.supersteps_run <= 20);
        if p.converged {
            prop_assert_eq!(seen.last().unwrap().active_count, 0);
        }
    }

    #[test]
    fn labels_come_from_initial_labels((n, edges) in graph_strategy(), seed in any::<u64>()) {
        let (store, _) = store_from_edges(n, &edges);
        let view = GraphView::named(&store, GRAPH).unwrap();
        for random_initial_labels in [false, true] {
            let params = LpaParams {
                tie_break: TieBreak::Random,
                rng_seed: Some(seed),
                include_self: false,
                random_initial_labels,
                max_gss: 30,
                ..LpaParams::default()
            };
            let p = detect_communities(&view, &params).unwrap();
            let initial: HashSet<u64> = if random_initial_labels {
                // With no edges every vertex keeps its initial label.
                let (bare, _) = store_from_edges(n, &[]);
                let bare_view = GraphView::named(&bare, GRAPH).unwrap();
                let start = detect_communities(&bare_view, &LpaParams { max_gss: 1, ..params.clone() }).unwrap();
                let set: HashSet<u64> = labels(&bare_view, &start).into_iter().collect();
                prop_assert_eq!(set.len(), n, "random initial labels must be distinct");
                set
            } else {
                (0..n as u64).collect()
            };
            prop_assert!(labels(&view, &p).iter().all(|l| initial.contains(l)));
        }
    }

    #[test]
    fn random_ties_do_not_depend_on_workers((n, edges) in graph_strategy(), seed in any::<u64>()) {
        let (store, _) = store_from_edges(n, &edges);
        let view = GraphView::named(&store, GRAPH).unwrap();
        let run = |workers| {
            let params = LpaParams { tie_break: TieBreak::Random, rng_seed: Some(seed), workers, max_gss: 25, ..LpaParams::default() };
            detect_communities(&view, &params).unwrap()
        };
        let one = run(1);
        for w in [2, 3, 7] {
            prop_assert_eq!(&run(w), &one);
        }
    }

    #[test]
    fn one_hop_per_superstep((n, edges) in graph_strategy(), steps in 1usize..6) {
        let (store, _) = store_from_edges(n, &edges);
        let view = GraphView::named(&store, GRAPH).unwrap();
        let csr = view.undirected_csr();
        let out = run_pregel(&csr, &Hops, PregelConfig { max_gss: steps, workers: 3 }).unwrap();
        let truth = bfs(n, &edges);
        let expected: Vec<u32> = truth.iter().map(|&d| if d as usize <= steps { d } else { u32::MAX }).collect();
        let reached = out.values.iter().filter(|&&d| d != u32::MAX).count();
        if out.converged {
            prop_assert_eq!(&out.values, &truth);
        } else {
            prop_assert_eq!(&out.values, &expected);
        }
        prop_assert!(reached >= 1);
    }
}

#[test]
fn vertex_order_within_a_step_does_not_matter() {
    let mut r = rng(11);
    for _ in 0..30 {
        let n = r.random_range(2..60);
        let m = r.random_range(0..n * 3);
        let edges = random_edges(&mut r, n, m, true, true);
        let (store, _) = store_from_edges(n, &edges);
        let view = GraphView::named(&store, GRAPH).unwrap();
        let base = detect_communities(&view, &LpaParams::default()).unwrap().to_handle_map(&store);

        // Same graph, vertices and edges inserted in shuffled order, with the
        // original initial labels pinned through seed labels.
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut r);
        let mut shuffled_edges = edges.clone();
        shuffled_edges.shuffle(&mut r);
        let mut s = GraphStore::new();
        s.create_collection(NODES, CollectionKind::Vertex).unwrap();
        s.create_collection(LINKS, CollectionKind::Edge).unwrap();
        let mut ids = HashMap::new();
        for &i in &perm {
            ids.insert(i, s.insert_vertex(NODES, &i.to_string(), Map::new()).unwrap());
        }
        for &(a, b) in &shuffled_edges {
            s.link(LINKS, ids[&a], ids[&b], None, 1.0).unwrap();
        }
        s.create_graph(NamedGraph::new(GRAPH, &[LINKS]).with_orphans(&[NODES])).unwrap();
        let seeds = (0..n).map(|i| (format!("{NODES}/{i}"), i as u64)).collect();
        let params = LpaParams { seed_labels: Some(seeds), ..LpaParams::default() };
        let v2 = GraphView::named(&s, GRAPH).unwrap();
        let other = detect_communities(&v2, &params).unwrap().to_handle_map(&s);
        assert_eq!(base, other);
    }
}

#[test]
fn converged_partition_is_a_fixed_point() {
    let mut r = rng(12);
    for _ in 0..30 {
        let n = r.random_range(1..80);
        let m = r.random_range(0..n * 2);
        let edges = random_edges(&mut r, n, m, false, false);
        let (store, _) = store_from_edges(n, &edges);
        let view = GraphView::named(&store, GRAPH).unwrap();
        let p = detect_communities(&view, &LpaParams::default()).unwrap();
        if !p.converged {
            continue;
        }
        let seeds = p.to_handle_map(&store).into_iter().collect();
        let again = detect_communities(&view, &LpaParams { seed_labels: Some(seeds), ..LpaParams::default() }).unwrap();
        assert!(again.converged);
        assert_eq!(again.supersteps_run, 1);
        assert_eq!(again.assignment, p.assignment);
    }
}

#[test]
fn barbell_stats_table() {
    let mut s = GraphStore::new();
    s.create_collection("author", CollectionKind::Vertex).unwrap();
    s.create_collection("coauthor", CollectionKind::Edge).unwrap();
    let ids: Vec<_> = (0..10).map(|_| s.insert_vertex_auto("author", Map::new()).unwrap()).collect();
    for (a, b) in barbell() {
        s.link("coauthor", ids[a], ids[b], None, 1.0).unwrap();
    }
    s.create_graph(NamedGraph::new("g", &["coauthor"])).unwrap();
    let p = detect_communities(&GraphView::named(&s, "g").unwrap(), &LpaParams::default()).unwrap();
    assert_eq!(annotate_graph(&mut s, "g", &p, "community").unwrap(), 10);
    let stats = partition_stats(&p, &s);
    assert_eq!(stats.rows.len(), 1);
    assert_eq!((stats.rows[0].vertex_type.as_str(), stats.rows[0].vertices, stats.rows[0].communities), ("author", 10, 2));
    let all = stats.all_types.as_ref().unwrap();
    assert_eq!((all.vertex_type.as_str(), all.vertices, all.communities), (ALL_TYPES, 10, 2));
    let text = stats.to_string();
    assert_eq!(text.parse::<PartitionStats>().unwrap(), stats);

    // Annotating under a second field keeps the first.
    annotate_graph(&mut s, "g", &p, "lpa_run2").unwrap();
    let doc = s.vertex(ids[0]).unwrap().to_document();
    assert_eq!(doc["community"], doc["lpa_run2"]);
}

#[test]
fn wide_table_layout_parses() {
    let text = "Vertex type              Number of vertices   Number of detected communities\n\
                author                   2786113              177592\n\
                all types                8500000              187451\n";
    let t: PartitionStats = text.parse().unwrap();
    let rows: BTreeMap<_, _> = t.rows.iter().chain(&t.all_types).map(|r| (r.vertex_type.as_str(), (r.vertices, r.communities))).collect();
    assert_eq!(rows["author"], (2786113, 177592));
    assert_eq!(rows[ALL_TYPES], (8500000, 187451));
}
