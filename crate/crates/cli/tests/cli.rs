// SPDX-License-Identifier: Apache-2.0

use collabgraph::store::CollectionKind;
use collabgraph::{save_store, GraphStore, NamedGraph};
use serde_json::{Map, Value};
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

const FIXTURE: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/tests/fixtures/dblp_extract.xml");

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_collabgraph"));
    c.env_remove("COLLABGRAPH_STORE").env_remove("COLLABGRAPH_PORT").env("RUST_LOG", "warn");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn json_out(o: &Output) -> Value {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Undirected-style store on "author"/"coauthor" with graph `g`.
fn save_edges(dir: &Path, n: usize, edges: &[(usize, usize)], communities: Option<&[u64]>) {
    let mut st = GraphStore::new();
    st.create_collection("author", CollectionKind::Vertex).unwrap();
    st.create_collection("coauthor", CollectionKind::Edge).unwrap();
    let ids: Vec<_> = (0..n).map(|i| st.insert_vertex("author", &format!("a{i}"), Map::new()).unwrap()).collect();
    for &(a, b) in edges {
        st.link("coauthor", ids[a], ids[b], None, 1.0).unwrap();
    }
    if let Some(c) = communities {
        for (id, &l) in ids.iter().zip(c) {
            st.set_community(*id, Some(l)).unwrap();
        }
    }
    st.create_graph(NamedGraph::new("g", &["coauthor"]).with_orphans(&["author"])).unwrap();
    save_store(&st, dir).unwrap();
}

fn barbell() -> Vec<(usize, usize)> {
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

fn ingest_fixture(store: &Path) -> Value {
    json_out(&run(&["ingest", "--input", FIXTURE, "--store", s(store)]))
}

#[test]
fn ingest_reports_counts_and_refuses_to_overwrite() {
    let dir = tempfile::tempdir().unwrap();
    let store = dir.path().join("store");
    let report = ingest_fixture(&store);
    assert_eq!(report["publications"], 4);
    assert_eq!(report["authors"], 1);
    assert_eq!(report["schools"], 1);
    assert_eq!(report["edges"], 2);
    assert!(store.join("manifest.json").is_file());

    let again = run(&["ingest", "--input", FIXTURE, "--store", s(&store)]);
    assert_eq!(again.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&again.stderr).contains("--append"));

    // A fresh store gives the same answer.
    let other = dir.path().join("other");
    assert_eq!(ingest_fixture(&other), report);

    let appended = json_out(&run(&["ingest", "--input", FIXTURE, "--store", s(&store), "--append"]));
    // Every publication key repeats; nothing new is added.
    assert_eq!(appended["duplicates_merged"], 4);
    assert_eq!(appended["vertices"], 0);
}

#[test]
fn ingest_edge_cases() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.xml");
    std::fs::write(&empty, "").unwrap();
    let report = json_out(&run(&["ingest", "--input", s(&empty), "--store", s(&dir.path().join("a"))]));
    assert_eq!(report["entries"], 0);
    assert_eq!(report["vertices"], 0);
    assert_eq!(report["edges"], 0);

    let missing = dir.path().join("nope.xml");
    let o = run(&["ingest", "--input", s(&missing), "--store", s(&dir.path().join("b"))]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nope.xml"));

    let o = run(&["ingest", "--input", FIXTURE, "--store", s(&dir.path().join("c")), "--chunk-lines", "0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn store_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let store = dir.path().join("store");
    let o = bin().args(["ingest", "--input", FIXTURE]).env("COLLABGRAPH_STORE", &store).output().unwrap();
    assert_eq!(json_out(&o)["publications"], 4);
}

#[test]
fn detect_finds_the_two_cliques() {
    let dir = tempfile::tempdir().unwrap();
    save_edges(dir.path(), 10, &barbell(), None);
    let out = json_out(&run(&["detect", "--store", s(dir.path()), "--graph", "g"]));
    assert_eq!(out["community_count"], 2);
    assert_eq!(out["converged"], true);
    assert_eq!(out["per_type_table"]["rows"][0]["vertices"], 10);

    // Results were written back: stats sees the same partition.
    let stats = json_out(&run(&["stats", "--store", s(dir.path()), "--graph", "g"]));
    assert_eq!(stats["communities"], 2);
    assert!(stats["modularity_Q"].as_f64().unwrap() > 0.4);

    let capped = json_out(&run(&["detect", "--store", s(dir.path()), "--graph", "g", "--max-gss", "1", "--result-field", "one"]));
    assert_eq!(capped["converged"], false);
    assert_eq!(capped["supersteps_run"], 1);

    let o = run(&["detect", "--store", s(dir.path()), "--graph", "missing"]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&["detect", "--store", s(&dir.path().join("none"))]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn stats_on_known_partitions() {
    let dir = tempfile::tempdir().unwrap();
    let tri = dir.path().join("tri");
    save_edges(&tri, 6, &[(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)], Some(&[0, 0, 0, 3, 3, 3]));
    let out = json_out(&run(&["stats", "--store", s(&tri), "--graph", "g"]));
    assert_eq!(out["triangles"], 2);
    assert_eq!(out["communities"], 2);
    assert!((out["modularity_M"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert!((out["avg_cc"].as_f64().unwrap() - 1.0).abs() < 1e-12);

    let empty = dir.path().join("empty");
    save_store(&GraphStore::new(), &empty).unwrap();
    let out = json_out(&run(&["stats", "--store", s(&empty)]));
    assert_eq!((out["vertices"].as_u64(), out["edges"].as_u64()), (Some(0), Some(0)));
    assert_eq!(out["triangles"], 0);
}

#[test]
fn query_prints_a_slim_graph() {
    let dir = tempfile::tempdir().unwrap();
    // Path a0 - a1 - a2 - a3.
    save_edges(dir.path(), 4, &[(0, 1), (1, 2), (2, 3)], Some(&[5, 5, 9, 9]));
    let out = json_out(&run(&["query", "--store", s(dir.path()), "--graph", "g", "--start", "author/a0", "--max", "2"]));
    assert_eq!(out["startNode"]["_id"], "author/a0");
    let ids: Vec<&str> = out["vertices"].as_array().unwrap().iter().map(|v| v["_id"].as_str().unwrap()).collect();
    // Whole paths are returned, start included.
    assert_eq!(ids, ["author/a0", "author/a1", "author/a2"]);
    assert_eq!(out["edges"].as_array().unwrap().len(), 2);
    let numbers: Vec<&str> = out["communities"].as_array().unwrap().iter().map(|c| c["number"].as_str().unwrap()).collect();
    assert_eq!(numbers, ["5", "9"]);

    let filtered = json_out(&run(&[
        "query", "--store", s(dir.path()), "--graph", "g", "--start", "author/a0", "--max", "3", "--community", "5",
    ]));
    assert_eq!(filtered["vertices"].as_array().unwrap().len(), 2);

    let o = run(&["query", "--store", s(dir.path()), "--graph", "g", "--start", "author/a0", "--min", "0"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["query", "--store", s(dir.path()), "--graph", "g", "--start", "author/a0", "--min", "3", "--max", "2"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["query", "--store", s(dir.path()), "--graph", "g", "--start", "author/zz"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("author/zz"));
}

#[cfg(unix)]
#[test]
fn serve_announces_its_address_and_stops_on_sigterm() {
    use std::io::{Read, Write};

    let dir = tempfile::tempdir().unwrap();
    let store: PathBuf = dir.path().join("store");
    ingest_fixture(&store);
    let mut child = bin()
        .args(["serve", "--store", s(&store), "--port", "0"])
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .unwrap();
    let mut lines = BufReader::new(child.stdout.take().unwrap()).lines();
    let addr = loop {
        let line = lines.next().expect("server exited before announcing").unwrap();
        if let Some(rest) = line.trim().strip_prefix("\"listening\": ") {
            break rest.trim_matches('"').to_string();
        }
    };

    let mut healthy = false;
    for _ in 0..200 {
        if let Ok(mut conn) = std::net::TcpStream::connect(&addr) {
            write!(conn, "GET /health HTTP/1.1\r\nHost: x\r\nConnection: close\r\n\r\n").unwrap();
            let mut resp = String::new();
            conn.read_to_string(&mut resp).unwrap();
            if resp.starts_with("HTTP/1.1 200") {
                healthy = true;
                break;
            }
        }
        std::thread::sleep(std::time::Duration::from_millis(25));
    }
    assert!(healthy, "server never became healthy");

    let killed = Command::new("kill").args(["-TERM", &child.id().to_string()]).status().unwrap();
    assert!(killed.success());
    let status = child.wait().unwrap();
    assert_eq!(status.code(), Some(0));
}
