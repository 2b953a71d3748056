// SPDX-License-Identifier: Apache-2.0

//! `collabgraph`: batch driver for the bibliographic graph pipeline.
//!
//! Every subcommand writes JSON to stdout and diagnostics to stderr. Exit
//! status is 0 on success, 2 for usage errors and 1 for runtime failures.

use clap::builder::RangedU64ValueParser;
use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand};
use serde_json::{json, Value};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use collabgraph::api::{to_slim_graph, ServeConfig, Server, ServiceConfig, DEFAULT_SUGGESTION_LIMIT};
use collabgraph::ingest::{ingest_file, IngestOptions, DEFAULT_CHUNK_LINES};
use collabgraph::pregel::detect_communities_with;
use collabgraph::traversal::DEFAULT_VERTEX_CAP;
use collabgraph::{
    annotate_graph, load_store, partition_stats, save_store, stats_report, traverse, Direction,
    GraphStore, GraphView, LpaParams, Partition, TieBreak, TraversalSpec, DEFAULT_GRAPH,
};

#[derive(Debug, Parser)]
#[command(name = "collabgraph", version, about = "Bibliographic collaboration graph toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Repair, chunk, parse and derive a dblp-style XML dump into a store.
    Ingest(IngestArgs),
    /// Run label propagation and write communities back into the store.
    Detect(DetectArgs),
    /// Graph metrics and the per-type community table.
    Stats(StatsArgs),
    /// Depth-bounded neighbourhood of one vertex.
    Query(QueryArgs),
    /// Serve the HTTP query API until SIGINT or SIGTERM.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
struct StoreArg {
    /// Store directory.
    #[arg(long, env = "COLLABGRAPH_STORE")]
    store: PathBuf,
}

#[derive(Debug, Args)]
struct IngestArgs {
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    store: StoreArg,
    #[arg(long, default_value_t = DEFAULT_CHUNK_LINES, value_parser = positive())]
    chunk_lines: usize,
    /// Keep the repaired file and chunks here instead of a temporary directory.
    #[arg(long)]
    work_dir: Option<PathBuf>,
    /// Also write the parsed entries as JSON lines.
    #[arg(long)]
    emit_jsonl: Option<PathBuf>,
    /// Add to an existing store instead of requiring an empty one.
    #[arg(long)]
    append: bool,
}

#[derive(Debug, Args)]
struct DetectArgs {
    #[command(flatten)]
    store: StoreArg,
    #[arg(long, default_value = DEFAULT_GRAPH)]
    graph: String,
    #[arg(long, default_value_t = 100, value_parser = positive())]
    max_gss: usize,
    #[arg(long, default_value = "community")]
    result_field: String,
    #[arg(long, default_value_t = TieBreak::MinId)]
    tie_break: TieBreak,
    #[arg(long)]
    seed: Option<u64>,
    /// Leave the vertex's own label out of its tally.
    #[arg(long)]
    no_self: bool,
    /// Start from random labels drawn from the seed.
    #[arg(long)]
    random_initial_labels: bool,
    #[arg(long, value_parser = positive())]
    workers: Option<usize>,
}

#[derive(Debug, Args)]
struct StatsArgs {
    #[command(flatten)]
    store: StoreArg,
    /// Defaults to the standard graph, or the whole store if it has none.
    #[arg(long)]
    graph: Option<String>,
    #[arg(long, default_value = "community")]
    result_field: String,
}

#[derive(Debug, Args)]
struct QueryArgs {
    #[command(flatten)]
    store: StoreArg,
    /// Start vertex handle, e.g. `author/3`.
    #[arg(long)]
    start: String,
    #[arg(long, default_value_t = 1, value_parser = positive())]
    min: usize,
    #[arg(long, default_value_t = 2)]
    max: usize,
    #[arg(long, default_value_t = Direction::Any)]
    direction: Direction,
    #[arg(long, default_value = DEFAULT_GRAPH)]
    graph: String,
    /// Only walk through vertices of this community.
    #[arg(long)]
    community: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_VERTEX_CAP)]
    cap: usize,
    /// Select vertices by shortest distance instead of by path.
    #[arg(long)]
    distance_mode: bool,
}

#[derive(Debug, Args)]
struct ServeArgs {
    #[command(flatten)]
    store: StoreArg,
    #[arg(long, env = "COLLABGRAPH_PORT", default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: std::net::IpAddr,
    #[arg(long, default_value = DEFAULT_GRAPH)]
    graph: String,
    #[arg(long, default_value_t = DEFAULT_SUGGESTION_LIMIT)]
    suggestion_limit: usize,
    #[arg(long, default_value_t = DEFAULT_VERTEX_CAP)]
    vertex_cap: usize,
}

type Fallible<T> = Result<T, String>;

fn positive() -> RangedU64ValueParser<usize> {
    RangedU64ValueParser::new().range(1..)
}

fn emit(value: &Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("serializable"));
}

fn load(path: &Path) -> Fallible<GraphStore> {
    load_store(path).map_err(|e| format!("cannot load store {}: {e}", path.display()))
}

fn save(store: &GraphStore, path: &Path) -> Fallible<()> {
    save_store(store, path).map_err(|e| format!("cannot save store {}: {e}", path.display()))
}

fn has_store(path: &Path) -> bool {
    path.join("manifest.json").is_file()
}

fn cmd_ingest(a: IngestArgs) -> Fallible<Value> {
    let dir = &a.store.store;
    let mut store = if has_store(dir) {
        if !a.append {
            return Err(format!("{} already holds a store; pass --append to add to it", dir.display()));
        }
        load(dir)?
    } else {
        GraphStore::new()
    };
    let options = IngestOptions { chunk_lines: a.chunk_lines, work_dir: a.work_dir, emit_jsonl: a.emit_jsonl };
    let report = ingest_file(&a.input, &mut store, &options).map_err(|e| e.to_string())?;
    save(&store, dir)?;
    log::info!("{} vertices, {} edges saved to {}", store.vertex_count(), store.edge_count(), dir.display());
    Ok(serde_json::to_value(&report).expect("serializable"))
}

fn cmd_detect(a: DetectArgs) -> Fallible<Value> {
    let dir = &a.store.store;
    let mut store = load(dir)?;
    let mut params = LpaParams {
        max_gss: a.max_gss,
        result_field: a.result_field.clone(),
        tie_break: a.tie_break,
        rng_seed: a.seed,
        include_self: !a.no_self,
        random_initial_labels: a.random_initial_labels,
        ..LpaParams::default()
    };
    if let Some(w) = a.workers {
        params.workers = w;
    }
    let partition = {
        let view = GraphView::named(&store, &a.graph).map_err(|e| e.to_string())?;
        detect_communities_with(&view, &params, |s| {
            log::info!("superstep {}: {} changed, {} messages", s.step, s.active_count, s.messages);
        })
        .map_err(|e| e.to_string())?
    };
    annotate_graph(&mut store, &a.graph, &partition, &a.result_field).map_err(|e| e.to_string())?;
    save(&store, dir)?;
    Ok(json!({
        "supersteps_run": partition.supersteps_run,
        "converged": partition.converged,
        "community_count": partition.community_count(),
        "per_type_table": partition_stats(&partition, &store),
    }))
}

fn cmd_stats(a: StatsArgs) -> Fallible<Value> {
    let store = load(&a.store.store)?;
    let graph = match a.graph {
        Some(g) => Some(g),
        None => store.graph(DEFAULT_GRAPH).map(|_| DEFAULT_GRAPH.to_string()),
    };
    let (view, partition) = match &graph {
        Some(g) => (
            GraphView::named(&store, g).map_err(|e| e.to_string())?,
            Partition::from_store(&store, g, &a.result_field).map_err(|e| e.to_string())?,
        ),
        None => {
            let view = GraphView::whole(&store);
            let labels: Option<Vec<u64>> = (0..view.vertex_count())
                .map(|o| community_of(view.record(o), &a.result_field))
                .collect();
            let partition = match labels {
                Some(l) => Partition::from_labels(&view, &l),
                None => Partition::default(),
            };
            (view, partition)
        }
    };
    Ok(serde_json::to_value(stats_report(&view, &partition)).expect("serializable"))
}

fn community_of(v: &collabgraph::VertexRecord, field: &str) -> Option<u64> {
    if field == "community" {
        v.community
    } else {
        v.attributes.get(field).and_then(Value::as_u64)
    }
}

fn cmd_query(a: QueryArgs) -> Fallible<Value> {
    if a.max < a.min {
        Cli::command()
            .error(ErrorKind::ValueValidation, format!("--max ({}) must be at least --min ({})", a.max, a.min))
            .exit();
    }
    if a.cap == 0 {
        Cli::command().error(ErrorKind::ValueValidation, "--cap must be at least 1").exit();
    }
    let store = load(&a.store.store)?;
    let mut spec = TraversalSpec::new(a.start, a.graph)
        .depths(a.min, a.max)
        .direction(a.direction)
        .cap(Some(a.cap));
    spec.community_filter = a.community;
    spec.distance_mode = a.distance_mode;
    let result = traverse(&store, &spec).map_err(|e| e.to_string())?;
    if result.truncated {
        log::warn!("result truncated at {} vertices", a.cap);
    }
    Ok(serde_json::to_value(to_slim_graph(&store, &result)).expect("serializable"))
}

fn cmd_serve(a: ServeArgs) -> Fallible<Value> {
    let config = ServeConfig {
        addr: SocketAddr::new(a.host, a.port),
        store_path: a.store.store,
        service: ServiceConfig {
            graph: a.graph,
            suggestion_limit: a.suggestion_limit,
            vertex_cap: Some(a.vertex_cap),
        },
    };
    let runtime = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
    runtime.block_on(async move {
        let server = Server::bind(config).await.map_err(|e| e.to_string())?;
        let addr = server.local_addr().map_err(|e| e.to_string())?;
        // Announce the bound address first so callers using port 0 can find it.
        emit(&json!({ "listening": addr.to_string() }));
        server.run(collabgraph::api::shutdown_signal()).await.map_err(|e| e.to_string())?;
        log::info!("server stopped");
        Ok(Value::Null)
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .target(env_logger::Target::Stderr)
        .init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Ingest(a) => cmd_ingest(a),
        Command::Detect(a) => cmd_detect(a),
        Command::Stats(a) => cmd_stats(a),
        Command::Query(a) => cmd_query(a),
        Command::Serve(a) => cmd_serve(a),
    };
    match result {
        Ok(Value::Null) => ExitCode::SUCCESS,
        Ok(v) => {
            emit(&v);
            ExitCode::SUCCESS
        }
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::FAILURE
        }
    }
}
