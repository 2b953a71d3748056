// SPDX-License-Identifier: Apache-2.0

use indexmap::IndexMap;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

use super::engine::{run_pregel_with, PregelConfig, PregelError, SuperstepStatus, VertexProgram};
use crate::store::{GraphStore, GraphView, StoreError, VertexId};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieBreak {
    #[default]
    MinId,
    Random,
}

impl FromStr for TieBreak {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "min_id" => Ok(Self::MinId),
            "random" => Ok(Self::Random),
            other => Err(format!("unknown tie-break mode `{other}` (expected min_id or random)")),
        }
    }
}

impl fmt::Display for TieBreak {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::MinId => "min_id",
            Self::Random => "random",
        })
    }
}

#[derive(Clone, Debug)]
pub struct LpaParams {
    pub max_gss: usize,
    pub result_field: String,
    pub tie_break: TieBreak,
    pub rng_seed: Option<u64>,
    /// Initial labels by vertex handle; other vertices start at their ordinal.
    pub seed_labels: Option<HashMap<String, u64>>,
    pub include_self: bool,
    /// Start from distinct random 64-bit labels instead of ordinals.
    pub random_initial_labels: bool,
    pub workers: usize,
}

impl Default for LpaParams {
    fn default() -> Self {
        Self {
            max_gss: 500,
            result_field: "community".into(),
            tie_break: TieBreak::MinId,
            rng_seed: None,
            seed_labels: None,
            include_self: true,
            random_initial_labels: false,
            workers: rayon::current_num_threads().max(1),
        }
    }
}

#[derive(Debug, Error)]
pub enum LpaError {
    #[error(transparent)]
    Pregel(#[from] PregelError),
    #[error("{0} requires rng_seed")]
    MissingSeed(&'static str),
    #[error("result_field must be a non-empty name not starting with '_'")]
    BadResultField,
    #[error("seed label given for `{0}`, which is not in the graph")]
    UnknownSeedVertex(String),
    #[error("partition has no community for {0}")]
    Incomplete(String),
    #[error(transparent)]
    Store(#[from] StoreError),
}

impl LpaParams {
    pub fn validate(&self) -> Result<(), LpaError> {
        if self.max_gss == 0 {
            return Err(PregelError::ZeroMaxGss.into());
        }
        if self.workers == 0 {
            return Err(PregelError::ZeroWorkers.into());
        }
        if self.rng_seed.is_none() {
            if self.tie_break == TieBreak::Random {
                return Err(LpaError::MissingSeed("random tie-break"));
            }
            if self.random_initial_labels {
                return Err(LpaError::MissingSeed("random initial labels"));
            }
        }
        if self.result_field.is_empty() || self.result_field.starts_with('_') {
            return Err(LpaError::BadResultField);
        }
        Ok(())
    }
}

/// Community id per vertex, in view ordinal order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Partition {
    pub assignment: IndexMap<VertexId, u64>,
    pub supersteps_run: usize,
    pub converged: bool,
}

impl Partition {
    pub fn from_labels(view: &GraphView<'_>, labels: &[u64]) -> Self {
        Self {
            assignment: view.vertex_ids().iter().copied().zip(labels.iter().copied()).collect(),
            supersteps_run: 0,
            converged: true,
        }
    }

    /// Reads the `field` annotation of every vertex in `graph`; vertices
    /// without one are left out.
    pub fn from_store(store: &GraphStore, graph: &str, field: &str) -> Result<Self, StoreError> {
        let view = GraphView::named(store, graph)?;
        let mut assignment = IndexMap::new();
        for (ord, &id) in view.vertex_ids().iter().enumerate() {
            let rec = view.record(ord);
            let c = if field == "community" {
                rec.community
            } else {
                rec.attributes.get(field).and_then(serde_json::Value::as_u64)
            };
            if let Some(c) = c {
                assignment.insert(id, c);
            }
        }
        Ok(Self { assignment, supersteps_run: 0, converged: true })
    }

    pub fn get(&self, v: VertexId) -> Option<u64> {
        self.assignment.get(&v).copied()
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn community_count(&self) -> usize {
        self.assignment.values().collect::<HashSet<_>>().len()
    }

    /// Members of every community, keyed by id.
    pub fn communities(&self) -> BTreeMap<u64, Vec<VertexId>> {
        let mut m: BTreeMap<u64, Vec<VertexId>> = BTreeMap::new();
        for (&v, &c) in &self.assignment {
            m.entry(c).or_default().push(v);
        }
        m
    }

    /// Labels aligned with `view` ordinals; `None` where unassigned.
    pub fn labels_for(&self, view: &GraphView<'_>) -> Vec<Option<u64>> {
        view.vertex_ids().iter().map(|v| self.get(*v)).collect()
    }

    pub fn to_handle_map(&self, store: &GraphStore) -> BTreeMap<String, u64> {
        self.assignment
            .iter()
            .filter_map(|(v, c)| store.vertex(*v).map(|r| (r.handle().to_string(), *c)))
            .collect()
    }
}

struct LabelPropagation {
    initial: Vec<u64>,
    include_self: bool,
    tie_break: TieBreak,
    seed: u64,
}

impl LabelPropagation {
    fn pick(&self, step: usize, vertex: usize, tied: &[u64]) -> u64 {
        match self.tie_break {
            TieBreak::MinId => tied[0],
            TieBreak::Random if tied.len() == 1 => tied[0],
            TieBreak::Random => {
                // One independent stream per vertex and a fixed window per
                // step: the draw depends only on (seed, step, vertex).
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                rng.set_stream(vertex as u64);
                rng.set_word_pos(step as u128 * 16);
                tied[rng.random_range(0..tied.len())]
            }
        }
    }
}

impl VertexProgram for LabelPropagation {
    type Value = u64;
    type Message = (u64, f64);

    fn initial(&self, vertex: usize) -> u64 {
        self.initial[vertex]
    }

    fn message(&self, _: usize, value: &u64, weight: f64) -> (u64, f64) {
        (*value, weight)
    }

    fn compute(&self, step: usize, vertex: usize, value: &u64, inbox: &[(u64, f64)]) -> u64 {
        if inbox.is_empty() {
            return *value;
        }
        let mut tally: Vec<(u64, f64)> = Vec::with_capacity(inbox.len() + 1);
        tally.extend_from_slice(inbox);
        if self.include_self {
            tally.push((*value, 1.0));
        }
        // Sum weights per label in a fixed order so ties compare exactly.
        tally.sort_unstable_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let mut sums: Vec<(u64, f64)> = Vec::with_capacity(tally.len());
        for (label, w) in tally {
            match sums.last_mut() {
                Some((l, total)) if *l == label => *total += w,
                _ => sums.push((label, w)),
            }
        }
        let best = sums.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
        let tied: Vec<u64> = sums.iter().filter(|s| s.1 == best).map(|s| s.0).collect();
        self.pick(step, vertex, &tied)
    }
}

fn initial_labels(view: &GraphView<'_>, params: &LpaParams) -> Result<Vec<u64>, LpaError> {
    let n = view.vertex_count();
    let mut labels: Vec<u64> = if params.random_initial_labels {
        let mut rng = ChaCha8Rng::seed_from_u64(params.rng_seed.expect("validated"));
        let mut used = HashSet::with_capacity(n);
        (0..n)
            .map(|_| loop {
                let l: u64 = rng.random();
                if used.insert(l) {
                    break l;
                }
            })
            .collect()
    } else {
        (0..n as u64).collect()
    };
    if let Some(seeds) = &params.seed_labels {
        for (handle, &label) in seeds {
            let ord = view
                .store()
                .resolve(handle)
                .and_then(|id| view.ordinal(id))
                .ok_or_else(|| LpaError::UnknownSeedVertex(handle.clone()))?;
            labels[ord] = label;
        }
    }
    Ok(labels)
}

/// Runs label propagation over `view` treating every edge as undirected.
pub fn detect_communities(view: &GraphView<'_>, params: &LpaParams) -> Result<Partition, LpaError> {
    detect_communities_with(view, params, |_| {})
}

pub fn detect_communities_with<F>(
    view: &GraphView<'_>,
    params: &LpaParams,
    on_status: F,
) -> Result<Partition, LpaError>
where
    F: FnMut(&SuperstepStatus),
{
    params.validate()?;
    let program = LabelPropagation {
        initial: initial_labels(view, params)?,
        include_self: params.include_self,
        tie_break: params.tie_break,
        seed: params.rng_seed.unwrap_or(0),
    };
    let csr = view.undirected_csr();
    let config = PregelConfig { max_gss: params.max_gss, workers: params.workers };
    let out = run_pregel_with(&csr, &program, config, on_status)?;
    let mut p = Partition::from_labels(view, &out.values);
    p.supersteps_run = out.supersteps_run;
    p.converged = out.converged;
    Ok(p)
}

/// Writes each vertex's community into `result_field`. Nothing is written
/// unless the partition covers every vertex of `graph`.
pub fn annotate_graph(
    store: &mut GraphStore,
    graph: &str,
    partition: &Partition,
    result_field: &str,
) -> Result<usize, LpaError> {
    if result_field.is_empty() || result_field.starts_with('_') {
        return Err(LpaError::BadResultField);
    }
    let view = GraphView::named(store, graph)?;
    let mut writes = Vec::with_capacity(view.vertex_count());
    for (ord, &id) in view.vertex_ids().iter().enumerate() {
        let c = partition
            .get(id)
            .ok_or_else(|| LpaError::Incomplete(view.record(ord).handle().to_string()))?;
        writes.push((id, c));
    }
    let count = writes.len();
    for (id, c) in writes {
        if result_field == "community" {
            store.set_community(id, Some(c))?;
        } else {
            store.set_attribute(id, result_field, c.into())?;
        }
    }
    Ok(count)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatsRow {
    pub vertex_type: String,
    pub vertices: u64,
    pub communities: u64,
}

/// Vertex and community counts per vertex collection plus an all-types row.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionStats {
    pub rows: Vec<StatsRow>,
    pub all_types: Option<StatsRow>,
}

pub const ALL_TYPES: &str = "all types";
const HEADER: [&str; 3] = ["Vertex type", "Number of vertices", "Number of detected communities"];

pub fn partition_stats(partition: &Partition, store: &GraphStore) -> PartitionStats {
    if partition.is_empty() {
        return PartitionStats::default();
    }
    let mut per: BTreeMap<&str, (u64, BTreeSet<u64>)> = BTreeMap::new();
    let mut all = BTreeSet::new();
    let mut total = 0;
    for (&v, &c) in &partition.assignment {
        let Some(rec) = store.vertex(v) else { continue };
        let e = per.entry(rec.collection()).or_default();
        e.0 += 1;
        e.1.insert(c);
        all.insert(c);
        total += 1;
    }
    PartitionStats {
        rows: per
            .into_iter()
            .map(|(t, (n, cs))| StatsRow {
                vertex_type: t.to_string(),
                vertices: n,
                communities: cs.len() as u64,
            })
            .collect(),
        all_types: Some(StatsRow {
            vertex_type: ALL_TYPES.into(),
            vertices: total,
            communities: all.len() as u64,
        }),
    }
}

impl fmt::Display for PartitionStats {
    /// Tab-separated, one row per type, the all-types row last.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", HEADER.join("\t"))?;
        for r in self.rows.iter().chain(&self.all_types) {
            writeln!(f, "{}\t{}\t{}", r.vertex_type, r.vertices, r.communities)?;
        }
        Ok(())
    }
}

impl FromStr for PartitionStats {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut stats = PartitionStats::default();
        for (i, line) in s.lines().enumerate() {
            let line = line.trim_end();
            if line.is_empty() || line.starts_with(HEADER[0]) {
                continue;
            }
            let owned: [String; 3];
            let cols: Vec<&str> = if line.contains('\t') {
                line.split('\t').map(str::trim).collect()
            } else {
                // Whitespace-aligned: the last two tokens are the counts.
                let split = |s: &'_ str| -> Option<(String, String)> {
                    let (head, tail) = s.trim_end().rsplit_once(char::is_whitespace)?;
                    Some((head.trim_end().to_string(), tail.to_string()))
                };
                let err = || format!("line {}: expected 3 columns", i + 1);
                let (rest, c) = split(line).ok_or_else(err)?;
                let (name, v) = split(&rest).ok_or_else(err)?;
                owned = [name, v, c];
                owned.iter().map(String::as_str).collect()
            };
            if cols.len() != 3 {
                return Err(format!("line {}: expected 3 columns", i + 1));
            }
            let num = |s: &str| s.parse::<u64>().map_err(|e| format!("line {}: {e}", i + 1));
            let row = StatsRow {
                vertex_type: cols[0].to_string(),
                vertices: num(cols[1])?,
                communities: num(cols[2])?,
            };
            if row.vertex_type == ALL_TYPES {
                stats.all_types = Some(row);
            } else {
                stats.rows.push(row);
            }
        }
        Ok(stats)
    }
}
