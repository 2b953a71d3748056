// SPDX-License-Identifier: Apache-2.0

//! Bulk-synchronous superstep engine over an undirected adjacency.
//!
//! Vertices are split into `workers` contiguous shards. In each superstep
//! every vertex sends one message per incident edge; the messages are routed
//! into per-shard outboxes, merged at the barrier, and only then handed to
//! `compute`. Messages reach a vertex ordered by sender ordinal, then by the
//! sender's edge order, whatever the shard count.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::store::Csr;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PregelError {
    #[error("max_gss must be at least 1")]
    ZeroMaxGss,
    #[error("workers must be at least 1")]
    ZeroWorkers,
}

pub trait VertexProgram: Sync {
    type Value: Clone + PartialEq + Send + Sync;
    type Message: Clone + Send + Sync;

    fn initial(&self, vertex: usize) -> Self::Value;

    /// The message `vertex` sends across one incident edge of `weight`.
    fn message(&self, vertex: usize, value: &Self::Value, weight: f64) -> Self::Message;

    /// Folds the messages sent during the previous communicate phase into a
    /// new value. `step` counts from 1.
    fn compute(
        &self,
        step: usize,
        vertex: usize,
        value: &Self::Value,
        inbox: &[Self::Message],
    ) -> Self::Value;
}

/// Emitted once per superstep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SuperstepStatus {
    pub step: usize,
    /// Vertices whose value changed in this step.
    pub active_count: usize,
    pub messages: u64,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PregelOutcome<V> {
    pub values: Vec<V>,
    pub supersteps_run: usize,
    pub converged: bool,
    pub messages_per_step: Vec<u64>,
}

#[derive(Clone, Copy, Debug)]
pub struct PregelConfig {
    pub max_gss: usize,
    pub workers: usize,
}

impl Default for PregelConfig {
    fn default() -> Self {
        Self { max_gss: 500, workers: rayon::current_num_threads().max(1) }
    }
}

fn shard_bounds(n: usize, workers: usize) -> Vec<usize> {
    let w = workers.min(n.max(1));
    (0..=w).map(|i| i * n / w).collect()
}

fn shard_of(bounds: &[usize], v: usize) -> usize {
    bounds.partition_point(|&b| b <= v) - 1
}

/// One mailbox of `(target, message)` pairs per destination shard.
type Mailboxes<M> = Vec<Vec<(u32, M)>>;

pub fn run_pregel<P: VertexProgram>(
    graph: &Csr,
    program: &P,
    config: PregelConfig,
) -> Result<PregelOutcome<P::Value>, PregelError> {
    run_pregel_with(graph, program, config, |_| {})
}

pub fn run_pregel_with<P, F>(
    graph: &Csr,
    program: &P,
    config: PregelConfig,
    mut on_status: F,
) -> Result<PregelOutcome<P::Value>, PregelError>
where
    P: VertexProgram,
    F: FnMut(&SuperstepStatus),
{
    if config.max_gss == 0 {
        return Err(PregelError::ZeroMaxGss);
    }
    if config.workers == 0 {
        return Err(PregelError::ZeroWorkers);
    }
    let n = graph.vertex_count();
    let mut values: Vec<P::Value> = (0..n).map(|v| program.initial(v)).collect();
    let mut outcome = PregelOutcome {
        values: Vec::new(),
        supersteps_run: 0,
        converged: true,
        messages_per_step: Vec::new(),
    };
    if n == 0 {
        return Ok(outcome);
    }
    let bounds = shard_bounds(n, config.workers);
    let shards = bounds.len() - 1;
    outcome.converged = false;

    for step in 1..=config.max_gss {
        // Communicate: outboxes[s][d] holds (target, message) from shard s to d.
        let outboxes: Vec<Mailboxes<P::Message>> = (0..shards)
            .into_par_iter()
            .map(|s| {
                let mut out: Mailboxes<P::Message> = vec![Vec::new(); shards];
                for (v, value) in values.iter().enumerate().take(bounds[s + 1]).skip(bounds[s]) {
                    for (u, w) in graph.neighbors(v) {
                        out[shard_of(&bounds, u)].push((u as u32, program.message(v, value, w)));
                    }
                }
                out
            })
            .collect();
        let messages: u64 = outboxes.iter().flatten().map(|b| b.len() as u64).sum();

        // Barrier: transpose so each destination shard owns its incoming boxes.
        let mut incoming: Vec<Mailboxes<P::Message>> = (0..shards).map(|_| Vec::new()).collect();
        for row in outboxes {
            for (d, boxed) in row.into_iter().enumerate() {
                incoming[d].push(boxed);
            }
        }

        // Compute.
        let results: Vec<(Vec<P::Value>, usize)> = incoming
            .into_par_iter()
            .enumerate()
            .map(|(d, boxes)| {
                let (lo, hi) = (bounds[d], bounds[d + 1]);
                let len = hi - lo;
                let mut counts = vec![0usize; len + 1];
                for b in &boxes {
                    for (t, _) in b {
                        counts[*t as usize - lo + 1] += 1;
                    }
                }
                for i in 0..len {
                    counts[i + 1] += counts[i];
                }
                let mut slots: Vec<Option<P::Message>> = vec![None; counts[len]];
                let mut fill = counts.clone();
                for b in boxes {
                    for (t, m) in b {
                        let i = t as usize - lo;
                        slots[fill[i]] = Some(m);
                        fill[i] += 1;
                    }
                }
                let inbox: Vec<P::Message> = slots.into_iter().map(|m| m.expect("slot filled")).collect();
                let mut changed = 0;
                let next: Vec<P::Value> = (lo..hi)
                    .map(|v| {
                        let i = v - lo;
                        let nv = program.compute(step, v, &values[v], &inbox[counts[i]..counts[i + 1]]);
                        if nv != values[v] {
                            changed += 1;
                        }
                        nv
                    })
                    .collect();
                (next, changed)
            })
            .collect();

        let mut active = 0;
        let mut next = Vec::with_capacity(n);
        for (vals, changed) in results {
            next.extend(vals);
            active += changed;
        }
        values = next;
        let converged = active == 0;
        outcome.supersteps_run = step;
        outcome.messages_per_step.push(messages);
        let status = SuperstepStatus { step, active_count: active, messages, converged };
        log::debug!("superstep {step}: {active} changed, {messages} messages");
        on_status(&status);
        if converged {
            outcome.converged = true;
            break;
        }
    }
    outcome.values = values;
    Ok(outcome)
}
