// SPDX-License-Identifier: Apache-2.0

//! Superstep engine and the label propagation program built on it.

mod engine;
mod lpa;

pub use engine::{
    run_pregel, run_pregel_with, PregelConfig, PregelError, PregelOutcome, SuperstepStatus,
    VertexProgram,
};
pub use lpa::{
    annotate_graph, detect_communities, detect_communities_with, partition_stats, LpaError,
    LpaParams, Partition, PartitionStats, StatsRow, TieBreak, ALL_TYPES,
};
