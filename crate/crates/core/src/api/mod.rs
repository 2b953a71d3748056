// SPDX-License-Identifier: Apache-2.0

//! HTTP query service: name suggestions and community-annotated subgraphs.

mod graphql;
mod server;
mod service;
mod types;

pub use graphql::execute_graphql;
pub use server::{router, shutdown_signal, AppState, ServeConfig, ServeError, Server};
pub use service::{to_slim_graph, GraphAnswer, QueryService, ServiceConfig, DEFAULT_SUGGESTION_LIMIT};
pub use types::{
    ApiError, Community, ErrorKind, QueryRequest, SlimEdge, SlimGraph, SlimNode, SuggestedNode,
};
