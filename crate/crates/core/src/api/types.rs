// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuggestedNode {
    #[serde(rename = "_id")]
    pub id: String,
    pub graph_name: String,
    pub the_type: String,
    pub appearances: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlimNode {
    #[serde(rename = "_id")]
    pub id: String,
    pub graph_name: String,
    /// Community ids travel as strings.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub community: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlimEdge {
    #[serde(rename = "_from")]
    pub from: String,
    #[serde(rename = "_to")]
    pub to: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub label: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Community {
    pub number: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlimGraph {
    #[serde(rename = "startNode")]
    pub start_node: SlimNode,
    pub vertices: Vec<SlimNode>,
    pub edges: Vec<SlimEdge>,
    pub communities: Vec<Community>,
}

/// Body of `POST /query` in its plain JSON form.
#[derive(Clone, Debug, Deserialize)]
pub struct QueryRequest {
    pub operation: String,
    #[serde(default)]
    pub variables: Map<String, Value>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    Parse,
    Validation,
    NotFound,
    Unavailable,
    Internal,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, thiserror::Error)]
#[error("{message}")]
pub struct ApiError {
    pub kind: ErrorKind,
    pub message: String,
    /// Offending request field, for validation errors.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub column: Option<usize>,
}

impl ApiError {
    pub fn new(kind: ErrorKind, message: impl Into<String>) -> Self {
        Self { kind, message: message.into(), field: None, line: None, column: None }
    }

    pub fn validation(field: &str, message: impl Into<String>) -> Self {
        Self { field: Some(field.to_string()), ..Self::new(ErrorKind::Validation, message) }
    }

    pub fn not_found(message: impl Into<String>) -> Self {
        Self::new(ErrorKind::NotFound, message)
    }

    pub fn unavailable() -> Self {
        Self::new(ErrorKind::Unavailable, "store is still loading")
    }

    pub fn parse_json(e: &serde_json::Error) -> Self {
        Self {
            line: Some(e.line()),
            column: Some(e.column()),
            ..Self::new(ErrorKind::Parse, e.to_string())
        }
    }

    pub fn status(&self) -> u16 {
        match self.kind {
            ErrorKind::Parse | ErrorKind::Validation => 400,
            ErrorKind::NotFound => 404,
            ErrorKind::Unavailable => 503,
            ErrorKind::Internal => 500,
        }
    }
}
