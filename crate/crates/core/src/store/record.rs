// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use std::fmt;
use std::str::FromStr;

use super::StoreError;

/// Free-form document attributes, kept in insertion order.
pub type Attributes = Map<String, Value>;

/// Slot of a vertex in the store. Slots are never reused, so ordering by id
/// is ordering by insertion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexId(pub(crate) u32);

impl VertexId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Slot of an edge in the store; monotonically increasing with insertion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeId(pub(crate) u32);

impl EdgeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CollectionKind {
    Vertex,
    Edge,
}

impl fmt::Display for CollectionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CollectionKind::Vertex => f.write_str("vertex"),
            CollectionKind::Edge => f.write_str("edge"),
        }
    }
}

/// Which way edges are followed from a vertex.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Direction {
    /// `from -> to`
    Outbound,
    /// `to -> from`
    Inbound,
    #[default]
    Any,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Direction::Outbound => f.write_str("OUTBOUND"),
            Direction::Inbound => f.write_str("INBOUND"),
            Direction::Any => f.write_str("ANY"),
        }
    }
}

impl FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "OUTBOUND" | "OUT" => Ok(Direction::Outbound),
            "INBOUND" | "IN" => Ok(Direction::Inbound),
            "ANY" => Ok(Direction::Any),
            _ => Err(format!("unknown direction `{s}` (expected OUTBOUND, INBOUND or ANY)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VertexRecord {
    handle: String,
    split: usize,
    pub attributes: Attributes,
    pub community: Option<u64>,
}

impl VertexRecord {
    pub(crate) fn new(collection: &str, key: &str, attributes: Attributes) -> Self {
        Self {
            handle: format!("{collection}/{key}"),
            split: collection.len(),
            attributes,
            community: None,
        }
    }

    /// `<collection>/<key>`
    pub fn handle(&self) -> &str {
        &self.handle
    }

    pub fn key(&self) -> &str {
        &self.handle[self.split + 1..]
    }

    pub fn collection(&self) -> &str {
        &self.handle[..self.split]
    }

    /// The display name used for search, if the vertex has one.
    pub fn graph_name(&self) -> Option<&str> {
        self.attributes.get("graph_name").and_then(Value::as_str)
    }

    /// The full stored document as it appears on disk and in the detail API.
    pub fn to_document(&self) -> Value {
        let mut doc = Map::with_capacity(self.attributes.len() + 3);
        doc.insert("_key".into(), Value::from(self.key()));
        doc.insert("_id".into(), Value::from(self.handle()));
        for (k, v) in &self.attributes {
            doc.insert(k.clone(), v.clone());
        }
        if let Some(c) = self.community {
            doc.insert("community".into(), Value::from(c));
        }
        Value::Object(doc)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EdgeRecord {
    handle: String,
    split: usize,
    pub from: VertexId,
    pub to: VertexId,
    pub label: Option<String>,
    pub weight: f64,
    pub(crate) collection: usize,
}

impl EdgeRecord {
    pub(crate) fn new(
        collection_name: &str,
        collection: usize,
        key: &str,
        from: VertexId,
        to: VertexId,
        label: Option<String>,
        weight: f64,
    ) -> Self {
        Self {
            handle: format!("{collection_name}/{key}"),
            split: collection_name.len(),
            from,
            to,
            label,
            weight,
            collection,
        }
    }

    pub fn handle(&self) -> &str {
        &self.handle
    }

    pub fn key(&self) -> &str {
        &self.handle[self.split + 1..]
    }

    pub fn collection(&self) -> &str {
        &self.handle[..self.split]
    }

    pub fn is_self_loop(&self) -> bool {
        self.from == self.to
    }
}

/// A graph defined by its edge collections; its vertex set is the union of the
/// edge endpoints plus every vertex of the (optional) orphan collections.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NamedGraph {
    pub name: String,
    pub edge_collections: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub orphan_collections: Vec<String>,
}

impl NamedGraph {
    pub fn new(name: impl Into<String>, edge_collections: &[&str]) -> Self {
        Self {
            name: name.into(),
            edge_collections: edge_collections.iter().map(|s| s.to_string()).collect(),
            orphan_collections: Vec::new(),
        }
    }

    pub fn with_orphans(mut self, orphan_collections: &[&str]) -> Self {
        self.orphan_collections = orphan_collections.iter().map(|s| s.to_string()).collect();
        self
    }
}

pub(crate) fn validate_key(key: &str) -> Result<(), StoreError> {
    if key.is_empty() || key.contains('/') || key.chars().any(char::is_whitespace) {
        return Err(StoreError::InvalidKey(key.to_string()));
    }
    Ok(())
}

fn is_scalar(v: &Value) -> bool {
    !matches!(v, Value::Array(_) | Value::Object(_))
}

fn is_flat_map(m: &Map<String, Value>) -> bool {
    m.values().all(|v| match v {
        Value::Array(items) => items.iter().all(is_scalar),
        other => is_scalar(other),
    })
}

/// Attribute values are scalars, lists of scalars or flat maps, and flat maps
/// whose members are scalars or lists of scalars.
pub(crate) fn validate_attributes(attributes: &Attributes) -> Result<(), StoreError> {
    for (name, value) in attributes {
        if name.starts_with('_') {
            return Err(StoreError::ReservedAttribute(name.clone()));
        }
        let ok = match value {
            Value::Array(items) => items.iter().all(|item| match item {
                Value::Object(m) => is_flat_map(m),
                other => is_scalar(other),
            }),
            Value::Object(m) => is_flat_map(m),
            _ => true,
        };
        if !ok {
            return Err(StoreError::InvalidAttribute(name.clone()));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn handle_parts() {
        let v = VertexRecord::new("author", "40474848", Attributes::new());
        assert_eq!(v.handle(), "author/40474848");
        assert_eq!(v.key(), "40474848");
        assert_eq!(v.collection(), "author");
    }

    #[test]
    fn attribute_shapes() {
        let ok = json!({
            "name": "Marcel Thaens",
            "other_names": [],
            "affiliation": [{"value": "Erasmus University Rotterdam", "label": "", "type": "affiliation"}],
            "address": {"city": "Rotterdam", "lines": ["a", "b"]},
        });
        validate_attributes(ok.as_object().unwrap()).unwrap();

        let nested = json!({"deep": {"inner": {"x": 1}}});
        assert!(matches!(
            validate_attributes(nested.as_object().unwrap()),
            Err(StoreError::InvalidAttribute(_))
        ));
        let reserved = json!({"_from": "a/b"});
        assert!(matches!(
            validate_attributes(reserved.as_object().unwrap()),
            Err(StoreError::ReservedAttribute(_))
        ));
    }

    #[test]
    fn direction_parse() {
        assert_eq!("any".parse::<Direction>().unwrap(), Direction::Any);
        assert_eq!("OUTBOUND".parse::<Direction>().unwrap(), Direction::Outbound);
        assert!("sideways".parse::<Direction>().is_err());
    }
}
