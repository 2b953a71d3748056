// SPDX-License-Identifier: Apache-2.0

use serde::ser::{Serialize, SerializeMap, Serializer};
use serde_json::Value;
use std::collections::{BTreeMap, HashMap, HashSet};
use unicode_normalization::UnicodeNormalization;

use super::parse::BibEntry;
use crate::store::{Attributes, CollectionKind, GraphStore, NamedGraph, StoreError, VertexId};

pub const AUTHOR: &str = "author";
pub const PUBLICATION: &str = "publication";
pub const EDITOR: &str = "editor";
pub const PUBLISHER: &str = "publisher";
pub const SERIES: &str = "series";
pub const SCHOOL: &str = "school";
pub const JOURNAL: &str = "journal";
pub const AFFILIATION: &str = "affiliation_institution";

pub const VERTEX_COLLECTIONS: [&str; 8] =
    [AUTHOR, PUBLICATION, EDITOR, PUBLISHER, SERIES, SCHOOL, JOURNAL, AFFILIATION];

pub const AUTHOR_PUBLICATION: &str = "author-publication";
pub const EDITOR_PUBLICATION: &str = "editor-publication";
pub const PUBLISHER_PUBLICATION: &str = "publisher-publication";
pub const SCHOOL_PUBLICATION: &str = "school-publication";
pub const JOURNAL_PUBLICATION: &str = "journal-publication";
pub const SERIES_PUBLICATION: &str = "series-publication";
pub const AFFILIATION_AUTHOR: &str = "affiliation_institution-author";
pub const CITED: &str = "publication-publication_cited";
pub const CROSSREF: &str = "publication-publication_crossref";

pub const EDGE_COLLECTIONS: [&str; 9] = [
    AUTHOR_PUBLICATION,
    EDITOR_PUBLICATION,
    PUBLISHER_PUBLICATION,
    SCHOOL_PUBLICATION,
    JOURNAL_PUBLICATION,
    SERIES_PUBLICATION,
    AFFILIATION_AUTHOR,
    CITED,
    CROSSREF,
];

/// Name of the graph spanning every derived edge collection.
pub const DEFAULT_GRAPH: &str =
    "author_publisher_editor_journal_publication_series_affiliation_school_cited_crossreffed";

/// (entry field, vertex collection, edge collection) for the name-keyed
/// vertex types linked to a publication.
const NAMED_LINKS: [(&str, &str, &str); 6] = [
    ("author", AUTHOR, AUTHOR_PUBLICATION),
    ("editor", EDITOR, EDITOR_PUBLICATION),
    ("publisher", PUBLISHER, PUBLISHER_PUBLICATION),
    ("school", SCHOOL, SCHOOL_PUBLICATION),
    ("journal", JOURNAL, JOURNAL_PUBLICATION),
    ("series", SERIES, SERIES_PUBLICATION),
];

/// Fields consumed by vertex/edge derivation rather than copied onto the
/// publication document.
const LINK_FIELDS: [&str; 8] =
    ["author", "editor", "publisher", "school", "journal", "series", "cite", "crossref"];

/// NFC, trimmed, internal whitespace runs collapsed to one space. Case is kept.
pub fn normalize_name(raw: &str) -> String {
    let nfc: String = raw.nfc().collect();
    nfc.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Counts collected while deriving vertices and edges.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DerivationReport {
    /// Parsed entries seen.
    pub entries: u64,
    pub malformed_entries: u64,
    /// Name repeats merged into an existing vertex, plus repeated dblp keys.
    pub duplicates_merged: u64,
    /// cite/crossref targets absent from the corpus.
    pub skipped_references: u64,
    pub vertices_by_type: BTreeMap<String, u64>,
    pub edges_by_type: BTreeMap<String, u64>,
}

impl DerivationReport {
    pub fn vertices(&self) -> u64 {
        self.vertices_by_type.values().sum()
    }

    pub fn edges(&self) -> u64 {
        self.edges_by_type.values().sum()
    }

    pub fn vertices_of(&self, collection: &str) -> u64 {
        self.vertices_by_type.get(collection).copied().unwrap_or(0)
    }

    pub fn edges_of(&self, collection: &str) -> u64 {
        self.edges_by_type.get(collection).copied().unwrap_or(0)
    }

    /// Adds another report's counts into this one.
    pub fn absorb(&mut self, other: &DerivationReport) {
        self.entries += other.entries;
        self.malformed_entries += other.malformed_entries;
        self.duplicates_merged += other.duplicates_merged;
        self.skipped_references += other.skipped_references;
        for (k, v) in &other.vertices_by_type {
            *self.vertices_by_type.entry(k.clone()).or_default() += v;
        }
        for (k, v) in &other.edges_by_type {
            *self.edges_by_type.entry(k.clone()).or_default() += v;
        }
    }

    fn full_table(counts: &BTreeMap<String, u64>, names: &[&str]) -> BTreeMap<String, u64> {
        let mut t: BTreeMap<String, u64> = names.iter().map(|n| (n.to_string(), 0)).collect();
        for (k, v) in counts {
            t.insert(k.clone(), *v);
        }
        t
    }
}

impl Serialize for DerivationReport {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(None)?;
        m.serialize_entry("publications", &self.vertices_of(PUBLICATION))?;
        m.serialize_entry("authors", &self.vertices_of(AUTHOR))?;
        m.serialize_entry("schools", &self.vertices_of(SCHOOL))?;
        m.serialize_entry("vertices", &self.vertices())?;
        m.serialize_entry("edges", &self.edges())?;
        m.serialize_entry("entries", &self.entries)?;
        m.serialize_entry("malformed_entries", &self.malformed_entries)?;
        m.serialize_entry("duplicates_merged", &self.duplicates_merged)?;
        m.serialize_entry("skipped_references", &self.skipped_references)?;
        m.serialize_entry(
            "vertices_by_type",
            &Self::full_table(&self.vertices_by_type, &VERTEX_COLLECTIONS),
        )?;
        m.serialize_entry(
            "edges_by_type",
            &Self::full_table(&self.edges_by_type, &EDGE_COLLECTIONS),
        )?;
        m.end()
    }
}

/// Creates the derived collections and the default graph if absent.
pub fn prepare_store(store: &mut GraphStore) -> Result<(), StoreError> {
    for c in VERTEX_COLLECTIONS {
        store.ensure_collection(c, CollectionKind::Vertex)?;
    }
    for c in EDGE_COLLECTIONS {
        store.ensure_collection(c, CollectionKind::Edge)?;
    }
    if store.graph(DEFAULT_GRAPH).is_none() {
        store.create_graph(
            NamedGraph::new(DEFAULT_GRAPH, &EDGE_COLLECTIONS).with_orphans(&VERTEX_COLLECTIONS),
        )?;
    }
    Ok(())
}

/// Dedup indexes shared by the vertex and edge passes.
///
/// Vertices must all exist before edges are derived, since a `cite` may point
/// at an entry further down the file.
pub struct Deriver {
    names: HashMap<(&'static str, String), VertexId>,
    publications: HashMap<String, VertexId>,
    report: DerivationReport,
}

fn text_value(values: &[String]) -> Value {
    match values {
        [one] => Value::from(one.as_str()),
        many => Value::from(many.to_vec()),
    }
}

impl Deriver {
    /// Prepares `store` and rebuilds the indexes from whatever it already
    /// holds, so the two passes may run in separate calls.
    pub fn attach(store: &mut GraphStore) -> Result<Self, StoreError> {
        prepare_store(store)?;
        let mut names = HashMap::new();
        let mut publications = HashMap::new();
        for (id, v) in store.vertices() {
            let Some(coll) = VERTEX_COLLECTIONS.iter().find(|c| **c == v.collection()) else {
                continue;
            };
            if *coll == PUBLICATION {
                if let Some(k) = v.attributes.get("dblp_key").and_then(Value::as_str) {
                    publications.insert(k.to_string(), id);
                }
            } else if let Some(name) = v.graph_name() {
                names.insert((*coll, name.to_string()), id);
            }
        }
        Ok(Self { names, publications, report: DerivationReport::default() })
    }

    pub fn report(&self) -> &DerivationReport {
        &self.report
    }

    pub fn take_report(&mut self) -> DerivationReport {
        std::mem::take(&mut self.report)
    }

    pub fn note_malformed(&mut self, count: u64) {
        self.report.malformed_entries += count;
    }

    fn named_vertex(
        &mut self,
        store: &mut GraphStore,
        collection: &'static str,
        raw: &str,
    ) -> Result<Option<VertexId>, StoreError> {
        let name = normalize_name(raw);
        if name.is_empty() {
            return Ok(None);
        }
        if let Some(&id) = self.names.get(&(collection, name.clone())) {
            self.report.duplicates_merged += 1;
            return Ok(Some(id));
        }
        let mut attrs = Attributes::new();
        attrs.insert("name".into(), Value::from(name.as_str()));
        attrs.insert("graph_name".into(), Value::from(name.as_str()));
        let id = store.insert_vertex_auto(collection, attrs)?;
        *self.report.vertices_by_type.entry(collection.to_string()).or_default() += 1;
        self.names.insert((collection, name), id);
        Ok(Some(id))
    }

    fn lookup(&self, collection: &'static str, raw: &str) -> Option<VertexId> {
        self.names.get(&(collection, normalize_name(raw))).copied()
    }

    /// First pass for one entry.
    pub fn add_vertices(&mut self, store: &mut GraphStore, entry: &BibEntry) -> Result<(), StoreError> {
        self.report.entries += 1;
        if entry.is_person_record() {
            return self.add_person(store, entry);
        }
        if self.publications.contains_key(&entry.key) {
            self.report.duplicates_merged += 1;
            return Ok(());
        }
        let mut attrs = Attributes::new();
        let title = entry.first("title").map(str::trim).filter(|t| !t.is_empty());
        attrs.insert("graph_name".into(), Value::from(title.unwrap_or(&entry.key)));
        attrs.insert("dblp_key".into(), Value::from(entry.key.as_str()));
        attrs.insert("pub_type".into(), Value::from(entry.element.as_str()));
        for (k, v) in &entry.attributes {
            attrs.insert(k.clone(), Value::from(v.as_str()));
        }
        for (tag, values) in &entry.fields {
            if !LINK_FIELDS.contains(&tag.as_str()) && !attrs.contains_key(tag) {
                attrs.insert(tag.clone(), text_value(values));
            }
        }
        let id = store.insert_vertex_auto(PUBLICATION, attrs)?;
        *self.report.vertices_by_type.entry(PUBLICATION.to_string()).or_default() += 1;
        self.publications.insert(entry.key.clone(), id);
        for (field, collection, _) in NAMED_LINKS {
            for raw in entry.field(field) {
                self.named_vertex(store, collection, raw)?;
            }
        }
        Ok(())
    }

    /// A `homepages/` record describes its first author: the remaining names
    /// are aliases and its affiliation notes become institution vertices.
    fn add_person(&mut self, store: &mut GraphStore, entry: &BibEntry) -> Result<(), StoreError> {
        let mut names = entry.field("author").iter();
        let Some(primary) = names.next() else {
            return Ok(());
        };
        let Some(author) = self.named_vertex(store, AUTHOR, primary)? else {
            return Ok(());
        };
        let aliases: Vec<String> = names.map(|n| normalize_name(n)).collect();
        if !aliases.is_empty() {
            store.set_attribute(author, "other_names", Value::from(aliases))?;
        }
        let mut affiliations = Vec::new();
        for raw in entry.field("affiliation") {
            if self.named_vertex(store, AFFILIATION, raw)?.is_some() {
                affiliations.push(normalize_name(raw));
            }
        }
        if !affiliations.is_empty() {
            store.set_attribute(author, "affiliation", Value::from(affiliations))?;
        }
        let urls = entry.field("url");
        if !urls.is_empty() {
            store.set_attribute(author, "url", Value::from(urls.to_vec()))?;
        }
        Ok(())
    }

    fn edge(
        &mut self,
        store: &mut GraphStore,
        collection: &str,
        from: VertexId,
        to: VertexId,
    ) -> Result<(), StoreError> {
        store.link(collection, from, to, None, 1.0)?;
        *self.report.edges_by_type.entry(collection.to_string()).or_default() += 1;
        Ok(())
    }

    /// Second pass for one entry. Repeats of the same endpoint within an
    /// entry produce one edge.
    pub fn add_edges(&mut self, store: &mut GraphStore, entry: &BibEntry) -> Result<(), StoreError> {
        if entry.is_person_record() {
            let Some(author) = entry.first("author").and_then(|n| self.lookup(AUTHOR, n)) else {
                return Ok(());
            };
            let mut seen = HashSet::new();
            for raw in entry.field("affiliation") {
                if let Some(inst) = self.lookup(AFFILIATION, raw) {
                    if seen.insert(inst) {
                        self.edge(store, AFFILIATION_AUTHOR, inst, author)?;
                    }
                }
            }
            return Ok(());
        }
        let Some(&publication) = self.publications.get(&entry.key) else {
            return Ok(());
        };
        for (field, collection, edges) in NAMED_LINKS {
            let mut seen = HashSet::new();
            for raw in entry.field(field) {
                if let Some(v) = self.lookup(collection, raw) {
                    if seen.insert(v) {
                        self.edge(store, edges, v, publication)?;
                    }
                }
            }
        }
        for (field, edges) in [("cite", CITED), ("crossref", CROSSREF)] {
            let mut seen = HashSet::new();
            for target in entry.field(field) {
                match self.publications.get(target.trim()).copied() {
                    Some(t) => {
                        if seen.insert(t) {
                            self.edge(store, edges, publication, t)?;
                        }
                    }
                    None => self.report.skipped_references += 1,
                }
            }
        }
        Ok(())
    }
}

/// Creates publication and name-keyed vertices for `entries`.
pub fn derive_vertices<'a, I>(entries: I, store: &mut GraphStore) -> Result<DerivationReport, StoreError>
where
    I: IntoIterator<Item = &'a BibEntry>,
{
    let mut d = Deriver::attach(store)?;
    for e in entries {
        d.add_vertices(store, e)?;
    }
    Ok(d.take_report())
}

/// Links the vertices created by [`derive_vertices`].
pub fn derive_edges<'a, I>(entries: I, store: &mut GraphStore) -> Result<DerivationReport, StoreError>
where
    I: IntoIterator<Item = &'a BibEntry>,
{
    let mut d = Deriver::attach(store)?;
    for e in entries {
        d.add_edges(store, e)?;
    }
    Ok(d.take_report())
}
