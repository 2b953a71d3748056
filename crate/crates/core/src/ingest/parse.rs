// SPDX-License-Identifier: Apache-2.0

use indexmap::IndexMap;
use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use std::borrow::Cow;
use std::collections::VecDeque;
use std::fmt;
use std::io::{self, BufRead};
use thiserror::Error;

use super::entities;
use super::scan::{EntryScanner, TagEvent};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntryKind {
    Article,
    Inproceedings,
    Proceedings,
    Book,
    Incollection,
    Phdthesis,
    Mastersthesis,
    Www,
    Other,
}

impl EntryKind {
    pub fn from_element(name: &str) -> Self {
        match name {
            "article" => Self::Article,
            "inproceedings" => Self::Inproceedings,
            "proceedings" => Self::Proceedings,
            "book" => Self::Book,
            "incollection" => Self::Incollection,
            "phdthesis" => Self::Phdthesis,
            "mastersthesis" => Self::Mastersthesis,
            "www" => Self::Www,
            _ => Self::Other,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Article => "article",
            Self::Inproceedings => "inproceedings",
            Self::Proceedings => "proceedings",
            Self::Book => "book",
            Self::Incollection => "incollection",
            Self::Phdthesis => "phdthesis",
            Self::Mastersthesis => "mastersthesis",
            Self::Www => "www",
            Self::Other => "other",
        }
    }
}

impl fmt::Display for EntryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One publication record as it appears in the XML, before any vertex or
/// edge is derived from it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BibEntry {
    pub kind: EntryKind,
    /// Element name; differs from `kind` only for [`EntryKind::Other`].
    pub element: String,
    /// The `key` attribute, e.g. `phd/Turpin92`.
    pub key: String,
    /// Remaining element attributes (`mdate`, `pubtype`, ...).
    pub attributes: IndexMap<String, String>,
    /// Child element text by tag; repeated tags accumulate in document order.
    /// `<note type="affiliation">` children are filed under `affiliation`.
    pub fields: IndexMap<String, Vec<String>>,
}

impl BibEntry {
    pub fn field(&self, tag: &str) -> &[String] {
        self.fields.get(tag).map_or(&[], Vec::as_slice)
    }

    pub fn first(&self, tag: &str) -> Option<&str> {
        self.field(tag).first().map(String::as_str)
    }

    /// dblp stores person metadata as `www` records under `homepages/`.
    pub fn is_person_record(&self) -> bool {
        self.kind == EntryKind::Www && self.key.starts_with("homepages/")
    }

    /// The one-object-per-line import shape: the element name wraps its
    /// attributes and children; single children are strings, repeated ones
    /// lists.
    pub fn to_import_json(&self) -> Value {
        let mut body = Map::new();
        body.insert("key".into(), Value::from(self.key.as_str()));
        for (k, v) in &self.attributes {
            body.insert(k.clone(), Value::from(v.as_str()));
        }
        for (tag, values) in &self.fields {
            let v = match values.as_slice() {
                [one] => Value::from(one.as_str()),
                many => Value::from(many.to_vec()),
            };
            body.insert(tag.clone(), v);
        }
        let mut outer = Map::new();
        outer.insert(self.element.clone(), Value::Object(body));
        Value::Object(outer)
    }
}

#[derive(Debug, Error)]
pub enum EntryError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("line {line}: malformed entry: {reason}")]
    Malformed { line: usize, reason: String },
}

/// Streaming reader yielding one item per top-level entry. Malformed entries
/// come back as [`EntryError::Malformed`] and the stream carries on; only
/// I/O failures end it early.
pub fn parse_entries<R: BufRead>(reader: R) -> EntryStream<R> {
    EntryStream {
        reader,
        scanner: EntryScanner::new(),
        line: Vec::new(),
        events: Vec::new(),
        entry: Vec::new(),
        entry_line: 0,
        line_no: 0,
        ready: VecDeque::new(),
        done: false,
    }
}

pub struct EntryStream<R> {
    reader: R,
    scanner: EntryScanner,
    line: Vec<u8>,
    events: Vec<TagEvent>,
    entry: Vec<u8>,
    entry_line: usize,
    line_no: usize,
    ready: VecDeque<Result<BibEntry, EntryError>>,
    done: bool,
}

impl<R: BufRead> EntryStream<R> {
    fn pump(&mut self) -> io::Result<()> {
        self.line.clear();
        if self.reader.read_until(b'\n', &mut self.line)? == 0 {
            self.done = true;
            if self.scanner.inside() {
                self.ready.push_back(Err(EntryError::Malformed {
                    line: self.entry_line,
                    reason: "entry is not closed before end of input".into(),
                }));
            }
            return Ok(());
        }
        self.line_no += 1;
        let mut cursor = self.scanner.inside().then_some(0);
        self.events.clear();
        self.scanner.scan_line(&self.line, &mut self.events);
        for &ev in &self.events {
            match ev {
                TagEvent::Start(at) => {
                    self.entry.clear();
                    self.entry_line = self.line_no;
                    cursor = Some(at);
                }
                TagEvent::End(end) => {
                    let from = cursor.take().unwrap_or(0);
                    self.entry.extend_from_slice(&self.line[from..end]);
                    self.ready.push_back(parse_entry(&self.entry, self.entry_line));
                    self.entry.clear();
                }
            }
        }
        if let Some(from) = cursor {
            self.entry.extend_from_slice(&self.line[from..]);
        }
        Ok(())
    }
}

impl<R: BufRead> Iterator for EntryStream<R> {
    type Item = Result<BibEntry, EntryError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            if let Some(item) = self.ready.pop_front() {
                return Some(item);
            }
            if self.done {
                return None;
            }
            if let Err(e) = self.pump() {
                self.done = true;
                return Some(Err(e.into()));
            }
        }
    }
}

/// dblp dumps declare ISO-8859-1; anything that is not valid UTF-8 is read
/// as Latin-1.
fn decode(bytes: &[u8]) -> Cow<'_, str> {
    match std::str::from_utf8(bytes) {
        Ok(s) => Cow::Borrowed(s),
        Err(_) => Cow::Owned(bytes.iter().map(|&b| b as char).collect()),
    }
}

fn local_name(e: &BytesStart<'_>) -> String {
    String::from_utf8_lossy(e.name().as_ref()).into_owned()
}

fn attributes_of(e: &BytesStart<'_>) -> Result<Vec<(String, String)>, String> {
    e.attributes()
        .map(|a| {
            let a = a.map_err(|err| err.to_string())?;
            let key = String::from_utf8_lossy(a.key.as_ref()).into_owned();
            let value = a
                .unescape_value_with(entities::resolve)
                .map_err(|err| err.to_string())?;
            Ok((key, value.into_owned()))
        })
        .collect()
}

fn begin_entry(e: &BytesStart<'_>) -> Result<BibEntry, String> {
    let element = local_name(e);
    let mut key = None;
    let mut attributes = IndexMap::new();
    for (k, v) in attributes_of(e)? {
        if k == "key" {
            key = Some(v);
        } else {
            attributes.insert(k, v);
        }
    }
    let key = key
        .filter(|k| !k.trim().is_empty())
        .ok_or_else(|| format!("<{element}> has no key attribute"))?;
    Ok(BibEntry {
        kind: EntryKind::from_element(&element),
        element,
        key,
        attributes,
        fields: IndexMap::new(),
    })
}

fn field_tag(e: &BytesStart<'_>) -> Result<String, String> {
    let name = local_name(e);
    if name == "note" {
        let is_affiliation = attributes_of(e)?
            .iter()
            .any(|(k, v)| k == "type" && v == "affiliation");
        if is_affiliation {
            return Ok("affiliation".into());
        }
    }
    Ok(name)
}

/// Parses the bytes of exactly one entry element.
pub fn parse_entry(bytes: &[u8], line: usize) -> Result<BibEntry, EntryError> {
    parse_entry_inner(bytes).map_err(|reason| EntryError::Malformed { line, reason })
}

fn parse_entry_inner(bytes: &[u8]) -> Result<BibEntry, String> {
    let text = decode(bytes);
    let mut reader = Reader::from_str(&text);
    let mut entry: Option<BibEntry> = None;
    let mut field: Option<(String, String)> = None;
    let mut depth = 0usize;
    loop {
        match reader.read_event().map_err(|e| e.to_string())? {
            Event::Start(e) => {
                depth += 1;
                match depth {
                    1 => entry = Some(begin_entry(&e)?),
                    2 => field = Some((field_tag(&e)?, String::new())),
                    _ => {}
                }
            }
            Event::Empty(e) => match depth {
                0 => return begin_entry(&e),
                1 => {
                    let tag = field_tag(&e)?;
                    let entry = entry.as_mut().expect("depth 1 implies an entry");
                    entry.fields.entry(tag).or_default().push(String::new());
                }
                _ => {}
            },
            Event::Text(t) => {
                if let Some((_, buf)) = field.as_mut() {
                    let s = t.unescape_with(entities::resolve).map_err(|e| e.to_string())?;
                    buf.push_str(&s);
                } else if depth == 0 && !t.iter().all(u8::is_ascii_whitespace) {
                    return Err("text outside of the entry element".into());
                }
            }
            Event::CData(c) => {
                if let Some((_, buf)) = field.as_mut() {
                    buf.push_str(&String::from_utf8_lossy(&c));
                }
            }
            Event::End(_) => {
                if depth == 2 {
                    let (tag, value) = field.take().expect("field open at depth 2");
                    let entry = entry.as_mut().expect("depth 2 implies an entry");
                    entry.fields.entry(tag).or_default().push(value.trim().to_string());
                }
                depth = depth.saturating_sub(1);
                if depth == 0 {
                    return entry.ok_or_else(|| "closing tag without an entry".to_string());
                }
            }
            Event::Eof => return Err("entry ends before its closing tag".into()),
            _ => {}
        }
    }
}
