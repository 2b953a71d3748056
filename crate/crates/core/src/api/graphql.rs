// SPDX-License-Identifier: Apache-2.0

//! Just enough GraphQL to answer the explorer's two queries: one root field
//! (`nodesID…` or `nodeGraph`), literal or `$variable` arguments, and
//! selection sets with inline fragments. No general execution.

use serde_json::{json, Map, Value};

use super::service::QueryService;
use super::types::{ApiError, ErrorKind};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Name(String),
    Var(String),
    Str(String),
    Num(String),
    Punct(char),
    Spread,
}

fn syntax(msg: impl Into<String>) -> ApiError {
    ApiError::new(ErrorKind::Parse, msg)
}

fn lex(src: &str) -> Result<Vec<Tok>, ApiError> {
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0;
    let mut out = Vec::new();
    let name_at = |i: &mut usize| -> String {
        let start = *i;
        while *i < chars.len() && (chars[*i].is_alphanumeric() || chars[*i] == '_') {
            *i += 1;
        }
        chars[start..*i].iter().collect()
    };
    while i < chars.len() {
        let c = chars[i];
        match c {
            c if c.is_whitespace() || c == ',' => i += 1,
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '{' | '}' | '(' | ')' | ':' | '!' | '=' | '[' | ']' | '@' => {
                out.push(Tok::Punct(c));
                i += 1;
            }
            '.' => {
                if chars.get(i..i + 3) == Some(&['.', '.', '.']) {
                    out.push(Tok::Spread);
                    i += 3;
                } else {
                    return Err(syntax(format!("unexpected '.' at offset {i}")));
                }
            }
            '$' => {
                i += 1;
                out.push(Tok::Var(name_at(&mut i)));
            }
            '"' => {
                i += 1;
                let mut s = String::new();
                loop {
                    match chars.get(i) {
                        None => return Err(syntax("unterminated string")),
                        Some('"') => {
                            i += 1;
                            break;
                        }
                        Some('\\') => {
                            let esc = chars.get(i + 1).copied().ok_or_else(|| syntax("unterminated string"))?;
                            s.push(match esc {
                                'n' => '\n',
                                't' => '\t',
                                'r' => '\r',
                                other => other,
                            });
                            i += 2;
                        }
                        Some(&ch) => {
                            s.push(ch);
                            i += 1;
                        }
                    }
                }
                out.push(Tok::Str(s));
            }
            c if c.is_ascii_digit() || c == '-' => {
                let start = i;
                i += 1;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                out.push(Tok::Num(chars[start..i].iter().collect()));
            }
            c if c.is_alphabetic() || c == '_' => out.push(Tok::Name(name_at(&mut i))),
            other => return Err(syntax(format!("unexpected character {other:?}"))),
        }
    }
    Ok(out)
}

#[derive(Clone, Debug)]
enum Selection {
    Field { alias: Option<String>, name: String, children: Vec<Selection> },
    Fragment { on: Option<String>, children: Vec<Selection> },
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Punct(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ApiError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(syntax(format!("expected '{c}', found {:?}", self.peek())))
        }
    }

    fn name(&mut self) -> Result<String, ApiError> {
        match self.next() {
            Some(Tok::Name(n)) => Ok(n),
            other => Err(syntax(format!("expected a name, found {other:?}"))),
        }
    }

    fn value(&mut self, vars: &Map<String, Value>) -> Result<Value, ApiError> {
        match self.next() {
            Some(Tok::Var(v)) => Ok(vars.get(&v).cloned().unwrap_or(Value::Null)),
            Some(Tok::Str(s)) => Ok(Value::String(s)),
            Some(Tok::Num(n)) => serde_json::from_str(&n).map_err(|_| syntax(format!("bad number {n}"))),
            Some(Tok::Name(n)) => Ok(match n.as_str() {
                "true" => Value::Bool(true),
                "false" => Value::Bool(false),
                "null" => Value::Null,
                _ => Value::String(n),
            }),
            other => Err(syntax(format!("expected a value, found {other:?}"))),
        }
    }

    /// `($a: String = "1", ...)` on the operation; defaults fill missing
    /// variables.
    fn variable_defs(&mut self, vars: &mut Map<String, Value>) -> Result<(), ApiError> {
        if !self.eat('(') {
            return Ok(());
        }
        while !self.eat(')') {
            let Some(Tok::Var(name)) = self.next() else {
                return Err(syntax("expected a variable definition"));
            };
            self.expect(':')?;
            // Type: Name, [Name], with optional '!'.
            while matches!(self.peek(), Some(Tok::Name(_)) | Some(Tok::Punct('[' | ']' | '!'))) {
                self.pos += 1;
            }
            if self.eat('=') {
                let default = self.value(&Map::new())?;
                vars.entry(name).or_insert(default);
            }
        }
        Ok(())
    }

    fn arguments(&mut self, vars: &Map<String, Value>) -> Result<Map<String, Value>, ApiError> {
        let mut args = Map::new();
        if !self.eat('(') {
            return Ok(args);
        }
        while !self.eat(')') {
            let k = self.name()?;
            self.expect(':')?;
            let v = self.value(vars)?;
            args.insert(k, v);
        }
        Ok(args)
    }

    fn selection_set(&mut self) -> Result<Vec<Selection>, ApiError> {
        self.expect('{')?;
        let mut out = Vec::new();
        while !self.eat('}') {
            if self.peek() == Some(&Tok::Spread) {
                self.pos += 1;
                let on = if self.peek() == Some(&Tok::Name("on".into())) {
                    self.pos += 1;
                    Some(self.name()?)
                } else {
                    None
                };
                out.push(Selection::Fragment { on, children: self.selection_set()? });
                continue;
            }
            let first = self.name()?;
            let (alias, name) = if self.eat(':') { (Some(first), self.name()?) } else { (None, first) };
            if self.peek() == Some(&Tok::Punct('(')) {
                return Err(syntax(format!("arguments are only accepted on the root field, not on {name}")));
            }
            let children = if self.peek() == Some(&Tok::Punct('{')) { self.selection_set()? } else { Vec::new() };
            out.push(Selection::Field { alias, name, children });
        }
        Ok(out)
    }
}

/// Static type of `field` on `parent`, for matching inline fragments.
fn field_type(parent: &str, field: &str) -> Option<&'static str> {
    match (parent, field) {
        ("SlimGraph", "startNode" | "vertices") => Some("SlimNode"),
        ("SlimGraph", "edges") => Some("SlimEdge"),
        ("SlimGraph", "communities") => Some("Community"),
        _ => None,
    }
}

fn project(value: &Value, type_name: &str, sel: &[Selection], out: &mut Map<String, Value>) -> Result<(), ApiError> {
    for s in sel {
        match s {
            Selection::Fragment { on, children } => {
                if on.as_deref().is_none_or(|t| t == type_name) {
                    project(value, type_name, children, out)?;
                }
            }
            Selection::Field { alias, name, children } => {
                let key = alias.clone().unwrap_or_else(|| name.clone());
                if name == "__typename" {
                    out.insert(key, Value::from(type_name));
                    continue;
                }
                let Value::Object(obj) = value else {
                    return Err(syntax(format!("{type_name} has no field {name}")));
                };
                let known = known_fields(type_name);
                if !known.contains(&name.as_str()) {
                    return Err(ApiError::validation(name, format!("type {type_name} has no field {name}")));
                }
                let v = obj.get(name).cloned().unwrap_or(Value::Null);
                let projected = match field_type(type_name, name) {
                    Some(child) if !children.is_empty() => shape(&v, child, children)?,
                    Some(_) => return Err(syntax(format!("field {name} needs a selection set"))),
                    None => v,
                };
                out.insert(key, projected);
            }
        }
    }
    Ok(())
}

fn known_fields(type_name: &str) -> &'static [&'static str] {
    match type_name {
        "SuggestedNode" => &["_id", "graph_name", "the_type", "appearances"],
        "SlimNode" => &["_id", "graph_name", "community"],
        "SlimEdge" => &["_from", "_to", "label"],
        "Community" => &["number"],
        "SlimGraph" => &["startNode", "vertices", "edges", "communities"],
        _ => &[],
    }
}

fn shape(value: &Value, type_name: &str, sel: &[Selection]) -> Result<Value, ApiError> {
    match value {
        Value::Array(items) => items.iter().map(|v| shape(v, type_name, sel)).collect::<Result<_, _>>().map(Value::Array),
        Value::Null => Ok(Value::Null),
        other => {
            let mut out = Map::new();
            project(other, type_name, sel, &mut out)?;
            Ok(Value::Object(out))
        }
    }
}

fn is_nodes_id(name: &str) -> bool {
    name.strip_prefix("nodesID").is_some_and(|rest| rest.chars().all(|c| c.is_ascii_digit()))
}

/// Answers a query document in the `{data: {...}}` envelope.
pub fn execute_graphql(
    service: &QueryService,
    query: &str,
    variables: &Map<String, Value>,
) -> Result<Value, ApiError> {
    let mut vars = variables.clone();
    let mut p = Parser { toks: lex(query)?, pos: 0 };
    if let Some(Tok::Name(kw)) = p.peek() {
        if kw != "query" {
            return Err(syntax(format!("only queries are supported, not {kw}")));
        }
        p.pos += 1;
        if matches!(p.peek(), Some(Tok::Name(_))) {
            p.pos += 1;
        }
        p.variable_defs(&mut vars)?;
    }
    p.expect('{')?;
    let mut data = Map::new();
    let mut extensions = Map::new();
    while !p.eat('}') {
        let first = p.name()?;
        let (alias, name) = if p.eat(':') { (Some(first), p.name()?) } else { (None, first) };
        let args = p.arguments(&vars)?;
        let sel = if p.peek() == Some(&Tok::Punct('{')) { p.selection_set()? } else { Vec::new() };
        let key = alias.unwrap_or_else(|| name.clone());
        let value = if is_nodes_id(&name) {
            let term = match args.get("name") {
                Some(Value::String(s)) => s.clone(),
                _ => return Err(ApiError::validation("name", "nodesID needs a string argument name")),
            };
            let hits = serde_json::to_value(service.nodes_id(&term)).expect("serializable");
            if sel.is_empty() { hits } else { shape(&hits, "SuggestedNode", &sel)? }
        } else if name == "nodeGraph" {
            let node = match args.get("node_id") {
                Some(Value::String(s)) => s.clone(),
                _ => return Err(ApiError::validation("node_id", "nodeGraph needs a string argument node_id")),
            };
            let a = service.node_graph(&node, args.get("minDepth"), args.get("maxDepth"))?;
            extensions.insert("truncated".into(), Value::Bool(a.truncated));
            let g = serde_json::to_value(&a.graph).expect("serializable");
            if sel.is_empty() {
                return Err(syntax("nodeGraph needs a selection set"));
            }
            shape(&g, "SlimGraph", &sel)?
        } else {
            return Err(ApiError::validation("operation", format!("unknown field {name}")));
        };
        data.insert(key, value);
    }
    if p.peek().is_some() {
        return Err(syntax("unexpected tokens after the query"));
    }
    let mut body = json!({ "data": data });
    if !extensions.is_empty() {
        body["extensions"] = Value::Object(extensions);
    }
    Ok(body)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexes_the_explorer_query() {
        let toks = lex(r#"query { nodeGraph(node_id: "author/1", minDepth: "1") { vertices { ... on SlimNode { _id } } } }"#).unwrap();
        assert!(toks.contains(&Tok::Spread));
        assert!(toks.contains(&Tok::Str("author/1".into())));
    }

    #[test]
    fn suffixed_nodes_id() {
        assert!(is_nodes_id("nodesID"));
        assert!(is_nodes_id("nodesID42"));
        assert!(!is_nodes_id("nodesIDx"));
    }

    #[test]
    fn string_escapes_and_errors() {
        assert_eq!(lex(r#""a\"b""#).unwrap(), vec![Tok::Str("a\"b".into())]);
        assert!(lex("\"open").is_err());
        assert!(lex("a . b").is_err());
    }
}
