// SPDX-License-Identifier: Apache-2.0

//! Named character entities the dblp DTD declares: the five XML built-ins
//! plus the ISO-8859-1 set (U+00A0..=U+00FF).

use std::collections::HashMap;
use std::sync::OnceLock;

const LATIN1_NAMES: [&str; 96] = [
    "nbsp", "iexcl", "cent", "pound", "curren", "yen", "brvbar", "sect", "uml", "copy", "ordf",
    "laquo", "not", "shy", "reg", "macr", "deg", "plusmn", "sup2", "sup3", "acute", "micro",
    "para", "middot", "cedil", "sup1", "ordm", "raquo", "frac14", "frac12", "frac34", "iquest",
    "Agrave", "Aacute", "Acirc", "Atilde", "Auml", "Aring", "AElig", "Ccedil", "Egrave", "Eacute",
    "Ecirc", "Euml", "Igrave", "Iacute", "Icirc", "Iuml", "ETH", "Ntilde", "Ograve", "Oacute",
    "Ocirc", "Otilde", "Ouml", "times", "Oslash", "Ugrave", "Uacute", "Ucirc", "Uuml", "Yacute",
    "THORN", "szlig", "agrave", "aacute", "acirc", "atilde", "auml", "aring", "aelig", "ccedil",
    "egrave", "eacute", "ecirc", "euml", "igrave", "iacute", "icirc", "iuml", "eth", "ntilde",
    "ograve", "oacute", "ocirc", "otilde", "ouml", "divide", "oslash", "ugrave", "uacute", "ucirc",
    "uuml", "yacute", "thorn", "yuml",
];

fn table() -> &'static HashMap<&'static str, String> {
    static TABLE: OnceLock<HashMap<&'static str, String>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t: HashMap<&'static str, String> = LATIN1_NAMES
            .iter()
            .enumerate()
            .map(|(i, &name)| {
                let c = char::from_u32(0xA0 + i as u32).expect("latin-1 code point");
                (name, c.to_string())
            })
            .collect();
        for (name, value) in [("lt", "<"), ("gt", ">"), ("amp", "&"), ("apos", "'"), ("quot", "\"")] {
            t.insert(name, value.to_string());
        }
        t
    })
}

/// Replacement text for a declared named entity.
pub(crate) fn resolve(name: &str) -> Option<&'static str> {
    table().get(name).map(String::as_str)
}
