//! Symbol identifiers in the SemanticDB-like path syntax.
//!
//! A symbol is a chain of owner segments followed by a descriptor, e.g.
//! `scala/concurrent/Future.apply().` or `scala/collection/immutable/List#[A]`.
//! Fact producers sometimes abbreviate ids (`EC.global`, `Future.apply()`),
//! so the parser below accepts a bare trailing name as well.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SymbolId(String);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Descriptor {
    Package,
    Term,
    Type,
    Method,
    Parameter,
    TypeParameter,
    /// No descriptor suffix, as in abbreviated ids.
    Bare,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Parsed<'a> {
    owner: &'a str,
    name: &'a str,
    descriptor: Descriptor,
}

const SEPARATORS: &[char] = &['/', '.', '#', '(', ')', '[', ']'];

impl SymbolId {
    pub fn new(value: impl Into<String>) -> Self {
        SymbolId(value.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Local symbols (`local12`) are only unique inside the module that
    /// produced them. After qualification they read `<module>/local12`.
    pub fn is_module_scoped(&self) -> bool {
        let last = self.0.rsplit('/').next().unwrap_or("");
        is_local_name(last)
    }

    /// Rewrites an unqualified local symbol into its module-qualified form.
    /// Global and already-qualified symbols are returned unchanged.
    pub fn qualify_local(&self, module: &str) -> SymbolId {
        if is_local_name(&self.0) {
            SymbolId(format!("{module}/{}", self.0))
        } else {
            self.clone()
        }
    }

    pub fn descriptor(&self) -> Descriptor {
        parse(&self.0).descriptor
    }

    pub fn is_type_param(&self) -> bool {
        self.descriptor() == Descriptor::TypeParameter
    }

    /// The trailing name without descriptor punctuation or backticks.
    pub fn simple_name(&self) -> &str {
        let name = parse(&self.0).name;
        if name.is_empty() {
            &self.0
        } else {
            name
        }
    }

    pub fn owner(&self) -> Option<SymbolId> {
        let owner = parse(&self.0).owner;
        (!owner.is_empty()).then(|| SymbolId(owner.to_owned()))
    }

    /// True if `owner` appears anywhere in this symbol's owner chain.
    /// Abbreviated and fully-terminated forms of the owner compare equal.
    pub fn is_owned_by(&self, owner: &SymbolId) -> bool {
        let target = owner_key(&owner.0);
        let mut current = self.owner();
        while let Some(o) = current {
            if owner_key(&o.0) == target {
                return true;
            }
            current = o.owner();
        }
        false
    }
}

fn owner_key(s: &str) -> &str {
    s.trim_end_matches('.')
}

fn is_local_name(s: &str) -> bool {
    s.len() > 5 && s.starts_with("local") && s[5..].bytes().all(|b| b.is_ascii_digit())
}

/// Scans a name backwards from the end of `body`; returns its start index.
fn name_start(body: &str) -> usize {
    if let Some(inner) = body.strip_suffix('`') {
        if let Some(open) = inner.rfind('`') {
            return open;
        }
    }
    body.rfind(SEPARATORS).map(|i| i + 1).unwrap_or(0)
}

fn unquote(name: &str) -> &str {
    name.strip_prefix('`').and_then(|n| n.strip_suffix('`')).unwrap_or(name)
}

fn parse(s: &str) -> Parsed<'_> {
    // `body` is a prefix of `s`.
    fn named<'a>(s: &'a str, body: &'a str, descriptor: Descriptor) -> Parsed<'a> {
        let start = name_start(body);
        Parsed {
            owner: &s[..start],
            name: unquote(&body[start..]),
            descriptor,
        }
    }
    let Some(last) = s.chars().last() else {
        return Parsed {
            owner: "",
            name: "",
            descriptor: Descriptor::Bare,
        };
    };
    let body = &s[..s.len() - last.len_utf8()];
    match last {
        '/' => named(s, body, Descriptor::Package),
        '#' => named(s, body, Descriptor::Type),
        '.' if body.ends_with(')') => match body.rfind('(') {
            Some(open) => named(s, &body[..open], Descriptor::Method),
            None => named(s, body, Descriptor::Term),
        },
        '.' => named(s, body, Descriptor::Term),
        ']' => match body.rfind('[') {
            Some(open) => Parsed {
                owner: &s[..open],
                name: unquote(&body[open + 1..]),
                descriptor: Descriptor::TypeParameter,
            },
            None => named(s, body, Descriptor::Bare),
        },
        ')' => match body.rfind('(') {
            Some(open) if open == 0 || body[..open].ends_with('.') => Parsed {
                owner: &s[..open],
                name: unquote(&body[open + 1..]),
                descriptor: Descriptor::Parameter,
            },
            Some(open) => named(s, &body[..open], Descriptor::Method),
            None => named(s, body, Descriptor::Bare),
        },
        _ => named(s, s, Descriptor::Bare),
    }
}

impl fmt::Display for SymbolId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for SymbolId {
    fn from(s: &str) -> Self {
        SymbolId::new(s)
    }
}

impl From<String> for SymbolId {
    fn from(s: String) -> Self {
        SymbolId(s)
    }
}
