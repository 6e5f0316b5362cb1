use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{ModuleId, SymbolId, TypeRef};

labeled_enum! {
    pub enum DeclKind {
        Def => "DEF",
        Val => "VAL",
        Var => "VAR",
        Object => "OBJECT",
        Class => "CLASS",
        Trait => "TRAIT",
        Interface => "INTERFACE",
        Type => "TYPE",
        TypeParam => "TYPE_PARAM",
        Parameter => "PARAMETER",
        Macro => "MACRO",
    }
}

labeled_enum! {
    pub enum Language {
        Scala => "SCALA",
        Java => "JAVA",
    }
}

labeled_enum! {
    pub enum Visibility {
        Public => "PUBLIC",
        Private => "PRIVATE",
        Protected => "PROTECTED",
    }
}

labeled_enum! {
    pub enum Scope {
        TopLevel => "TOP_LEVEL",
        Nested => "NESTED",
        BlockLocal => "BLOCK_LOCAL",
    }
}

labeled_enum! {
    /// Which part of a project a source path belongs to.
    pub enum PathKind {
        Main => "MAIN",
        Test => "TEST",
        Generated => "GENERATED",
    }
}

impl PathKind {
    /// Fallback when the fact producer did not flag the path.
    pub fn infer(path: &str) -> PathKind {
        let p = path.replace('\\', "/");
        if p.starts_with("test/") || p.contains("/test/") || p.contains("/it/") {
            PathKind::Test
        } else {
            PathKind::Main
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TextRange {
    pub start_line: u32,
    pub start_col: u32,
    pub end_line: u32,
    pub end_col: u32,
}

impl TextRange {
    pub fn new(start_line: u32, start_col: u32, end_line: u32, end_col: u32) -> Self {
        TextRange {
            start_line,
            start_col,
            end_line,
            end_col,
        }
    }

    pub fn is_ordered(&self) -> bool {
        (self.start_line, self.start_col) <= (self.end_line, self.end_col)
    }

    pub fn start(&self) -> (u32, u32) {
        (self.start_line, self.start_col)
    }

    pub fn end(&self) -> (u32, u32) {
        (self.end_line, self.end_col)
    }

    /// `other` lies inside `self` (inclusive).
    pub fn contains(&self, other: &TextRange) -> bool {
        self.start() <= other.start() && other.end() <= self.end()
    }

    pub fn to_array(self) -> [u32; 4] {
        [self.start_line, self.start_col, self.end_line, self.end_col]
    }
}

impl From<[u32; 4]> for TextRange {
    fn from(a: [u32; 4]) -> Self {
        TextRange::new(a[0], a[1], a[2], a[3])
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Location {
    pub path: String,
    /// Compilation unit: one source file within one module.
    pub unit: String,
    pub range: TextRange,
    pub path_kind: PathKind,
}

impl Location {
    pub fn new(module: &ModuleId, path: impl Into<String>, range: TextRange, path_kind: PathKind) -> Self {
        let path = path.into();
        Location {
            unit: format!("{module}:{path}"),
            path,
            range,
            path_kind,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Param {
    pub name: String,
    pub tpe: TypeRef,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ParamList {
    pub is_implicit: bool,
    pub params: Vec<Param>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MethodSig {
    pub type_params: Vec<SymbolId>,
    pub param_lists: Vec<ParamList>,
    pub ret: TypeRef,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ValueSig {
    pub tpe: TypeRef,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TypeSig {
    pub type_params: Vec<SymbolId>,
    pub parents: Vec<TypeRef>,
    /// Primary constructor parameter lists; empty when unknown or not a class.
    pub ctor: Vec<ParamList>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Signature {
    Method(MethodSig),
    Value(ValueSig),
    Type(TypeSig),
}

impl Signature {
    pub fn type_params(&self) -> &[SymbolId] {
        match self {
            Signature::Method(m) => &m.type_params,
            Signature::Type(t) => &t.type_params,
            Signature::Value(_) => &[],
        }
    }

    /// Every type reference mentioned by the signature.
    pub fn type_refs(&self) -> Vec<&TypeRef> {
        match self {
            Signature::Method(m) => m
                .param_lists
                .iter()
                .flat_map(|l| l.params.iter().map(|p| &p.tpe))
                .chain(std::iter::once(&m.ret))
                .collect(),
            Signature::Value(v) => vec![&v.tpe],
            Signature::Type(t) => t
                .parents
                .iter()
                .chain(t.ctor.iter().flat_map(|l| l.params.iter().map(|p| &p.tpe)))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Declaration {
    pub id: SymbolId,
    pub module: ModuleId,
    pub kind: DeclKind,
    pub language: Language,
    pub is_implicit: bool,
    pub visibility: Visibility,
    pub scope: Scope,
    pub location: Location,
    pub signature: Signature,
    pub from_implicit_class: bool,
}

/// A structural rule a declaration violates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ShapeViolation {
    SignatureMismatch { kind: DeclKind, signature: &'static str },
    MisplacedImplicitList,
    LanguageMismatch { kind: DeclKind, language: Language },
    UnorderedRange,
    EmptyId,
}

impl fmt::Display for ShapeViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ShapeViolation::SignatureMismatch { kind, signature } => {
                write!(f, "{kind} declarations cannot carry a {signature} signature")
            }
            ShapeViolation::MisplacedImplicitList => {
                f.write_str("at most one implicit parameter list is allowed and it must be last")
            }
            ShapeViolation::LanguageMismatch { kind, language } => {
                write!(f, "{kind} is not a {language} declaration kind")
            }
            ShapeViolation::UnorderedRange => f.write_str("range start is after range end"),
            ShapeViolation::EmptyId => f.write_str("empty symbol id"),
        }
    }
}

impl Declaration {
    pub fn method_sig(&self) -> Option<&MethodSig> {
        match &self.signature {
            Signature::Method(m) => Some(m),
            _ => None,
        }
    }

    pub fn type_sig(&self) -> Option<&TypeSig> {
        match &self.signature {
            Signature::Type(t) => Some(t),
            _ => None,
        }
    }

    pub fn param_lists(&self) -> &[ParamList] {
        match &self.signature {
            Signature::Method(m) => &m.param_lists,
            Signature::Type(t) => &t.ctor,
            Signature::Value(_) => &[],
        }
    }

    pub fn implicit_list(&self) -> Option<&ParamList> {
        self.param_lists().iter().find(|l| l.is_implicit)
    }

    pub fn implicit_params(&self) -> &[super::Param] {
        self.implicit_list().map(|l| l.params.as_slice()).unwrap_or(&[])
    }

    pub fn explicit_lists(&self) -> impl Iterator<Item = &ParamList> {
        self.param_lists().iter().filter(|l| !l.is_implicit)
    }

    pub fn is_method_like(&self) -> bool {
        matches!(self.kind, DeclKind::Def | DeclKind::Macro)
    }

    pub fn is_type_like(&self) -> bool {
        matches!(
            self.kind,
            DeclKind::Class | DeclKind::Trait | DeclKind::Interface | DeclKind::Type
        )
    }

    pub fn is_trait_like(&self) -> bool {
        matches!(self.kind, DeclKind::Trait | DeclKind::Interface)
    }

    pub fn check_shape(&self) -> Result<(), ShapeViolation> {
        if self.id.is_empty() {
            return Err(ShapeViolation::EmptyId);
        }
        let sig_name = match self.signature {
            Signature::Method(_) => "method",
            Signature::Value(_) => "value",
            Signature::Type(_) => "type",
        };
        let sig_ok = match self.kind {
            DeclKind::Def | DeclKind::Macro => matches!(self.signature, Signature::Method(_)),
            DeclKind::Val | DeclKind::Var | DeclKind::Object | DeclKind::Parameter => {
                matches!(self.signature, Signature::Value(_))
            }
            DeclKind::Class | DeclKind::Trait | DeclKind::Interface | DeclKind::Type | DeclKind::TypeParam => {
                matches!(self.signature, Signature::Type(_))
            }
        };
        if !sig_ok {
            return Err(ShapeViolation::SignatureMismatch {
                kind: self.kind,
                signature: sig_name,
            });
        }
        let lists = self.param_lists();
        let implicit_count = lists.iter().filter(|l| l.is_implicit).count();
        if implicit_count > 1 || (implicit_count == 1 && !lists.last().is_some_and(|l| l.is_implicit)) {
            return Err(ShapeViolation::MisplacedImplicitList);
        }
        let lang_ok = match self.kind {
            DeclKind::Interface => self.language == Language::Java,
            DeclKind::Trait => self.language == Language::Scala,
            _ => true,
        };
        if !lang_ok {
            return Err(ShapeViolation::LanguageMismatch {
                kind: self.kind,
                language: self.language,
            });
        }
        if !self.location.range.is_ordered() {
            return Err(ShapeViolation::UnorderedRange);
        }
        Ok(())
    }

    /// All symbol ids mentioned by the signature's types (heads at any depth).
    pub fn referenced_symbols(&self) -> BTreeSet<&SymbolId> {
        self.signature.type_refs().into_iter().flat_map(|t| t.heads()).collect()
    }
}

/// A compiler-injected implicit argument: a value or a nested call.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ArgumentTree {
    ValueRef(SymbolId),
    Call {
        decl: SymbolId,
        type_args: Vec<TypeRef>,
        args: Vec<ArgumentTree>,
    },
}

impl ArgumentTree {
    pub fn decl(&self) -> &SymbolId {
        match self {
            ArgumentTree::ValueRef(d) => d,
            ArgumentTree::Call { decl, .. } => decl,
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            ArgumentTree::ValueRef(_) => 1,
            ArgumentTree::Call { args, .. } => 1 + args.iter().map(ArgumentTree::node_count).sum::<usize>(),
        }
    }

    /// Pre-order list of every declaration referenced by the tree.
    pub fn decls(&self) -> Vec<&SymbolId> {
        let mut out = Vec::new();
        self.collect_decls(&mut out);
        out
    }

    fn collect_decls<'a>(&'a self, out: &mut Vec<&'a SymbolId>) {
        out.push(self.decl());
        if let ArgumentTree::Call { args, .. } = self {
            for a in args {
                a.collect_decls(out);
            }
        }
    }

    pub fn type_refs(&self) -> Vec<&TypeRef> {
        match self {
            ArgumentTree::ValueRef(_) => Vec::new(),
            ArgumentTree::Call { type_args, args, .. } => type_args
                .iter()
                .chain(args.iter().flat_map(|a| a.type_refs()))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CallSite {
    pub callee: SymbolId,
    pub module: ModuleId,
    pub location: Location,
    pub type_args: Vec<TypeRef>,
    pub implicit_args: Vec<ArgumentTree>,
    /// The whole call was injected, e.g. an applied conversion.
    pub whole_call_synthetic: bool,
}

impl CallSite {
    /// Holds for every implicit call site.
    pub fn is_implicit(&self) -> bool {
        !self.implicit_args.is_empty() || self.whole_call_synthetic
    }

    pub fn referenced_symbols(&self) -> BTreeSet<&SymbolId> {
        let mut out: BTreeSet<&SymbolId> = BTreeSet::new();
        out.insert(&self.callee);
        for t in &self.type_args {
            out.extend(t.heads());
        }
        for a in &self.implicit_args {
            out.extend(a.decls());
            for t in a.type_refs() {
                out.extend(t.heads());
            }
        }
        out
    }
}
