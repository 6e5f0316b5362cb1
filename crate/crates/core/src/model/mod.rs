//! Semantic data model shared by every stage, and the conformance machinery
//! the classifiers need.

mod conform;
mod decl;
mod meta;
mod symbol;
mod table;
mod types;

pub use conform::{conforms_to, conversion_shape, find_ancestor, ConformanceError};
pub use decl::{
    ArgumentTree, CallSite, DeclKind, Declaration, Language, Location, MethodSig, Param, ParamList, PathKind, Scope,
    ShapeViolation, Signature, TextRange, TypeSig, ValueSig, Visibility,
};
pub use meta::{ModuleMeta, Platform, ProjectMeta, ScalaVersion};
pub use symbol::{Descriptor, SymbolId};
pub use table::SymbolTable;
pub use types::TypeRef;

/// Raised when parsing a label that is not part of an enumeration.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown {kind} `{value}`")]
pub struct UnknownLabel {
    pub kind: &'static str,
    pub value: String,
}

id_newtype!(
    /// Build-module identifier, unique across the corpus.
    ModuleId
);
id_newtype!(
    /// Repository identifier.
    ProjectId
);
