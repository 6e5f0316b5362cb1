use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{Declaration, SymbolId};

/// Corpus-wide map from symbol to declaration, plus ids known only by reference.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolTable {
    decls: BTreeMap<SymbolId, Declaration>,
    externals: BTreeSet<SymbolId>,
}

impl SymbolTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts a declaration, dropping the id from the external set if present.
    pub fn insert(&mut self, decl: Declaration) -> Option<Declaration> {
        self.externals.remove(&decl.id);
        self.decls.insert(decl.id.clone(), decl)
    }

    /// Records an id as external unless it is already declared.
    pub fn add_external(&mut self, id: SymbolId) {
        if !self.decls.contains_key(&id) {
            self.externals.insert(id);
        }
    }

    pub fn get(&self, id: &SymbolId) -> Option<&Declaration> {
        self.decls.get(id)
    }

    pub fn is_external(&self, id: &SymbolId) -> bool {
        self.externals.contains(id)
    }

    /// Either declared or recorded as external.
    pub fn knows(&self, id: &SymbolId) -> bool {
        self.decls.contains_key(id) || self.externals.contains(id)
    }

    pub fn declarations(&self) -> impl Iterator<Item = &Declaration> {
        self.decls.values()
    }

    pub fn externals(&self) -> &BTreeSet<SymbolId> {
        &self.externals
    }

    pub fn len(&self) -> usize {
        self.decls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.decls.is_empty()
    }
}
