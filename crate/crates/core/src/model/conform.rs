//! Nominal conformance over the parent graph of a [`SymbolTable`].
//!
//! Only heads are compared; variance is not modelled. Raw references (no
//! arguments against a parameterized head) walk the parents with their type
//! parameters left unbound, so those parameters act as wildcards. Heads with
//! no declaration data conform to nothing but themselves.

use std::collections::{BTreeMap, BTreeSet};

use super::{SymbolId, SymbolTable, TypeRef};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConformanceError {
    #[error("cycle in parent chain through {0}")]
    Cycle(SymbolId),
}

/// Walks parents of `t` depth-first (declaration order) and returns the first
/// instantiation of `target` found, with `t`'s arguments substituted along the path.
pub fn find_ancestor(t: &TypeRef, target: &SymbolId, table: &SymbolTable) -> Result<Option<TypeRef>, ConformanceError> {
    let mut walk = Walk {
        table,
        target,
        stack: Vec::new(),
        exhausted: BTreeSet::new(),
    };
    walk.visit(t)
}

struct Walk<'a> {
    table: &'a SymbolTable,
    target: &'a SymbolId,
    stack: Vec<SymbolId>,
    /// Heads whose whole ancestry was searched without reaching the target.
    /// Reachability depends only on heads, never on arguments.
    exhausted: BTreeSet<SymbolId>,
}

impl Walk<'_> {
    fn visit(&mut self, t: &TypeRef) -> Result<Option<TypeRef>, ConformanceError> {
        if &t.head == self.target {
            return Ok(Some(t.clone()));
        }
        if self.stack.contains(&t.head) {
            return Err(ConformanceError::Cycle(t.head.clone()));
        }
        if self.exhausted.contains(&t.head) {
            return Ok(None);
        }
        let Some(sig) = self.table.get(&t.head).and_then(|d| d.type_sig()) else {
            return Ok(None);
        };
        let bindings: BTreeMap<SymbolId, TypeRef> = if sig.type_params.len() == t.args.len() {
            sig.type_params.iter().cloned().zip(t.args.iter().cloned()).collect()
        } else {
            BTreeMap::new()
        };
        self.stack.push(t.head.clone());
        for parent in &sig.parents {
            if let Some(found) = self.visit(&parent.substitute(&bindings))? {
                return Ok(Some(found));
            }
        }
        self.stack.pop();
        self.exhausted.insert(t.head.clone());
        Ok(None)
    }
}

pub fn conforms_to(t: &TypeRef, target: &SymbolId, table: &SymbolTable) -> Result<bool, ConformanceError> {
    find_ancestor(t, target, table).map(|found| found.is_some())
}

/// `(source, target)` of the one-argument function type `t` conforms to.
pub fn conversion_shape(
    t: &TypeRef,
    function_id: &SymbolId,
    table: &SymbolTable,
) -> Result<Option<(TypeRef, TypeRef)>, ConformanceError> {
    let Some(found) = find_ancestor(t, function_id, table)? else {
        return Ok(None);
    };
    if let [source, target] = found.args.as_slice() {
        return Ok(Some((source.clone(), target.clone())));
    }
    // Raw function type: fall back to its declared parameters as wildcards.
    if found.args.is_empty() {
        if let Some(sig) = table.get(function_id).and_then(|d| d.type_sig()) {
            if let [a, b] = sig.type_params.as_slice() {
                return Ok(Some((TypeRef::simple(a.clone()), TypeRef::simple(b.clone()))));
            }
        }
    }
    Ok(None)
}
