use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::SymbolId;

/// A reference to a type declaration or type parameter with ordered arguments.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TypeRef {
    pub head: SymbolId,
    pub args: Vec<TypeRef>,
}

impl TypeRef {
    pub fn new(head: impl Into<SymbolId>, args: Vec<TypeRef>) -> Self {
        TypeRef {
            head: head.into(),
            args,
        }
    }

    pub fn simple(head: impl Into<SymbolId>) -> Self {
        TypeRef::new(head, Vec::new())
    }

    /// Replaces every bound type-parameter head by its binding. Bindings are
    /// not re-substituted into themselves.
    pub fn substitute(&self, bindings: &BTreeMap<SymbolId, TypeRef>) -> TypeRef {
        match bindings.get(&self.head) {
            Some(bound) if self.args.is_empty() => bound.clone(),
            // Higher-kinded application of a bound parameter: keep the
            // binding's head and apply our (substituted) arguments.
            Some(bound) => TypeRef {
                head: bound.head.clone(),
                args: self.args.iter().map(|a| a.substitute(bindings)).collect(),
            },
            None => TypeRef {
                head: self.head.clone(),
                args: self.args.iter().map(|a| a.substitute(bindings)).collect(),
            },
        }
    }

    /// Visits every head in the tree, root first.
    pub fn heads(&self) -> Vec<&SymbolId> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(t) = stack.pop() {
            out.push(&t.head);
            stack.extend(t.args.iter().rev());
        }
        out
    }

    /// True if some type argument, at any depth below the root, has a head in `params`.
    pub fn has_arg_referencing(&self, params: &BTreeSet<SymbolId>) -> bool {
        self.args.iter().any(|a| a.references(params))
    }

    /// True if this type's head or any nested head is in `params`.
    pub fn references(&self, params: &BTreeSet<SymbolId>) -> bool {
        self.heads().into_iter().any(|h| params.contains(h))
    }

    pub fn depth(&self) -> usize {
        1 + self.args.iter().map(TypeRef::depth).max().unwrap_or(0)
    }
}

/// Renders with simple names, e.g. `Map[String,List[Int]]`.
impl fmt::Display for TypeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.head.simple_name())?;
        if !self.args.is_empty() {
            f.write_str("[")?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{a}")?;
            }
            f.write_str("]")?;
        }
        Ok(())
    }
}
