//! Reconstruction of implicit declarations and implicit call sites.
//!
//! Synthetic trees quote original source by range. An `apply` node whose
//! arguments are all injected is an implicit application at the quoted
//! expression; an `apply` whose function is injected and whose argument is
//! original source is an applied conversion. Trees that only rewrite a call
//! head (`C(..)` to `C.apply[T](..)`) carry no implicit and are not emitted,
//! but they tell us the callee and type arguments of the quoted expression.

use std::collections::BTreeMap;

use crate::ingest::{Synthetic, SyntheticTree};
use crate::model::{
    ArgumentTree, CallSite, DeclKind, Declaration, Location, ModuleId, SymbolId, SymbolTable, TextRange, TypeRef,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SyntheticError {
    #[error("{path}: symbol {symbol} is neither declared nor external")]
    UnknownSymbol { path: String, symbol: SymbolId },
    #[error("{path}: no callee known for the expression at {range:?}")]
    UnresolvedCallee { path: String, range: TextRange },
    #[error("{path}: injected application is not anchored to source code")]
    Unanchored { path: String },
    #[error("{path}: original source quoted inside an injected argument")]
    OriginalInArgument { path: String },
}

/// Implicit declarations of `module`, ordered by (path, range, id).
pub fn extract_implicit_declarations<'t>(module: &ModuleId, table: &'t SymbolTable) -> Vec<&'t Declaration> {
    let mut out: Vec<&Declaration> = table
        .declarations()
        .filter(|d| &d.module == module && d.is_implicit)
        .collect();
    out.sort_by(|a, b| (&a.location.path, a.location.range, &a.id).cmp(&(&b.location.path, b.location.range, &b.id)));
    out
}

/// A head rewrite of quoted source: `range` resolves to `callee` with `type_args`.
#[derive(Debug, Clone)]
struct HeadRewrite {
    range: TextRange,
    callee: Option<SymbolId>,
    type_args: Vec<TypeRef>,
}

fn head_rewrite(tree: &SyntheticTree) -> Option<HeadRewrite> {
    match tree {
        SyntheticTree::TypeApply { fun, type_args } => {
            let inner = match fun.as_ref() {
                SyntheticTree::Original { range, symbol } => HeadRewrite {
                    range: *range,
                    callee: symbol.clone(),
                    type_args: Vec::new(),
                },
                other => head_rewrite(other)?,
            };
            Some(HeadRewrite {
                type_args: type_args.clone(),
                ..inner
            })
        }
        SyntheticTree::Select { qual, id } => match qual.as_ref() {
            SyntheticTree::Original { range, .. } => Some(HeadRewrite {
                range: *range,
                callee: Some(id.clone()),
                type_args: Vec::new(),
            }),
            _ => None,
        },
        _ => None,
    }
}

struct Partial {
    callee: SymbolId,
    type_args: Vec<TypeRef>,
    implicit_args: Vec<ArgumentTree>,
    synthetic: bool,
    range: TextRange,
}

struct FileContext<'a> {
    path: &'a str,
    table: &'a SymbolTable,
    rewrites: Vec<HeadRewrite>,
}

impl FileContext<'_> {
    fn known(&self, s: &SymbolId) -> Result<(), SyntheticError> {
        if self.table.knows(s) {
            Ok(())
        } else {
            Err(SyntheticError::UnknownSymbol {
                path: self.path.to_owned(),
                symbol: s.clone(),
            })
        }
    }

    /// The rewrite anchored at `range`'s start with the widest span inside it.
    fn rewrite_for(&self, range: &TextRange) -> Option<&HeadRewrite> {
        self.rewrites
            .iter()
            .filter(|r| r.range.start() == range.start() && range.contains(&r.range))
            .max_by_key(|r| r.range.end())
    }

    fn site(&self, tree: &SyntheticTree) -> Result<Option<Partial>, SyntheticError> {
        let SyntheticTree::Apply { fun, args } = tree else {
            return Ok(None);
        };
        if let Some(range) = args.iter().find_map(SyntheticTree::first_original) {
            if fun.contains_original() {
                // desugared call with source arguments: nothing injected
                return Ok(None);
            }
            let (callee, type_args) = self.injected_fn(fun)?;
            return Ok(Some(Partial {
                callee,
                type_args,
                implicit_args: Vec::new(),
                synthetic: true,
                range,
            }));
        }
        let mut partial = self.head(fun)?;
        for a in args {
            partial.implicit_args.push(self.argument(a)?);
        }
        Ok(Some(partial))
    }

    fn head(&self, fun: &SyntheticTree) -> Result<Partial, SyntheticError> {
        match fun {
            SyntheticTree::Apply { .. } => self.site(fun)?.ok_or_else(|| self.unanchored()),
            SyntheticTree::TypeApply { fun: inner, type_args } => {
                let mut p = self.head(inner)?;
                if p.type_args.is_empty() {
                    p.type_args = type_args.clone();
                }
                Ok(p)
            }
            SyntheticTree::Select { qual, id } => {
                self.known(id)?;
                let range = qual.first_original().ok_or_else(|| self.unanchored())?;
                Ok(Partial {
                    callee: id.clone(),
                    type_args: Vec::new(),
                    implicit_args: Vec::new(),
                    synthetic: false,
                    range,
                })
            }
            SyntheticTree::Original { range, symbol } => {
                let rewrite = self.rewrite_for(range);
                let callee = symbol
                    .clone()
                    .or_else(|| rewrite.and_then(|r| r.callee.clone()))
                    .ok_or_else(|| SyntheticError::UnresolvedCallee {
                        path: self.path.to_owned(),
                        range: *range,
                    })?;
                self.known(&callee)?;
                Ok(Partial {
                    callee,
                    type_args: rewrite.map(|r| r.type_args.clone()).unwrap_or_default(),
                    implicit_args: Vec::new(),
                    synthetic: false,
                    range: *range,
                })
            }
            SyntheticTree::Id(_) => Err(self.unanchored()),
        }
    }

    /// Callee of an injected function expression. `v.apply` on an implicit
    /// value is attributed to the value (a function-valued conversion).
    fn injected_fn(&self, fun: &SyntheticTree) -> Result<(SymbolId, Vec<TypeRef>), SyntheticError> {
        match fun {
            SyntheticTree::Id(s) => {
                self.known(s)?;
                Ok((s.clone(), Vec::new()))
            }
            SyntheticTree::TypeApply { fun, type_args } => {
                let (callee, _) = self.injected_fn(fun)?;
                Ok((callee, type_args.clone()))
            }
            SyntheticTree::Select { qual, id } => {
                self.known(id)?;
                if let SyntheticTree::Id(v) = qual.as_ref() {
                    self.known(v)?;
                    let is_value = self.table.get(v).is_some_and(|d| {
                        d.is_implicit && matches!(d.kind, DeclKind::Val | DeclKind::Var | DeclKind::Object)
                    });
                    if is_value {
                        return Ok((v.clone(), Vec::new()));
                    }
                }
                Ok((id.clone(), Vec::new()))
            }
            SyntheticTree::Original { .. } => Err(SyntheticError::OriginalInArgument {
                path: self.path.to_owned(),
            }),
            SyntheticTree::Apply { .. } => Err(self.unanchored()),
        }
    }

    fn argument(&self, tree: &SyntheticTree) -> Result<ArgumentTree, SyntheticError> {
        match tree {
            SyntheticTree::Id(s) => {
                self.known(s)?;
                Ok(ArgumentTree::ValueRef(s.clone()))
            }
            SyntheticTree::Select { qual, id } => {
                if qual.contains_original() {
                    return Err(SyntheticError::OriginalInArgument {
                        path: self.path.to_owned(),
                    });
                }
                self.known(id)?;
                Ok(ArgumentTree::ValueRef(id.clone()))
            }
            SyntheticTree::TypeApply { .. } => {
                let (decl, type_args) = self.injected_fn(tree)?;
                Ok(ArgumentTree::Call {
                    decl,
                    type_args,
                    args: Vec::new(),
                })
            }
            SyntheticTree::Apply { fun, args } => {
                let (decl, type_args, mut prior) = match fun.as_ref() {
                    SyntheticTree::Apply { .. } => match self.argument(fun)? {
                        ArgumentTree::Call { decl, type_args, args } => (decl, type_args, args),
                        ArgumentTree::ValueRef(_) => unreachable!("apply always yields a call"),
                    },
                    other => {
                        let (d, t) = self.injected_fn(other)?;
                        (d, t, Vec::new())
                    }
                };
                for a in args {
                    prior.push(self.argument(a)?);
                }
                Ok(ArgumentTree::Call {
                    decl,
                    type_args,
                    args: prior,
                })
            }
            SyntheticTree::Original { .. } => Err(SyntheticError::OriginalInArgument {
                path: self.path.to_owned(),
            }),
        }
    }

    fn unanchored(&self) -> SyntheticError {
        SyntheticError::Unanchored {
            path: self.path.to_owned(),
        }
    }
}

/// Turns synthetic trees into implicit call sites. Trees are grouped per
/// (module, path); head rewrites only apply within their own file. Output is
/// in input order of the emitting trees.
pub fn callsites_from_synthetics(trees: &[Synthetic], table: &SymbolTable) -> Result<Vec<CallSite>, SyntheticError> {
    let mut rewrites: BTreeMap<(&ModuleId, &str), Vec<HeadRewrite>> = BTreeMap::new();
    for s in trees {
        if let Some(r) = head_rewrite(&s.tree) {
            rewrites.entry((&s.module, s.path.as_str())).or_default().push(r);
        }
    }

    let mut out = Vec::new();
    for s in trees {
        let ctx = FileContext {
            path: &s.path,
            table,
            rewrites: rewrites.get(&(&s.module, s.path.as_str())).cloned().unwrap_or_default(),
        };
        let Some(p) = ctx.site(&s.tree)? else {
            continue;
        };
        if p.implicit_args.is_empty() && !p.synthetic {
            continue;
        }
        out.push(CallSite {
            callee: p.callee,
            module: s.module.clone(),
            location: Location::new(&s.module, s.path.clone(), p.range, s.path_kind),
            type_args: p.type_args,
            implicit_args: p.implicit_args,
            whole_call_synthetic: p.synthetic,
        });
    }
    Ok(out)
}
