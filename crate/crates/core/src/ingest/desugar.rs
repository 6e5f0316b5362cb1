use std::collections::BTreeSet;

use crate::model::{DeclKind, Declaration, MethodSig, ParamList, Signature, SymbolId, TypeRef};

use super::ParsedFacts;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DesugarError {
    #[error("{0} is not an implicit class")]
    NotImplicitClass(SymbolId),
    #[error("implicit class {id} has {found} non-implicit constructor parameters, expected exactly one")]
    ConstructorArity { id: SymbolId, found: usize },
}

/// Id of the conversion method generated for an implicit class:
/// `pkg/Wrapper#` becomes `pkg/Wrapper().`.
pub fn conversion_def_id(class_id: &SymbolId) -> SymbolId {
    let s = class_id.as_str();
    let stem = s.strip_suffix('#').unwrap_or(s);
    SymbolId::new(format!("{stem}()."))
}

/// Splits `implicit class C[T](x: X)(implicit ...)` into a plain class and
/// `implicit def C[T](x: X)(implicit ...): C[T]`.
pub fn desugar_implicit_class(class: &Declaration) -> Result<(Declaration, Declaration), DesugarError> {
    let sig = match (&class.signature, class.kind, class.is_implicit) {
        (Signature::Type(sig), DeclKind::Class, true) => sig,
        _ => return Err(DesugarError::NotImplicitClass(class.id.clone())),
    };
    let explicit: Vec<_> = sig
        .ctor
        .iter()
        .filter(|l| !l.is_implicit)
        .flat_map(|l| &l.params)
        .collect();
    let [param] = explicit.as_slice() else {
        return Err(DesugarError::ConstructorArity {
            id: class.id.clone(),
            found: explicit.len(),
        });
    };

    let mut param_lists = vec![ParamList {
        is_implicit: false,
        params: vec![(*param).clone()],
    }];
    param_lists.extend(sig.ctor.iter().filter(|l| l.is_implicit).cloned());

    let ret = TypeRef::new(
        class.id.clone(),
        sig.type_params.iter().cloned().map(TypeRef::simple).collect(),
    );
    let conversion = Declaration {
        id: conversion_def_id(&class.id),
        kind: DeclKind::Def,
        is_implicit: true,
        signature: Signature::Method(MethodSig {
            type_params: sig.type_params.clone(),
            param_lists,
            ret,
        }),
        from_implicit_class: true,
        ..class.clone()
    };
    let plain = Declaration {
        is_implicit: false,
        ..class.clone()
    };
    Ok((plain, conversion))
}

/// Rewrites every implicit class in place into the desugared pair. The
/// generated method is inserted right after its class, unless the producer
/// already supplied one.
pub fn normalize_implicit_classes(facts: &mut ParsedFacts) -> Result<(), DesugarError> {
    if !facts
        .declarations
        .iter()
        .any(|d| d.kind == DeclKind::Class && d.is_implicit)
    {
        return Ok(());
    }
    let existing: BTreeSet<(String, SymbolId)> = facts
        .declarations
        .iter()
        .map(|d| (d.module.to_string(), d.id.clone()))
        .collect();
    let mut out = Vec::with_capacity(facts.declarations.len() + 4);
    for d in std::mem::take(&mut facts.declarations) {
        if d.kind == DeclKind::Class && d.is_implicit {
            let (plain, conversion) = desugar_implicit_class(&d)?;
            let present = existing.contains(&(conversion.module.to_string(), conversion.id.clone()));
            out.push(plain);
            if !present {
                out.push(conversion);
            }
        } else {
            out.push(d);
        }
    }
    facts.declarations = out;
    Ok(())
}
