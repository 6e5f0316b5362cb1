//! Idiom recognizers over declarations and implicit call sites.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::model::{
    conversion_shape, CallSite, ConformanceError, DeclKind, Declaration, ModuleId, ModuleMeta, Param, Scope, Signature,
    SymbolId, SymbolTable, TypeRef, Visibility,
};

labeled_enum! {
    pub enum ConversionKind {
        LateTrait => "LATE_TRAIT",
        ExtensionMethod => "EXTENSION_METHOD",
        Plain => "PLAIN",
    }
}

labeled_enum! {
    pub enum CallSiteIdiom {
        TypeClass => "TYPE_CLASS",
        TypeProof => "TYPE_PROOF",
        Context => "CONTEXT",
    }
}

labeled_enum! {
    /// The full taxonomy of conversion kinds and parameter idioms, with the two
    /// conversion anti-patterns.
    pub enum Idiom {
        LateTrait => "LATE_TRAIT",
        ExtensionMethod => "EXTENSION_METHOD",
        TypeClass => "TYPE_CLASS",
        ExtensionSyntax => "EXTENSION_SYNTAX",
        TypeProof => "TYPE_PROOF",
        Context => "CONTEXT",
        UnrelatedConversion => "UNRELATED_CONVERSION",
        BidirectionalConversion => "BIDIRECTIONAL_CONVERSION",
    }
}

impl From<CallSiteIdiom> for Idiom {
    fn from(i: CallSiteIdiom) -> Idiom {
        match i {
            CallSiteIdiom::TypeClass => Idiom::TypeClass,
            CallSiteIdiom::TypeProof => Idiom::TypeProof,
            CallSiteIdiom::Context => Idiom::Context,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ClassifyError {
    #[error("call site callee {0} has no declaration")]
    UnresolvedCallee(SymbolId),
    #[error(transparent)]
    Conformance(#[from] ConformanceError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conversion {
    pub decl: SymbolId,
    pub source: TypeRef,
    pub target: TypeRef,
    pub via_function_value: bool,
    pub conditional: bool,
    pub from_implicit_class: bool,
}

/// Recognizes implicit conversions: a one-parameter implicit method or an
/// implicit value of function type, with a non-unit result.
pub fn conversion_of(
    decl: &Declaration,
    table: &SymbolTable,
    config: &Config,
) -> Result<Option<Conversion>, ConformanceError> {
    if !decl.is_implicit {
        return Ok(None);
    }
    let (source, target, via_function_value) = match decl.kind {
        DeclKind::Def | DeclKind::Macro => {
            let Some(sig) = decl.method_sig() else { return Ok(None) };
            let explicit: Vec<_> = decl.explicit_lists().collect();
            let [list] = explicit.as_slice() else { return Ok(None) };
            let [param] = list.params.as_slice() else {
                return Ok(None);
            };
            (param.tpe.clone(), sig.ret.clone(), false)
        }
        DeclKind::Val | DeclKind::Var | DeclKind::Object => {
            let Signature::Value(v) = &decl.signature else {
                return Ok(None);
            };
            match conversion_shape(&v.tpe, &config.function_id, table)? {
                Some((s, r)) => (s, r, true),
                None => return Ok(None),
            }
        }
        _ => return Ok(None),
    };
    if target.head == config.unit_id {
        return Ok(None);
    }
    Ok(Some(Conversion {
        decl: decl.id.clone(),
        source,
        target,
        via_function_value,
        conditional: decl.implicit_list().is_some_and(|l| !l.params.is_empty()),
        from_implicit_class: decl.from_implicit_class,
    }))
}

/// Declaration of a type head, if it is a real type (not a type parameter).
fn real_type<'t>(head: &SymbolId, table: &'t SymbolTable) -> Option<&'t Declaration> {
    table.get(head).filter(|d| d.kind != DeclKind::TypeParam)
}

pub fn classify_conversion(conv: &Conversion, decl: &Declaration, table: &SymbolTable) -> ConversionKind {
    let target = real_type(&conv.target.head, table);
    let target_is_trait = target.is_some_and(Declaration::is_trait_like);
    if target_is_trait && !conv.from_implicit_class {
        return ConversionKind::LateTrait;
    }
    let collocated = target.is_some_and(|t| t.location.unit == decl.location.unit);
    if conv.from_implicit_class || (!target_is_trait && collocated) {
        ConversionKind::ExtensionMethod
    } else {
        ConversionKind::Plain
    }
}

/// Type parameters in scope at `decl`: its own, plus those of every
/// declared owner (enclosing class or trait).
pub fn enclosing_type_params(decl: &Declaration, table: &SymbolTable) -> BTreeSet<SymbolId> {
    let mut out: BTreeSet<SymbolId> = decl.signature.type_params().iter().cloned().collect();
    if decl.from_implicit_class {
        if let Some(sig) = decl.method_sig() {
            if let Some(class) = table.get(&sig.ret.head) {
                out.extend(class.signature.type_params().iter().cloned());
            }
        }
    }
    let mut owner = decl.id.owner();
    while let Some(o) = owner {
        if let Some(d) = table.get(&o) {
            out.extend(d.signature.type_params().iter().cloned());
        }
        owner = o.owner();
    }
    out
}

pub fn is_type_class_param(param: &Param, enclosing: &BTreeSet<SymbolId>) -> bool {
    param.tpe.has_arg_referencing(enclosing)
}

pub fn is_extension_syntax(kind: ConversionKind, decl: &Declaration, enclosing: &BTreeSet<SymbolId>) -> bool {
    kind == ConversionKind::ExtensionMethod && decl.implicit_params().iter().any(|p| is_type_class_param(p, enclosing))
}

/// A generalized type constraint: its head is a configured constraint, and
/// a function-typed constraint must relate two in-scope type parameters.
pub fn is_constraint_param(param: &Param, enclosing: &BTreeSet<SymbolId>, config: &Config) -> bool {
    let t = &param.tpe;
    if !config.constraint_ids.contains(&t.head) {
        return false;
    }
    if t.head == config.function_id {
        return t.args.len() == 2 && t.args.iter().all(|a| a.references(enclosing));
    }
    true
}

pub fn is_type_proof(decl: &Declaration, enclosing: &BTreeSet<SymbolId>, config: &Config) -> bool {
    decl.is_method_like()
        && decl
            .implicit_params()
            .iter()
            .any(|p| is_constraint_param(p, enclosing, config))
}

/// Injected arguments fill the callee's implicit parameters in order.
pub fn classify_callsite(cs: &CallSite, table: &SymbolTable, config: &Config) -> Result<CallSiteIdiom, ClassifyError> {
    let callee = table
        .get(&cs.callee)
        .ok_or_else(|| ClassifyError::UnresolvedCallee(cs.callee.clone()))?;
    let enclosing = enclosing_type_params(callee, table);
    let filled: Vec<&Param> = callee.implicit_params().iter().take(cs.implicit_args.len()).collect();
    if is_type_proof(callee, &enclosing, config) && filled.iter().any(|p| is_constraint_param(p, &enclosing, config)) {
        return Ok(CallSiteIdiom::TypeProof);
    }
    if filled.iter().any(|p| is_type_class_param(p, &enclosing)) {
        return Ok(CallSiteIdiom::TypeClass);
    }
    Ok(CallSiteIdiom::Context)
}

/// A public, non-local conversion declared away from both its source and target types.
pub fn is_unrelated(conv: &Conversion, decl: &Declaration, table: &SymbolTable) -> bool {
    let elsewhere = |head: &SymbolId| real_type(head, table).is_none_or(|d| d.location.unit != decl.location.unit);
    decl.visibility == Visibility::Public
        && decl.scope != Scope::BlockLocal
        && elsewhere(&conv.source.head)
        && elsewhere(&conv.target.head)
}

/// Pairs of mutually inverse conversions (by head) within one artifact.
/// `artifact_of` returns the artifact key of a conversion's declaring module.
pub fn bidirectional_pairs<'a, K: Ord>(
    convs: impl IntoIterator<Item = &'a Conversion>,
    artifact_of: impl Fn(&SymbolId) -> Option<K>,
) -> Vec<(SymbolId, SymbolId)> {
    let mut by_artifact: BTreeMap<K, Vec<&Conversion>> = BTreeMap::new();
    for c in convs {
        if let Some(k) = artifact_of(&c.decl) {
            by_artifact.entry(k).or_default().push(c);
        }
    }
    let mut pairs = BTreeSet::new();
    for group in by_artifact.values() {
        for (i, a) in group.iter().enumerate() {
            for b in &group[i + 1..] {
                if a.decl != b.decl && a.source.head == b.target.head && a.target.head == b.source.head {
                    let pair = if a.decl < b.decl {
                        (a.decl.clone(), b.decl.clone())
                    } else {
                        (b.decl.clone(), a.decl.clone())
                    };
                    pairs.insert(pair);
                }
            }
        }
    }
    pairs.into_iter().collect()
}

/// Artifact key for bidirectional grouping; modules without coordinates form their own artifact.
pub fn artifact_key(m: &ModuleMeta) -> String {
    if m.is_grouped() {
        m.coordinate()
    } else {
        format!("module:{}", m.id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConversionInfo {
    pub conversion: Conversion,
    pub kind: ConversionKind,
    pub extension_syntax: bool,
    pub unrelated: bool,
    pub bidir_partners: Vec<SymbolId>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub conversions: BTreeMap<SymbolId, ConversionInfo>,
    /// Every implicit declaration or declaration with implicit parameters in analyzed modules.
    pub decl_idioms: BTreeMap<SymbolId, BTreeSet<Idiom>>,
    /// Parallel to the corpus call-site list; `None` for sites outside the
    /// analyzed modules or with an unresolved callee.
    pub callsite_idioms: Vec<Option<CallSiteIdiom>>,
    pub unresolved_callees: Vec<SymbolId>,
}

fn declaration_idioms(
    decl: &Declaration,
    table: &SymbolTable,
    config: &Config,
) -> Result<(BTreeSet<Idiom>, Option<ConversionInfo>), ConformanceError> {
    let enclosing = enclosing_type_params(decl, table);
    let mut idioms = BTreeSet::new();
    let proof = is_type_proof(decl, &enclosing, config);
    let type_class = decl
        .implicit_params()
        .iter()
        .any(|p| is_type_class_param(p, &enclosing) && !is_constraint_param(p, &enclosing, config));
    if proof {
        idioms.insert(Idiom::TypeProof);
    }
    if type_class {
        idioms.insert(Idiom::TypeClass);
    }
    if !proof && !type_class && !decl.implicit_params().is_empty() {
        idioms.insert(Idiom::Context);
    }
    let info = conversion_of(decl, table, config)?.map(|conversion| {
        let kind = classify_conversion(&conversion, decl, table);
        match kind {
            ConversionKind::LateTrait => {
                idioms.insert(Idiom::LateTrait);
            }
            ConversionKind::ExtensionMethod => {
                idioms.insert(Idiom::ExtensionMethod);
            }
            ConversionKind::Plain => {}
        }
        let extension_syntax = is_extension_syntax(kind, decl, &enclosing);
        if extension_syntax {
            idioms.insert(Idiom::ExtensionSyntax);
        }
        let unrelated = is_unrelated(&conversion, decl, table);
        if unrelated {
            idioms.insert(Idiom::UnrelatedConversion);
        }
        ConversionInfo {
            conversion,
            kind,
            extension_syntax,
            unrelated,
            bidir_partners: Vec::new(),
        }
    });
    Ok((idioms, info))
}

/// Labels every relevant declaration and call site of `analyzed` modules.
/// Unresolved callees are collected, not fatal.
pub fn classify_corpus(
    table: &SymbolTable,
    modules: &BTreeMap<ModuleId, ModuleMeta>,
    callsites: &[CallSite],
    analyzed: &BTreeSet<ModuleId>,
    config: &Config,
) -> Result<Classification, ClassifyError> {
    let decls: Vec<&Declaration> = table
        .declarations()
        .filter(|d| analyzed.contains(&d.module) && (d.is_implicit || d.implicit_list().is_some()))
        .collect();
    let labeled: Vec<_> = decls
        .par_iter()
        .map(|d| declaration_idioms(d, table, config).map(|r| (d.id.clone(), r)))
        .collect::<Result<_, _>>()?;

    let mut out = Classification::default();
    for (id, (idioms, info)) in labeled {
        out.decl_idioms.insert(id.clone(), idioms);
        if let Some(info) = info {
            out.conversions.insert(id, info);
        }
    }

    let pairs = bidirectional_pairs(out.conversions.values().map(|i| &i.conversion), |id| {
        table.get(id).and_then(|d| modules.get(&d.module)).map(artifact_key)
    });
    for (a, b) in pairs {
        for (x, y) in [(&a, &b), (&b, &a)] {
            if let Some(info) = out.conversions.get_mut(x) {
                info.bidir_partners.push(y.clone());
            }
            if let Some(set) = out.decl_idioms.get_mut(x) {
                set.insert(Idiom::BidirectionalConversion);
            }
        }
    }

    let results: Vec<Option<Result<CallSiteIdiom, ClassifyError>>> = callsites
        .par_iter()
        .map(|cs| {
            analyzed
                .contains(&cs.module)
                .then(|| classify_callsite(cs, table, config))
        })
        .collect();
    for r in results {
        match r {
            None => out.callsite_idioms.push(None),
            Some(Ok(i)) => out.callsite_idioms.push(Some(i)),
            Some(Err(ClassifyError::UnresolvedCallee(id))) => {
                log::warn!("unresolved call-site callee {id}");
                out.unresolved_callees.push(id);
                out.callsite_idioms.push(None);
            }
            Some(Err(e)) => return Err(e),
        }
    }
    Ok(out)
}
