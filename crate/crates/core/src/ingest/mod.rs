//! Parsing of the JSONL semantic-facts format into the model.
//!
//! One record per line, tagged by `kind`:
//!
//! ```text
//! {"kind":"project","id":"acme/app","stars":12,"commits":40,"firstCommit":"2017-01-02",...}
//! {"kind":"module","id":"acme/app:core","project":"acme/app","group":"com.acme",...}
//! {"kind":"declaration","id":"EC.global","module":"...","declKind":"VAL",...}
//! {"kind":"callsite","module":"...","callee":"Future.apply()",...}
//! {"kind":"synthetic","module":"...","path":"...","tree":{"node":"apply",...}}
//! ```
//!
//! Local symbols (`local3`) are qualified with the record's module on the way in.

mod desugar;
mod link;
pub mod wire;

use std::collections::BTreeSet;
use std::fmt;
use std::io::{BufRead, Write};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::model::{
    ArgumentTree, CallSite, DeclKind, Declaration, Language, Location, MethodSig, ModuleId, ModuleMeta, Param,
    ParamList, PathKind, Platform, ProjectId, ProjectMeta, Scope, Signature, SymbolId, TextRange, TypeRef, TypeSig,
    ValueSig, Visibility,
};

pub use desugar::{conversion_def_id, desugar_implicit_class, normalize_implicit_classes, DesugarError};
pub(crate) use link::merge_metadata;
pub use link::{link_symbols, module_preference, LinkError};
use wire::*;

/// A compiler-injected tree as recorded by the fact producer.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SyntheticTree {
    /// A quote of source code at `range`; `symbol` is what it resolves to, if known.
    Original {
        range: TextRange,
        symbol: Option<SymbolId>,
    },
    Id(SymbolId),
    Select {
        qual: Box<SyntheticTree>,
        id: SymbolId,
    },
    TypeApply {
        fun: Box<SyntheticTree>,
        type_args: Vec<TypeRef>,
    },
    Apply {
        fun: Box<SyntheticTree>,
        args: Vec<SyntheticTree>,
    },
}

impl SyntheticTree {
    /// Range of the first original quote, depth-first.
    pub fn first_original(&self) -> Option<TextRange> {
        match self {
            SyntheticTree::Original { range, .. } => Some(*range),
            SyntheticTree::Id(_) => None,
            SyntheticTree::Select { qual, .. } => qual.first_original(),
            SyntheticTree::TypeApply { fun, .. } => fun.first_original(),
            SyntheticTree::Apply { fun, args } => fun
                .first_original()
                .or_else(|| args.iter().find_map(|a| a.first_original())),
        }
    }

    pub fn contains_original(&self) -> bool {
        self.first_original().is_some()
    }
}

/// A synthetic tree with the file it was injected into.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Synthetic {
    pub module: ModuleId,
    pub path: String,
    pub path_kind: PathKind,
    pub tree: SyntheticTree,
}

/// Everything read from one facts stream, in input order per kind.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParsedFacts {
    pub projects: Vec<ProjectMeta>,
    pub modules: Vec<ModuleMeta>,
    pub declarations: Vec<Declaration>,
    pub callsites: Vec<CallSite>,
    pub synthetics: Vec<Synthetic>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct FactCounts {
    pub projects: usize,
    pub modules: usize,
    pub declarations: usize,
    pub callsites: usize,
    pub synthetics: usize,
}

impl ParsedFacts {
    pub fn counts(&self) -> FactCounts {
        FactCounts {
            projects: self.projects.len(),
            modules: self.modules.len(),
            declarations: self.declarations.len(),
            callsites: self.callsites.len(),
            synthetics: self.synthetics.len(),
        }
    }

    pub fn extend(&mut self, other: ParsedFacts) {
        self.projects.extend(other.projects);
        self.modules.extend(other.modules);
        self.declarations.extend(other.declarations);
        self.callsites.extend(other.callsites);
        self.synthetics.extend(other.synthetics);
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Read(String),
    InvalidJson(String),
    NotAnObject,
    MissingKind,
    UnknownKind(String),
    Schema(String),
    InvalidField { field: &'static str, message: String },
    DuplicateDeclaration { module: String, id: String },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let line = self.line;
        match &self.kind {
            ParseErrorKind::Read(e) => write!(f, "read failure at line {line}: {e}"),
            ParseErrorKind::InvalidJson(e) => write!(f, "malformed JSON at line {line}: {e}"),
            ParseErrorKind::NotAnObject => write!(f, "record is not an object at line {line}"),
            ParseErrorKind::MissingKind => write!(f, "missing kind at line {line}"),
            ParseErrorKind::UnknownKind(k) => write!(f, "unknown kind at line {line}: `{k}`"),
            ParseErrorKind::Schema(e) => write!(f, "schema violation at line {line}: {e}"),
            ParseErrorKind::InvalidField { field, message } => {
                write!(f, "invalid `{field}` at line {line}: {message}")
            }
            ParseErrorKind::DuplicateDeclaration { module, id } => {
                write!(f, "duplicate declaration `{id}` in module `{module}` at line {line}")
            }
        }
    }
}

fn field_err(field: &'static str, message: impl Into<String>) -> ParseErrorKind {
    ParseErrorKind::InvalidField {
        field,
        message: message.into(),
    }
}

fn label<T: std::str::FromStr<Err = crate::model::UnknownLabel>>(
    field: &'static str,
    value: &str,
) -> Result<T, ParseErrorKind> {
    value
        .parse()
        .map_err(|e: crate::model::UnknownLabel| field_err(field, e.to_string()))
}

fn date(field: &'static str, value: &str) -> Result<NaiveDate, ParseErrorKind> {
    NaiveDate::parse_from_str(value, "%Y-%m-%d").map_err(|e| field_err(field, format!("`{value}`: {e}")))
}

fn range(value: [u32; 4]) -> Result<TextRange, ParseErrorKind> {
    let r = TextRange::from(value);
    if r.is_ordered() {
        Ok(r)
    } else {
        Err(field_err("range", "start is after end"))
    }
}

fn path_kind(explicit: Option<&str>, path: &str) -> Result<PathKind, ParseErrorKind> {
    match explicit {
        Some(k) => label("pathKind", k),
        None => Ok(PathKind::infer(path)),
    }
}

/// Wire → model conversion with local-symbol qualification for one module.
struct Qualifier<'a> {
    module: &'a str,
}

impl Qualifier<'_> {
    fn sym(&self, s: &str) -> Result<SymbolId, ParseErrorKind> {
        if s.is_empty() {
            return Err(field_err("id", "empty symbol"));
        }
        Ok(SymbolId::from(s).qualify_local(self.module))
    }

    fn type_ref(&self, t: &TypeRefJson) -> Result<TypeRef, ParseErrorKind> {
        Ok(TypeRef {
            head: self.sym(&t.head)?,
            args: t.args.iter().map(|a| self.type_ref(a)).collect::<Result<_, _>>()?,
        })
    }

    fn param_list(&self, l: &ParamListJson) -> Result<ParamList, ParseErrorKind> {
        Ok(ParamList {
            is_implicit: l.implicit,
            params: l
                .params
                .iter()
                .map(|p| {
                    Ok(Param {
                        name: p.name.clone(),
                        tpe: self.type_ref(&p.tpe)?,
                    })
                })
                .collect::<Result<_, ParseErrorKind>>()?,
        })
    }

    fn syms(&self, ids: &[String]) -> Result<Vec<SymbolId>, ParseErrorKind> {
        ids.iter().map(|s| self.sym(s)).collect()
    }

    fn signature(&self, s: &SignatureJson) -> Result<Signature, ParseErrorKind> {
        Ok(match s {
            SignatureJson::Method {
                type_params,
                param_lists,
                ret,
            } => Signature::Method(MethodSig {
                type_params: self.syms(type_params)?,
                param_lists: param_lists
                    .iter()
                    .map(|l| self.param_list(l))
                    .collect::<Result<_, _>>()?,
                ret: self.type_ref(ret)?,
            }),
            SignatureJson::Value { tpe } => Signature::Value(ValueSig {
                tpe: self.type_ref(tpe)?,
            }),
            SignatureJson::Type {
                type_params,
                parents,
                ctor,
            } => Signature::Type(TypeSig {
                type_params: self.syms(type_params)?,
                parents: parents.iter().map(|p| self.type_ref(p)).collect::<Result<_, _>>()?,
                ctor: ctor.iter().map(|l| self.param_list(l)).collect::<Result<_, _>>()?,
            }),
        })
    }

    fn arg(&self, a: &ArgTreeJson) -> Result<ArgumentTree, ParseErrorKind> {
        Ok(match a {
            ArgTreeJson::Ref { id } => ArgumentTree::ValueRef(self.sym(id)?),
            ArgTreeJson::Call { call, type_args, args } => ArgumentTree::Call {
                decl: self.sym(call)?,
                type_args: type_args.iter().map(|t| self.type_ref(t)).collect::<Result<_, _>>()?,
                args: args.iter().map(|x| self.arg(x)).collect::<Result<_, _>>()?,
            },
        })
    }

    fn tree(&self, t: &TreeJson) -> Result<SyntheticTree, ParseErrorKind> {
        Ok(match t {
            TreeJson::Original { range: r, symbol } => SyntheticTree::Original {
                range: range(*r)?,
                symbol: symbol.as_deref().map(|s| self.sym(s)).transpose()?,
            },
            TreeJson::Idref { symbol } => SyntheticTree::Id(self.sym(symbol)?),
            TreeJson::Select { qual, id } => match id.as_ref() {
                TreeJson::Idref { symbol } => SyntheticTree::Select {
                    qual: Box::new(self.tree(qual)?),
                    id: self.sym(symbol)?,
                },
                _ => return Err(field_err("tree", "select id must be an idref node")),
            },
            TreeJson::Typeapply { fun, type_args } => SyntheticTree::TypeApply {
                fun: Box::new(self.tree(fun)?),
                type_args: type_args.iter().map(|x| self.type_ref(x)).collect::<Result<_, _>>()?,
            },
            TreeJson::Apply { fun, args } => SyntheticTree::Apply {
                fun: Box::new(self.tree(fun)?),
                args: args.iter().map(|x| self.tree(x)).collect::<Result<_, _>>()?,
            },
        })
    }
}

fn project(r: ProjectRecord) -> Result<ProjectMeta, ParseErrorKind> {
    if r.id.is_empty() {
        return Err(field_err("id", "empty project id"));
    }
    Ok(ProjectMeta {
        id: ProjectId::from(r.id),
        stars: r.stars,
        commits: r.commits,
        first_commit: date("firstCommit", &r.first_commit)?,
        last_commit: date("lastCommit", &r.last_commit)?,
        dup_ratio: r.dup_ratio,
        in_index: r.in_index,
    })
}

fn module(r: ModuleRecord) -> Result<ModuleMeta, ParseErrorKind> {
    if r.id.is_empty() {
        return Err(field_err("id", "empty module id"));
    }
    if r.test_call_sites > r.total_call_sites {
        return Err(field_err("testCallSites", "exceeds totalCallSites"));
    }
    Ok(ModuleMeta {
        id: ModuleId::from(r.id),
        project: ProjectId::from(r.project),
        group: r.group,
        artifact: r.artifact,
        version: r.version,
        platform: label::<Platform>("platform", &r.platform)?,
        scala_version: r.scala_version,
        loc_main: r.loc_main,
        loc_test: r.loc_test,
        total_call_sites: r.total_call_sites,
        test_call_sites: r.test_call_sites,
    })
}

fn declaration(r: DeclarationRecord) -> Result<Declaration, ParseErrorKind> {
    let q = Qualifier { module: &r.module };
    let module = ModuleId::from(r.module.as_str());
    let decl = Declaration {
        id: q.sym(&r.id)?,
        kind: label::<DeclKind>("declKind", &r.decl_kind)?,
        language: label::<Language>("language", &r.language)?,
        is_implicit: r.implicit,
        visibility: label::<Visibility>("visibility", &r.visibility)?,
        scope: label::<Scope>("scope", &r.scope)?,
        location: Location::new(
            &module,
            r.path.clone(),
            range(r.range)?,
            path_kind(r.path_kind.as_deref(), &r.path)?,
        ),
        signature: q.signature(&r.signature)?,
        from_implicit_class: r.from_implicit_class,
        module,
    };
    decl.check_shape().map_err(|v| ParseErrorKind::Schema(v.to_string()))?;
    Ok(decl)
}

fn callsite(r: CallsiteRecord) -> Result<CallSite, ParseErrorKind> {
    let q = Qualifier { module: &r.module };
    let module = ModuleId::from(r.module.as_str());
    Ok(CallSite {
        callee: q.sym(&r.callee)?,
        location: Location::new(
            &module,
            r.path.clone(),
            range(r.range)?,
            path_kind(r.path_kind.as_deref(), &r.path)?,
        ),
        type_args: r.type_args.iter().map(|t| q.type_ref(t)).collect::<Result<_, _>>()?,
        implicit_args: r.implicit_args.iter().map(|a| q.arg(a)).collect::<Result<_, _>>()?,
        whole_call_synthetic: r.synthetic_call,
        module,
    })
}

fn synthetic(r: SyntheticRecord) -> Result<Synthetic, ParseErrorKind> {
    let q = Qualifier { module: &r.module };
    Ok(Synthetic {
        module: ModuleId::from(r.module.as_str()),
        path_kind: path_kind(r.path_kind.as_deref(), &r.path)?,
        tree: q.tree(&r.tree)?,
        path: r.path,
    })
}

fn payload<T: serde::de::DeserializeOwned>(obj: serde_json::Map<String, Value>) -> Result<T, ParseErrorKind> {
    serde_json::from_value(Value::Object(obj)).map_err(|e| ParseErrorKind::Schema(e.to_string()))
}

/// Parses a newline-delimited facts stream. Blank lines are skipped.
pub fn parse_facts(input: impl BufRead) -> Result<ParsedFacts, ParseError> {
    let mut out = ParsedFacts::default();
    let mut seen: BTreeSet<(ModuleId, SymbolId)> = BTreeSet::new();
    for (idx, line) in input.lines().enumerate() {
        let line_no = idx + 1;
        let at = |kind| ParseError { line: line_no, kind };
        let line = line.map_err(|e| at(ParseErrorKind::Read(e.to_string())))?;
        if line.trim().is_empty() {
            continue;
        }
        let value: Value = serde_json::from_str(&line).map_err(|e| at(ParseErrorKind::InvalidJson(e.to_string())))?;
        let Value::Object(mut obj) = value else {
            return Err(at(ParseErrorKind::NotAnObject));
        };
        let kind = match obj.remove("kind") {
            Some(Value::String(k)) => k,
            Some(_) | None => return Err(at(ParseErrorKind::MissingKind)),
        };
        match kind.as_str() {
            "project" => out.projects.push(payload(obj).and_then(project).map_err(at)?),
            "module" => out.modules.push(payload(obj).and_then(module).map_err(at)?),
            "declaration" => {
                let d = payload(obj).and_then(declaration).map_err(at)?;
                if !seen.insert((d.module.clone(), d.id.clone())) {
                    return Err(at(ParseErrorKind::DuplicateDeclaration {
                        module: d.module.to_string(),
                        id: d.id.to_string(),
                    }));
                }
                out.declarations.push(d);
            }
            "callsite" => out.callsites.push(payload(obj).and_then(callsite).map_err(at)?),
            "synthetic" => out.synthetics.push(payload(obj).and_then(synthetic).map_err(at)?),
            other => return Err(at(ParseErrorKind::UnknownKind(other.to_owned()))),
        }
    }
    Ok(out)
}

// ---- serialization (model → wire) ----

fn type_ref_json(t: &TypeRef) -> TypeRefJson {
    TypeRefJson {
        head: t.head.to_string(),
        args: t.args.iter().map(type_ref_json).collect(),
    }
}

fn param_list_json(l: &ParamList) -> ParamListJson {
    ParamListJson {
        implicit: l.is_implicit,
        params: l
            .params
            .iter()
            .map(|p| ParamJson {
                name: p.name.clone(),
                tpe: type_ref_json(&p.tpe),
            })
            .collect(),
    }
}

fn signature_json(s: &Signature) -> SignatureJson {
    let ids = |v: &[SymbolId]| v.iter().map(|s| s.to_string()).collect();
    match s {
        Signature::Method(m) => SignatureJson::Method {
            type_params: ids(&m.type_params),
            param_lists: m.param_lists.iter().map(param_list_json).collect(),
            ret: type_ref_json(&m.ret),
        },
        Signature::Value(v) => SignatureJson::Value {
            tpe: type_ref_json(&v.tpe),
        },
        Signature::Type(t) => SignatureJson::Type {
            type_params: ids(&t.type_params),
            parents: t.parents.iter().map(type_ref_json).collect(),
            ctor: t.ctor.iter().map(param_list_json).collect(),
        },
    }
}

fn arg_json(a: &ArgumentTree) -> ArgTreeJson {
    match a {
        ArgumentTree::ValueRef(id) => ArgTreeJson::Ref { id: id.to_string() },
        ArgumentTree::Call { decl, type_args, args } => ArgTreeJson::Call {
            call: decl.to_string(),
            type_args: type_args.iter().map(type_ref_json).collect(),
            args: args.iter().map(arg_json).collect(),
        },
    }
}

fn tree_json(t: &SyntheticTree) -> TreeJson {
    match t {
        SyntheticTree::Original { range, symbol } => TreeJson::Original {
            range: range.to_array(),
            symbol: symbol.as_ref().map(|s| s.to_string()),
        },
        SyntheticTree::Id(s) => TreeJson::Idref { symbol: s.to_string() },
        SyntheticTree::Select { qual, id } => TreeJson::Select {
            qual: Box::new(tree_json(qual)),
            id: Box::new(TreeJson::Idref { symbol: id.to_string() }),
        },
        SyntheticTree::TypeApply { fun, type_args } => TreeJson::Typeapply {
            fun: Box::new(tree_json(fun)),
            type_args: type_args.iter().map(type_ref_json).collect(),
        },
        SyntheticTree::Apply { fun, args } => TreeJson::Apply {
            fun: Box::new(tree_json(fun)),
            args: args.iter().map(tree_json).collect(),
        },
    }
}

fn write_record<T: Serialize>(out: &mut impl Write, kind: &str, record: &T) -> std::io::Result<()> {
    let mut value = serde_json::to_value(record).map_err(std::io::Error::other)?;
    if let Value::Object(obj) = &mut value {
        let mut tagged = serde_json::Map::new();
        tagged.insert("kind".to_owned(), Value::String(kind.to_owned()));
        tagged.extend(std::mem::take(obj));
        *obj = tagged;
    }
    serde_json::to_writer(&mut *out, &value).map_err(std::io::Error::other)?;
    out.write_all(b"\n")
}

/// Writes facts back as JSONL; `parse_facts` reads the output into an equal value.
pub fn write_facts(facts: &ParsedFacts, out: &mut impl Write) -> std::io::Result<()> {
    for p in &facts.projects {
        write_record(
            out,
            "project",
            &ProjectRecord {
                id: p.id.to_string(),
                stars: p.stars,
                commits: p.commits,
                first_commit: p.first_commit.format("%Y-%m-%d").to_string(),
                last_commit: p.last_commit.format("%Y-%m-%d").to_string(),
                dup_ratio: p.dup_ratio,
                in_index: p.in_index,
            },
        )?;
    }
    for m in &facts.modules {
        write_record(
            out,
            "module",
            &ModuleRecord {
                id: m.id.to_string(),
                project: m.project.to_string(),
                group: m.group.clone(),
                artifact: m.artifact.clone(),
                version: m.version.clone(),
                platform: m.platform.to_string(),
                scala_version: m.scala_version.clone(),
                loc_main: m.loc_main,
                loc_test: m.loc_test,
                total_call_sites: m.total_call_sites,
                test_call_sites: m.test_call_sites,
            },
        )?;
    }
    for d in &facts.declarations {
        write_record(
            out,
            "declaration",
            &DeclarationRecord {
                id: d.id.to_string(),
                module: d.module.to_string(),
                decl_kind: d.kind.to_string(),
                language: d.language.to_string(),
                implicit: d.is_implicit,
                visibility: d.visibility.to_string(),
                scope: d.scope.to_string(),
                path: d.location.path.clone(),
                range: d.location.range.to_array(),
                from_implicit_class: d.from_implicit_class,
                signature: signature_json(&d.signature),
                path_kind: Some(d.location.path_kind.to_string()),
            },
        )?;
    }
    for c in &facts.callsites {
        write_record(
            out,
            "callsite",
            &CallsiteRecord {
                module: c.module.to_string(),
                callee: c.callee.to_string(),
                path: c.location.path.clone(),
                range: c.location.range.to_array(),
                type_args: c.type_args.iter().map(type_ref_json).collect(),
                implicit_args: c.implicit_args.iter().map(arg_json).collect(),
                synthetic_call: c.whole_call_synthetic,
                path_kind: Some(c.location.path_kind.to_string()),
            },
        )?;
    }
    for s in &facts.synthetics {
        write_record(
            out,
            "synthetic",
            &SyntheticRecord {
                module: s.module.to_string(),
                path: s.path.clone(),
                tree: tree_json(&s.tree),
                path_kind: Some(s.path_kind.to_string()),
            },
        )?;
    }
    Ok(())
}
