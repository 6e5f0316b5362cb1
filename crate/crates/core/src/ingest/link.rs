use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet};

use crate::model::{
    DeclKind, Declaration, ModuleId, ModuleMeta, ProjectId, ProjectMeta, ScalaVersion, Signature, SymbolId,
    SymbolTable, TypeSig,
};

use super::ParsedFacts;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LinkError {
    #[error("module {0} is described twice with different metadata")]
    ConflictingModule(ModuleId),
    #[error("project {0} is described twice with different metadata")]
    ConflictingProject(ProjectId),
    #[error("declaration {id} belongs to undeclared module {module}")]
    UnknownModule { id: SymbolId, module: ModuleId },
    #[error("{what} refers to undeclared module {module}")]
    UnknownRecordModule { what: String, module: ModuleId },
    #[error("{id} is declared with conflicting signatures in modules {first} and {second} of project {project}")]
    ConflictingDeclaration {
        id: SymbolId,
        project: ProjectId,
        first: ModuleId,
        second: ModuleId,
    },
}

/// Ordering key among builds of the same code: JVM before JS before native,
/// newer Scala first, then module id.
pub fn module_preference(m: &ModuleMeta) -> (u8, Reverse<ScalaVersion>, ModuleId) {
    (
        m.platform.preference_rank(),
        Reverse(ScalaVersion::parse(&m.scala_version)),
        m.id.clone(),
    )
}

pub(crate) type Metadata = (BTreeMap<ProjectId, ProjectMeta>, BTreeMap<ModuleId, ModuleMeta>);

/// Unions project and module records; identical duplicates are allowed.
pub(crate) fn merge_metadata(fragments: &[ParsedFacts]) -> Result<Metadata, LinkError> {
    let mut projects: BTreeMap<ProjectId, ProjectMeta> = BTreeMap::new();
    let mut modules: BTreeMap<ModuleId, ModuleMeta> = BTreeMap::new();
    for f in fragments {
        for p in &f.projects {
            match projects.get(&p.id) {
                Some(existing) if existing != p => return Err(LinkError::ConflictingProject(p.id.clone())),
                Some(_) => {}
                None => {
                    projects.insert(p.id.clone(), p.clone());
                }
            }
        }
        for m in &f.modules {
            match modules.get(&m.id) {
                Some(existing) if existing != m => return Err(LinkError::ConflictingModule(m.id.clone())),
                Some(_) => {}
                None => {
                    modules.insert(m.id.clone(), m.clone());
                }
            }
        }
    }
    Ok((projects, modules))
}

/// Builds the corpus-wide symbol table.
///
/// The same id may be declared by several modules (cross-built sources,
/// shared dependencies). Within one project the signatures must agree; the
/// declaration from the preferred build wins. Any referenced id without a
/// declaration is recorded as external, and type parameters listed by a signature get a `TYPE_PARAM`
/// entry of their own. The result does not depend on fragment order.
pub fn link_symbols(fragments: &[ParsedFacts]) -> Result<SymbolTable, LinkError> {
    let (_, modules) = merge_metadata(fragments)?;

    let mut by_id: BTreeMap<&SymbolId, Vec<&Declaration>> = BTreeMap::new();
    for d in fragments.iter().flat_map(|f| &f.declarations) {
        if !modules.contains_key(&d.module) {
            return Err(LinkError::UnknownModule {
                id: d.id.clone(),
                module: d.module.clone(),
            });
        }
        by_id.entry(&d.id).or_default().push(d);
    }

    let mut table = SymbolTable::new();
    for (id, mut candidates) in by_id {
        candidates.sort_by_key(|d| module_preference(&modules[&d.module]));
        for (i, a) in candidates.iter().enumerate() {
            for b in &candidates[i + 1..] {
                let pa = &modules[&a.module].project;
                if pa == &modules[&b.module].project && (a.kind != b.kind || a.signature != b.signature) {
                    return Err(LinkError::ConflictingDeclaration {
                        id: id.clone(),
                        project: pa.clone(),
                        first: a.module.clone(),
                        second: b.module.clone(),
                    });
                }
            }
        }
        table.insert(candidates[0].clone());
    }

    let mut type_params = Vec::new();
    for d in table.declarations() {
        for tp in d.signature.type_params() {
            if table.get(tp).is_none() {
                type_params.push(Declaration {
                    id: tp.clone(),
                    kind: DeclKind::TypeParam,
                    is_implicit: false,
                    signature: Signature::Type(TypeSig {
                        type_params: Vec::new(),
                        parents: Vec::new(),
                        ctor: Vec::new(),
                    }),
                    from_implicit_class: false,
                    ..d.clone()
                });
            }
        }
    }
    for tp in type_params {
        if table.get(&tp.id).is_none() {
            table.insert(tp);
        }
    }

    let mut referenced: BTreeSet<SymbolId> = BTreeSet::new();
    for d in table.declarations() {
        referenced.extend(d.referenced_symbols().into_iter().cloned());
    }
    for c in fragments.iter().flat_map(|f| &f.callsites) {
        referenced.extend(c.referenced_symbols().into_iter().cloned());
    }
    for id in referenced {
        table.add_external(id);
    }
    Ok(table)
}
