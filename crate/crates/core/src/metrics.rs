//! Call-site ratios, injected-argument complexity, origins, categories and
//! the corpus summary.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::classify::{CallSiteIdiom, Idiom};
use crate::config::Config;
use crate::corpus::{Corpus, LabeledCorpus};
use crate::model::{ArgumentTree, CallSite, ModuleId, PathKind, ProjectId, ProjectMeta, SymbolId};

/// Projects below this many main-code lines are small apps.
pub const SMALL_APP_LOC: u64 = 1000;
/// Histogram buckets `0..=HISTOGRAM_MAX`, plus one overflow bucket.
pub const HISTOGRAM_MAX: usize = 10;
pub const SUMMARY_VERSION: u32 = 1;

labeled_enum! {
    pub enum Origin {
        SameModule => "SAME_MODULE",
        SameProject => "SAME_PROJECT",
        StandardLibrary => "STANDARD_LIBRARY",
        TestFramework => "TEST_FRAMEWORK",
        Dependency => "DEPENDENCY",
        ExternalUnknown => "EXTERNAL_UNKNOWN",
    }
}

labeled_enum! {
    pub enum Category {
        SmallApp => "SMALL_APP",
        LargeApp => "LARGE_APP",
        Library => "LIBRARY",
        Tests => "TESTS",
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MetricsError {
    #[error("{scope}: {implicit} implicit call sites exceed the {total} call sites recorded")]
    RatioOverflow { scope: String, implicit: u64, total: u64 },
}

pub fn implicit_ratio(scope: &str, implicit: u64, total: u64) -> Result<f64, MetricsError> {
    if implicit > total {
        return Err(MetricsError::RatioOverflow {
            scope: scope.to_owned(),
            implicit,
            total,
        });
    }
    Ok(if total == 0 {
        0.0
    } else {
        implicit as f64 / total as f64
    })
}

pub fn injected_count(cs: &CallSite) -> usize {
    cs.implicit_args.iter().map(ArgumentTree::node_count).sum::<usize>() + usize::from(cs.whole_call_synthetic)
}

fn render_tree(t: &ArgumentTree, out: &mut String) {
    match t {
        ArgumentTree::ValueRef(d) => out.push_str(d.simple_name()),
        ArgumentTree::Call { decl, type_args, args } => {
            out.push_str(decl.simple_name());
            if !type_args.is_empty() {
                out.push('[');
                let rendered: Vec<String> = type_args.iter().map(ToString::to_string).collect();
                out.push_str(&rendered.join(","));
                out.push(']');
            }
            out.push('(');
            render_forest(args, out);
            out.push(')');
        }
    }
}

fn render_forest(forest: &[ArgumentTree], out: &mut String) {
    for (i, t) in forest.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        render_tree(t, out);
    }
}

/// The text the compiler inserted at `cs`. A wholly synthetic call renders
/// as the callee name, followed by its injected arguments in parentheses
/// when there are any.
pub fn injected_text(cs: &CallSite) -> String {
    let mut out = String::new();
    if cs.whole_call_synthetic {
        out.push_str(cs.callee.simple_name());
        if !cs.implicit_args.is_empty() {
            out.push('(');
            render_forest(&cs.implicit_args, &mut out);
            out.push(')');
        }
    } else {
        render_forest(&cs.implicit_args, &mut out);
    }
    out
}

/// Where the injected declaration `decl` comes from, seen from `module`.
pub fn origin(decl: &SymbolId, module: &ModuleId, corpus: &Corpus, config: &Config) -> Origin {
    let Some(d) = corpus.table.get(decl) else {
        return Origin::ExternalUnknown;
    };
    if &d.module == module {
        return Origin::SameModule;
    }
    let Some(home) = corpus.modules.get(&d.module) else {
        return Origin::ExternalUnknown;
    };
    if corpus.project_of(module) == Some(&home.project) {
        return Origin::SameProject;
    }
    if home.coordinate() == config.stdlib_coordinate {
        return Origin::StandardLibrary;
    }
    let base = home.artifact_base();
    if config
        .test_frameworks
        .iter()
        .any(|f| base == f || base.strip_prefix(f.as_str()).is_some_and(|rest| rest.starts_with('-')))
    {
        return Origin::TestFramework;
    }
    Origin::Dependency
}

/// Declarations injected at `cs`, in pre-order; a wholly synthetic call
/// injects its callee first.
pub fn injected_decls(cs: &CallSite) -> Vec<&SymbolId> {
    let mut out = Vec::new();
    if cs.whole_call_synthetic {
        out.push(&cs.callee);
    }
    for a in &cs.implicit_args {
        out.extend(a.decls());
    }
    out
}

pub fn project_category(project: &ProjectMeta, main_loc: u64, path_kind: PathKind) -> Category {
    if path_kind == PathKind::Test {
        Category::Tests
    } else if project.in_index {
        Category::Library
    } else if main_loc < SMALL_APP_LOC {
        Category::SmallApp
    } else {
        Category::LargeApp
    }
}

/// Median-of-halves quartiles; for odd sizes the median is left out of both halves.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Quartiles {
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
}

fn median_sorted(v: &[f64]) -> f64 {
    match v.len() {
        0 => 0.0,
        n if n % 2 == 1 => v[n / 2],
        n => (v[n / 2 - 1] + v[n / 2]) / 2.0,
    }
}

pub fn quartiles(values: &[f64]) -> Quartiles {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n <= 1 {
        let x = v.first().copied().unwrap_or(0.0);
        return Quartiles {
            q1: x,
            median: x,
            q3: x,
        };
    }
    let half = n / 2;
    Quartiles {
        q1: median_sorted(&v[..half]),
        median: median_sorted(&v),
        q3: median_sorted(&v[n - half..]),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Histogram {
    /// Counts for values `0..=10`.
    pub buckets: Vec<u64>,
    /// Values above 10.
    pub overflow: u64,
}

impl Default for Histogram {
    fn default() -> Self {
        Histogram {
            buckets: vec![0; HISTOGRAM_MAX + 1],
            overflow: 0,
        }
    }
}

impl Histogram {
    pub fn add(&mut self, value: usize) {
        match self.buckets.get_mut(value) {
            Some(b) => *b += 1,
            None => self.overflow += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.buckets.iter().sum::<u64>() + self.overflow
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Share {
    pub count: u64,
    pub share: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GroupSummary {
    /// Number of per-module ratio samples.
    pub ratio_samples: u64,
    pub call_sites: u64,
    pub implicit_call_sites: u64,
    /// Pooled ratio `implicitCallSites / callSites`.
    pub implicit_ratio: f64,
    pub ratio_quartiles: Quartiles,
    pub injected_histogram: Histogram,
    pub injected_quartiles: Quartiles,
    pub injected_text_length: u64,
    pub implicit_declarations: u64,
    pub implicit_param_histogram: Histogram,
    pub declaration_idioms: BTreeMap<Idiom, u64>,
    pub call_site_idioms: BTreeMap<CallSiteIdiom, u64>,
    pub origins: BTreeMap<Origin, Share>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Summary {
    pub summary_version: u32,
    pub projects: u64,
    pub retained_projects: u64,
    pub analyzed_modules: u64,
    pub flagged_modules: u64,
    pub unresolved_call_sites: u64,
    pub corpus: GroupSummary,
    pub categories: BTreeMap<Category, GroupSummary>,
}

/// Raw observations for one group, reduced into a [`GroupSummary`] at the end.
#[derive(Default)]
struct Acc {
    ratios: Vec<f64>,
    call_sites: u64,
    implicit_sites: u64,
    injected: Vec<usize>,
    text_len: u64,
    implicit_params: Vec<usize>,
    implicit_decls: u64,
    decl_idioms: BTreeMap<Idiom, u64>,
    site_idioms: BTreeMap<CallSiteIdiom, u64>,
    origins: BTreeMap<Origin, u64>,
}

impl Acc {
    fn finish(self) -> GroupSummary {
        let mut injected_histogram = Histogram::default();
        for &n in &self.injected {
            injected_histogram.add(n);
        }
        let mut implicit_param_histogram = Histogram::default();
        for &n in &self.implicit_params {
            implicit_param_histogram.add(n);
        }
        let injected: Vec<f64> = self.injected.iter().map(|&n| n as f64).collect();
        let origin_total: u64 = self.origins.values().sum();
        GroupSummary {
            ratio_samples: self.ratios.len() as u64,
            call_sites: self.call_sites,
            implicit_call_sites: self.implicit_sites,
            implicit_ratio: if self.call_sites == 0 {
                0.0
            } else {
                self.implicit_sites as f64 / self.call_sites as f64
            },
            ratio_quartiles: quartiles(&self.ratios),
            injected_histogram,
            injected_quartiles: quartiles(&injected),
            injected_text_length: self.text_len,
            implicit_declarations: self.implicit_decls,
            implicit_param_histogram,
            declaration_idioms: Idiom::ALL
                .iter()
                .map(|i| (*i, self.decl_idioms.get(i).copied().unwrap_or(0)))
                .collect(),
            call_site_idioms: CallSiteIdiom::ALL
                .iter()
                .map(|i| (*i, self.site_idioms.get(i).copied().unwrap_or(0)))
                .collect(),
            origins: Origin::ALL
                .iter()
                .map(|o| {
                    let count = self.origins.get(o).copied().unwrap_or(0);
                    let share = if origin_total == 0 {
                        0.0
                    } else {
                        count as f64 / origin_total as f64
                    };
                    (*o, Share { count, share })
                })
                .collect(),
        }
    }
}

/// Main-code lines per project, over analyzed modules.
pub fn project_main_loc(labeled: &LabeledCorpus) -> BTreeMap<ProjectId, u64> {
    let mut out: BTreeMap<ProjectId, u64> = BTreeMap::new();
    for m in &labeled.analyzed {
        if let Some(meta) = labeled.corpus.modules.get(m) {
            *out.entry(meta.project.clone()).or_default() += meta.loc_main;
        }
    }
    out
}

/// Category of code at `path_kind` in `module`, if the module is analyzed.
pub fn module_category(
    labeled: &LabeledCorpus,
    locs: &BTreeMap<ProjectId, u64>,
    module: &ModuleId,
    path_kind: PathKind,
) -> Option<Category> {
    let meta = labeled.corpus.modules.get(module)?;
    let project = labeled.corpus.projects.get(&meta.project)?;
    Some(project_category(
        project,
        locs.get(&meta.project).copied().unwrap_or(0),
        path_kind,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioSample {
    pub module: ModuleId,
    pub category: Category,
    pub implicit: u64,
    pub total: u64,
    pub ratio: f64,
}

/// One implicit-ratio sample per analyzed module and code kind.
///
/// A module contributes a sample to its project's category from its main
/// code. When the module records how many call sites live in test code, its
/// test code contributes a second sample to `TESTS`; otherwise all of its
/// sites count toward the main sample. Sites with unresolved callees still
/// count as implicit.
pub fn ratio_samples(labeled: &LabeledCorpus) -> Result<Vec<RatioSample>, MetricsError> {
    let corpus = &labeled.corpus;
    let locs = project_main_loc(labeled);
    let mut implicit_by_module: BTreeMap<&ModuleId, (u64, u64)> = BTreeMap::new();
    for cs in corpus
        .callsites
        .iter()
        .filter(|cs| labeled.analyzed.contains(&cs.module))
    {
        let tally = implicit_by_module.entry(&cs.module).or_default();
        if cs.location.path_kind == PathKind::Test {
            tally.1 += 1;
        } else {
            tally.0 += 1;
        }
    }
    let mut out = Vec::new();
    for m in &labeled.analyzed {
        let Some(meta) = corpus.modules.get(m) else { continue };
        let (main_implicit, test_implicit) = implicit_by_module.get(m).copied().unwrap_or_default();
        let scope = format!("module {m}");
        let mut parts = Vec::new();
        if meta.test_call_sites > 0 {
            parts.push((
                PathKind::Main,
                main_implicit,
                meta.total_call_sites.saturating_sub(meta.test_call_sites),
            ));
            parts.push((PathKind::Test, test_implicit, meta.test_call_sites));
        } else {
            parts.push((PathKind::Main, main_implicit + test_implicit, meta.total_call_sites));
        }
        for (kind, implicit, total) in parts {
            let ratio = implicit_ratio(&scope, implicit, total)?;
            if let Some(category) = module_category(labeled, &locs, m, kind) {
                out.push(RatioSample {
                    module: m.clone(),
                    category,
                    implicit,
                    total,
                    ratio,
                });
            }
        }
    }
    Ok(out)
}

/// Per-category and corpus-wide aggregates over the analyzed modules.
pub fn summarize(labeled: &LabeledCorpus) -> Result<Summary, MetricsError> {
    let corpus = &labeled.corpus;
    let locs = project_main_loc(labeled);
    let mut groups: BTreeMap<Category, Acc> = Category::ALL.iter().map(|c| (*c, Acc::default())).collect();
    let mut all = Acc::default();

    for (cs, idiom) in labeled.labeled_callsites() {
        let Some(cat) = module_category(labeled, &locs, &cs.module, cs.location.path_kind) else {
            continue;
        };
        let n = injected_count(cs);
        let len = injected_text(cs).chars().count() as u64;
        let origins: Vec<Origin> = injected_decls(cs)
            .into_iter()
            .map(|d| origin(d, &cs.module, corpus, &labeled.config))
            .collect();
        for acc in [groups.get_mut(&cat).expect("all categories present"), &mut all] {
            acc.injected.push(n);
            acc.text_len += len;
            *acc.site_idioms.entry(idiom).or_default() += 1;
            for o in &origins {
                *acc.origins.entry(*o).or_default() += 1;
            }
        }
    }

    for s in ratio_samples(labeled)? {
        for acc in [groups.get_mut(&s.category).expect("all categories present"), &mut all] {
            acc.ratios.push(s.ratio);
            acc.call_sites += s.total;
            acc.implicit_sites += s.implicit;
        }
    }

    for d in corpus
        .table
        .declarations()
        .filter(|d| labeled.analyzed.contains(&d.module))
    {
        let Some(idioms) = labeled.classification.decl_idioms.get(&d.id) else {
            continue;
        };
        let Some(cat) = module_category(labeled, &locs, &d.module, d.location.path_kind) else {
            continue;
        };
        let params = d.implicit_params().len();
        for acc in [groups.get_mut(&cat).expect("all categories present"), &mut all] {
            if d.is_implicit {
                acc.implicit_decls += 1;
            }
            if params > 0 {
                acc.implicit_params.push(params);
            }
            for i in idioms {
                *acc.decl_idioms.entry(*i).or_default() += 1;
            }
        }
    }

    let retained: BTreeSet<&ProjectId> = labeled
        .verdicts
        .iter()
        .filter(|v| v.retained)
        .map(|v| &v.project)
        .collect();
    Ok(Summary {
        summary_version: SUMMARY_VERSION,
        projects: corpus.projects.len() as u64,
        retained_projects: retained.len() as u64,
        analyzed_modules: labeled.analyzed.len() as u64,
        flagged_modules: corpus.flagged.len() as u64,
        unresolved_call_sites: labeled.classification.unresolved_callees.len() as u64,
        corpus: all.finish(),
        categories: groups.into_iter().map(|(c, a)| (c, a.finish())).collect(),
    })
}
