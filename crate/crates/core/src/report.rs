//! CSV datasets and the data behind the plots.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::classify::{enclosing_type_params, is_constraint_param, is_type_class_param, CallSiteIdiom, Idiom};
use crate::corpus::LabeledCorpus;
use crate::error::{Error, Result};
use crate::metrics::{self, Category, Histogram, RatioSample};
use crate::model::ProjectId;

labeled_enum! {
    pub enum CsvKind {
        Declarations => "DECLARATIONS",
        CallSites => "CALLSITES",
        Conversions => "CONVERSIONS",
        Parameters => "PARAMETERS",
    }
}

impl CsvKind {
    pub fn file_name(self) -> &'static str {
        match self {
            CsvKind::Declarations => "declarations.csv",
            CsvKind::CallSites => "callsites.csv",
            CsvKind::Conversions => "conversions.csv",
            CsvKind::Parameters => "parameters.csv",
        }
    }

    pub fn header(self) -> &'static [&'static str] {
        match self {
            CsvKind::Declarations => &[
                "project",
                "module",
                "id",
                "kind",
                "visibility",
                "fromImplicitClass",
                "idioms",
                "path",
                "line",
            ],
            CsvKind::CallSites => &[
                "project",
                "module",
                "callee",
                "idiom",
                "injectedCount",
                "injectedLen",
                "origin",
                "path",
                "line",
            ],
            CsvKind::Conversions => &[
                "project",
                "module",
                "id",
                "kind",
                "conditional",
                "unrelated",
                "bidirPartner",
                "sourceHead",
                "targetHead",
            ],
            CsvKind::Parameters => &[
                "project",
                "module",
                "decl",
                "paramName",
                "typeHead",
                "isTypeClass",
                "isConstraint",
            ],
        }
    }
}

fn project_of(labeled: &LabeledCorpus, module: &crate::model::ModuleId) -> String {
    labeled
        .corpus
        .project_of(module)
        .map(ToString::to_string)
        .unwrap_or_default()
}

/// Data rows of `kind`, sorted by their primary key.
pub fn csv_rows(labeled: &LabeledCorpus, kind: CsvKind) -> Vec<Vec<String>> {
    let corpus = &labeled.corpus;
    let class = &labeled.classification;
    let decls = || {
        class
            .decl_idioms
            .iter()
            .filter_map(|(id, idioms)| corpus.table.get(id).map(|d| (d, idioms)))
    };
    let mut keyed: Vec<(Vec<String>, Vec<String>)> = match kind {
        CsvKind::Declarations => decls()
            .map(|(d, idioms)| {
                let project = project_of(labeled, &d.module);
                let labels: Vec<&str> = idioms.iter().map(|i| i.as_str()).collect();
                let row = vec![
                    project.clone(),
                    d.module.to_string(),
                    d.id.to_string(),
                    d.kind.to_string(),
                    d.visibility.to_string(),
                    d.from_implicit_class.to_string(),
                    labels.join(";"),
                    d.location.path.clone(),
                    d.location.range.start_line.to_string(),
                ];
                (vec![project, d.module.to_string(), d.id.to_string()], row)
            })
            .collect(),
        CsvKind::CallSites => corpus
            .callsites
            .iter()
            .zip(&class.callsite_idioms)
            .filter(|(cs, _)| labeled.analyzed.contains(&cs.module))
            .map(|(cs, idiom)| {
                let project = project_of(labeled, &cs.module);
                let origin = metrics::injected_decls(cs)
                    .first()
                    .map(|d| metrics::origin(d, &cs.module, corpus, &labeled.config).to_string())
                    .unwrap_or_default();
                let r = cs.location.range;
                let key = vec![
                    project.clone(),
                    cs.module.to_string(),
                    cs.location.path.clone(),
                    format!(
                        "{:010}:{:010}:{:010}:{:010}",
                        r.start_line, r.start_col, r.end_line, r.end_col
                    ),
                    cs.callee.to_string(),
                ];
                let row = vec![
                    project,
                    cs.module.to_string(),
                    cs.callee.to_string(),
                    idiom.map(CallSiteIdiom::as_str).unwrap_or("").to_owned(),
                    metrics::injected_count(cs).to_string(),
                    metrics::injected_text(cs).chars().count().to_string(),
                    origin,
                    cs.location.path.clone(),
                    r.start_line.to_string(),
                ];
                (key, row)
            })
            .collect(),
        CsvKind::Conversions => class
            .conversions
            .iter()
            .filter_map(|(id, info)| corpus.table.get(id).map(|d| (d, info)))
            .map(|(d, info)| {
                let project = project_of(labeled, &d.module);
                let partners: Vec<String> = info.bidir_partners.iter().map(ToString::to_string).collect();
                let row = vec![
                    project.clone(),
                    d.module.to_string(),
                    d.id.to_string(),
                    info.kind.to_string(),
                    info.conversion.conditional.to_string(),
                    info.unrelated.to_string(),
                    partners.join(";"),
                    info.conversion.source.head.to_string(),
                    info.conversion.target.head.to_string(),
                ];
                (vec![project, d.module.to_string(), d.id.to_string()], row)
            })
            .collect(),
        CsvKind::Parameters => decls()
            .flat_map(|(d, _)| {
                let project = project_of(labeled, &d.module);
                let enclosing = enclosing_type_params(d, &corpus.table);
                d.implicit_params()
                    .iter()
                    .enumerate()
                    .map(|(i, p)| {
                        let row = vec![
                            project.clone(),
                            d.module.to_string(),
                            d.id.to_string(),
                            p.name.clone(),
                            p.tpe.head.to_string(),
                            is_type_class_param(p, &enclosing).to_string(),
                            is_constraint_param(p, &enclosing, &labeled.config).to_string(),
                        ];
                        let key = vec![
                            project.clone(),
                            d.module.to_string(),
                            d.id.to_string(),
                            format!("{i:06}"),
                        ];
                        (key, row)
                    })
                    .collect::<Vec<_>>()
            })
            .collect(),
    };
    keyed.sort();
    keyed.into_iter().map(|(_, row)| row).collect()
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    let file = fs::File::create(path).map_err(|e| Error::io(format!("creating {}", path.display()), e))?;
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(file))
}

fn write_table(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()
        .map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

pub fn export_csv(labeled: &LabeledCorpus, kind: CsvKind, out_dir: &Path) -> Result<PathBuf> {
    let path = out_dir.join(kind.file_name());
    write_table(&path, kind.header(), &csv_rows(labeled, kind))?;
    Ok(path)
}

/// What a top-N table counts per project.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum CountBasis {
    Declarations,
    CallSites,
}

impl CountBasis {
    pub fn as_str(self) -> &'static str {
        match self {
            CountBasis::Declarations => "declarations",
            CountBasis::CallSites => "callSites",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TopRow {
    pub project: ProjectId,
    pub stars: u64,
    pub loc: u64,
    pub count: u64,
}

/// Retained projects ranked by how often `idiom` occurs in them: count
/// descending, then project id ascending. Projects with no analyzed module
/// are not listed.
pub fn top_projects(labeled: &LabeledCorpus, idiom: Idiom, basis: CountBasis, n: usize) -> Vec<TopRow> {
    let corpus = &labeled.corpus;
    let locs = metrics::project_main_loc(labeled);
    let mut counts: BTreeMap<&ProjectId, u64> = locs.keys().map(|p| (p, 0)).collect();
    match basis {
        CountBasis::Declarations => {
            for (id, idioms) in &labeled.classification.decl_idioms {
                if !idioms.contains(&idiom) {
                    continue;
                }
                if let Some(p) = corpus.table.get(id).and_then(|d| corpus.project_of(&d.module)) {
                    *counts.entry(p).or_default() += 1;
                }
            }
        }
        CountBasis::CallSites => {
            for (cs, i) in labeled.labeled_callsites() {
                if Idiom::from(i) != idiom {
                    continue;
                }
                if let Some(p) = corpus.project_of(&cs.module) {
                    *counts.entry(p).or_default() += 1;
                }
            }
        }
    }
    let mut rows: Vec<TopRow> = counts
        .into_iter()
        .map(|(p, count)| TopRow {
            project: p.clone(),
            stars: corpus.projects.get(p).map_or(0, |m| m.stars),
            loc: locs.get(p).copied().unwrap_or(0),
            count,
        })
        .collect();
    rows.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.project.cmp(&b.project)));
    rows.truncate(n);
    rows
}

/// Every idiom's declaration table, and the call-site table for the three
/// call-site idioms, in one file.
pub fn export_top_projects(labeled: &LabeledCorpus, n: usize, out_dir: &Path) -> Result<PathBuf> {
    let path = out_dir.join("top_projects.csv");
    let mut rows = Vec::new();
    for &idiom in Idiom::ALL {
        let mut bases = vec![CountBasis::Declarations];
        if matches!(idiom, Idiom::TypeClass | Idiom::TypeProof | Idiom::Context) {
            bases.push(CountBasis::CallSites);
        }
        for basis in bases {
            for (rank, r) in top_projects(labeled, idiom, basis, n).into_iter().enumerate() {
                rows.push(vec![
                    idiom.to_string(),
                    basis.as_str().to_owned(),
                    (rank + 1).to_string(),
                    r.project.to_string(),
                    r.stars.to_string(),
                    r.loc.to_string(),
                    r.count.to_string(),
                ]);
            }
        }
    }
    write_table(
        &path,
        &["idiom", "basis", "rank", "project", "stars", "loc", "count"],
        &rows,
    )?;
    Ok(path)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PlotData {
    pub summary_version: u32,
    /// Sorted per-module implicit call-site ratios, per category.
    pub implicit_ratios: BTreeMap<Category, Vec<f64>>,
    pub injected_histograms: BTreeMap<Category, Histogram>,
    pub implicit_param_histograms: BTreeMap<Category, Histogram>,
    pub origins: BTreeMap<metrics::Origin, u64>,
}

pub fn plot_data(labeled: &LabeledCorpus) -> Result<PlotData> {
    let summary = metrics::summarize(labeled)?;
    let mut implicit_ratios: BTreeMap<Category, Vec<f64>> = Category::ALL.iter().map(|c| (*c, Vec::new())).collect();
    for RatioSample { category, ratio, .. } in metrics::ratio_samples(labeled)? {
        implicit_ratios.entry(category).or_default().push(ratio);
    }
    for v in implicit_ratios.values_mut() {
        v.sort_by(f64::total_cmp);
    }
    Ok(PlotData {
        summary_version: summary.summary_version,
        implicit_ratios,
        injected_histograms: summary
            .categories
            .iter()
            .map(|(c, g)| (*c, g.injected_histogram.clone()))
            .collect(),
        implicit_param_histograms: summary
            .categories
            .iter()
            .map(|(c, g)| (*c, g.implicit_param_histogram.clone()))
            .collect(),
        origins: summary.corpus.origins.iter().map(|(o, s)| (*o, s.count)).collect(),
    })
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

/// Writes every dataset plus `plot_data.json` into `out_dir`.
pub fn write_report(labeled: &LabeledCorpus, out_dir: &Path, top: usize) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(format!("creating {}", out_dir.display()), e))?;
    let mut written = Vec::new();
    for &kind in CsvKind::ALL {
        written.push(export_csv(labeled, kind, out_dir)?);
    }
    written.push(export_top_projects(labeled, top, out_dir)?);
    let plot = out_dir.join("plot_data.json");
    write_json(&plot_data(labeled)?, &plot)?;
    written.push(plot);
    Ok(written)
}
