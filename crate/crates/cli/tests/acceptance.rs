//! Acceptance suite: prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

#[path = "../../core/tests/common/golden.rs"]
mod golden;

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, File};
use std::io::BufReader;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use chrono::NaiveDate;
use implicitus::classify::{enclosing_type_params, is_type_class_param, CallSiteIdiom, ConversionKind};
use implicitus::dedup::{retain_project, RetentionRule};
use implicitus::ingest::{link_symbols, normalize_implicit_classes, parse_facts, ParsedFacts};
use implicitus::metrics::{injected_count, summarize};
use implicitus::model::{
    conforms_to, ArgumentTree, CallSite, Location, PathKind, ProjectMeta, SymbolId, TextRange, TypeRef,
};
use implicitus::{Config, Corpus, LabeledCorpus};
use proptest::prelude::*;
use proptest::test_runner::{Config as ProptestConfig, RngAlgorithm, TestRng, TestRunner};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

type Outcome = Result<String, String>;
type Suite<'a> = (&'static str, Box<dyn Fn() -> Result<(), String> + 'a>);
type Criterion = (u8, &'static str, fn() -> Outcome);

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures")
}

fn read_facts(name: &str) -> ParsedFacts {
    let path = fixtures().join(name);
    parse_facts(BufReader::new(File::open(&path).expect("fixture exists"))).expect("fixture parses")
}

fn corpus_with_stdlib(names: &[&str]) -> Corpus {
    let mut fragments = vec![read_facts("stdlib.jsonl")];
    fragments.extend(names.iter().map(|n| read_facts(n)));
    Corpus::build(fragments, true).expect("corpus builds")
}

fn check(cond: bool, what: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what.into())
    }
}

fn within(limit: Duration, start: Instant) -> Result<Duration, String> {
    let elapsed = start.elapsed();
    check(elapsed < limit, format!("took {elapsed:?}, limit {limit:?}"))?;
    Ok(elapsed)
}

// ---- 1: type-class match rules ---------------------------------------------

fn match_rules() -> Outcome {
    let start = Instant::now();
    let mut facts = read_facts("match_rules.jsonl");
    normalize_implicit_classes(&mut facts).map_err(|e| e.to_string())?;
    let table = link_symbols(&[facts]).map_err(|e| e.to_string())?;
    let cases = [
        ("f1().", "def f(x: Int)(implicit y: A[Int])", false),
        ("f2().", "def f[T](x: T)(implicit y: T)", false),
        ("f3().", "def f[T](x: T)(implicit y: A[T])", true),
        ("C().", "implicit class C[T](x: T)(implicit y: A[T])", true),
    ];
    for (id, text, expected) in cases {
        let decl = table.get(&SymbolId::new(id)).ok_or(format!("{id} missing"))?;
        let got = is_type_class_param(&decl.implicit_params()[0], &enclosing_type_params(decl, &table));
        check(got == expected, format!("{text}: expected {expected}, got {got}"))?;
    }
    let elapsed = within(Duration::from_secs(1), start)?;
    Ok(format!("2 non-matching and 2 matching signatures exact in {elapsed:?}"))
}

// ---- 2-4: worked examples --------------------------------------------------

fn tuple_example() -> Outcome {
    let corpus = corpus_with_stdlib(&["tuple.jsonl"]);
    check(
        corpus.callsites.len() == 1,
        format!("{} call sites", corpus.callsites.len()),
    )?;
    let n = injected_count(&corpus.callsites[0]);
    check(n == 4, format!("injected_count = {n}"))?;
    Ok("injected_count = 4".into())
}

fn future_example() -> Outcome {
    let corpus = corpus_with_stdlib(&["future.jsonl"]);
    check(
        corpus.callsites.len() == 1,
        format!("{} implicit call sites", corpus.callsites.len()),
    )?;
    let cs = &corpus.callsites[0];
    check(cs.callee.as_str() == "Future.apply()", format!("callee {}", cs.callee))?;
    check(
        cs.type_args == [TypeRef::simple("scala/Int#")],
        format!("type args {:?}", cs.type_args),
    )?;
    check(
        cs.implicit_args == [ArgumentTree::ValueRef(SymbolId::new("EC.global"))],
        format!("implicit args {:?}", cs.implicit_args),
    )?;
    Ok("one site Future.apply()[Int] with ValueRef EC.global".into())
}

fn deck_example() -> Outcome {
    let corpus = corpus_with_stdlib(&["deck.jsonl"]);
    let deck = corpus.table.get(&SymbolId::new("cards/deck.")).ok_or("deck missing")?;
    let conv = implicitus::classify::conversion_of(deck, &corpus.table, &Config::default())
        .map_err(|e| e.to_string())?
        .ok_or("deck is not a conversion")?;
    check(conv.via_function_value, "not function-valued")?;
    check(
        conv.source == TypeRef::simple("scala/Int#") && conv.target == TypeRef::simple("cards/Card#"),
        format!("{} => {}", conv.source, conv.target),
    )?;
    Ok("implicit val deck: List[Card] is a function-valued Int => Card".into())
}

// ---- 5: golden idiom corpus ------------------------------------------------

fn golden_idioms() -> Outcome {
    let start = Instant::now();
    let score = golden::score(&fixtures());
    let elapsed = within(Duration::from_secs(5), start)?;
    check(score.modules >= 12, format!("{} modules", score.modules))?;
    let missing: Vec<_> = golden::all_idioms()
        .difference(&score.idioms_covered)
        .cloned()
        .collect();
    check(missing.is_empty(), format!("idioms not covered: {missing:?}"))?;
    check(
        score.perfect(),
        format!(
            "precision {:.3} recall {:.3}; false positives {:?}; false negatives {:?}; unmatched {:?}",
            score.precision(),
            score.recall(),
            score.false_positives,
            score.false_negatives,
            score.unmatched_subjects
        ),
    )?;
    Ok(format!(
        "{} modules, 8/8 idioms, precision {:.0}% recall {:.0}% ({} labels) in {elapsed:?}",
        score.modules,
        score.precision() * 100.0,
        score.recall() * 100.0,
        score.true_positives
    ))
}

// ---- 6: retention truth table ----------------------------------------------

fn retention_truth_table() -> Outcome {
    let first = NaiveDate::from_ymd_opt(2019, 3, 1).expect("date");
    let mut points = 0;
    for commits in [1u64, 2] {
        for days in [60i64, 61] {
            for dup in [0.7499, 0.75, 0.7999, 0.80] {
                for stars in [5u64, 6, 500, 501] {
                    for in_index in [true, false] {
                        let meta = ProjectMeta {
                            id: "grid".into(),
                            stars,
                            commits,
                            first_commit: first,
                            last_commit: first + chrono::Days::new(days as u64),
                            dup_ratio: dup,
                            in_index,
                        };
                        let mut expected = Vec::new();
                        if commits <= 1 {
                            expected.push(RetentionRule::Commits);
                        }
                        if days < 61 {
                            expected.push(RetentionRule::Activity);
                        }
                        if !(in_index || dup < 0.75 || stars > 5) {
                            expected.push(RetentionRule::Dup75);
                        }
                        if !(in_index || dup < 0.80 || stars > 500) {
                            expected.push(RetentionRule::Dup80);
                        }
                        let v = retain_project(&meta).map_err(|e| e.to_string())?;
                        check(
                            v.failed_rules == expected && v.retained == expected.is_empty(),
                            format!("{meta:?}: got {:?}, oracle {expected:?}", v.failed_rules),
                        )?;
                        points += 1;
                    }
                }
            }
        }
    }
    check(points == 128, format!("{points} grid points"))?;
    Ok("128/128 grid points match the rule oracle".into())
}

// ---- 7: property suites ----------------------------------------------------

const CASES: u32 = 1000;

fn runner(seed: u8) -> TestRunner {
    let config = ProptestConfig {
        cases: CASES,
        failure_persistence: None,
        ..ProptestConfig::default()
    };
    TestRunner::new_with_rng(config, TestRng::from_seed(RngAlgorithm::ChaCha, &[seed; 32]))
}

/// Implicit parameter shapes of generated methods with type parameter `T`.
#[derive(Debug, Clone, Copy)]
enum ParamShape {
    ClassOfT,
    ClassOfInt,
    Context,
    EqualsInt,
    SubtypeOfSelf,
    FunctionTT,
    FunctionIntT,
    BareT,
}

const SHAPES: [ParamShape; 8] = [
    ParamShape::ClassOfT,
    ParamShape::ClassOfInt,
    ParamShape::Context,
    ParamShape::EqualsInt,
    ParamShape::SubtypeOfSelf,
    ParamShape::FunctionTT,
    ParamShape::FunctionIntT,
    ParamShape::BareT,
];

impl ParamShape {
    fn tpe(self, tp: &str) -> Value {
        let t = json!({"head": tp});
        let int = json!({"head": "scala/Int#"});
        match self {
            ParamShape::ClassOfT => json!({"head": "prop/TC#", "args": [t]}),
            ParamShape::ClassOfInt => json!({"head": "prop/TC#", "args": [int]}),
            ParamShape::Context => json!({"head": "prop/Ctx#"}),
            ParamShape::EqualsInt => json!({"head": "scala/Predef.`=:=`#", "args": [t, int]}),
            ParamShape::SubtypeOfSelf => json!({"head": "scala/Predef.`<:<`#", "args": [t, t]}),
            ParamShape::FunctionTT => json!({"head": "scala/Function1#", "args": [t, t]}),
            ParamShape::FunctionIntT => json!({"head": "scala/Function1#", "args": [int, t]}),
            ParamShape::BareT => t,
        }
    }

    fn is_proof(self) -> bool {
        matches!(
            self,
            ParamShape::EqualsInt | ParamShape::SubtypeOfSelf | ParamShape::FunctionTT
        )
    }

    fn is_type_class(self) -> bool {
        matches!(
            self,
            ParamShape::ClassOfT
                | ParamShape::EqualsInt
                | ParamShape::SubtypeOfSelf
                | ParamShape::FunctionTT
                | ParamShape::FunctionIntT
        )
    }
}

#[derive(Debug, Clone)]
struct TypeSpec {
    trait_like: bool,
    module: usize,
    file: usize,
    parents: Vec<usize>,
}

#[derive(Debug, Clone)]
struct ConvSpec {
    module: usize,
    file: usize,
    /// Type index, or `None` for `Int`.
    source: Option<usize>,
    target: Option<usize>,
    public: bool,
    conditional: bool,
}

#[derive(Debug, Clone)]
struct ClassSpec {
    module: usize,
    file: usize,
    with_type_class: bool,
}

#[derive(Debug, Clone)]
struct MethodSpec {
    module: usize,
    file: usize,
    params: Vec<ParamShape>,
}

#[derive(Debug, Clone)]
struct SiteSpec {
    module: usize,
    /// Index into the methods; out of range means an undeclared callee.
    callee: usize,
    args: usize,
    synthetic: bool,
    test: bool,
    line: u32,
}

#[derive(Debug, Clone)]
struct CorpusSpec {
    modules: usize,
    types: Vec<TypeSpec>,
    convs: Vec<ConvSpec>,
    classes: Vec<ClassSpec>,
    methods: Vec<MethodSpec>,
    sites: Vec<SiteSpec>,
}

const MAX_MODULES: usize = 3;

fn type_specs() -> impl Strategy<Value = Vec<TypeSpec>> {
    prop::collection::vec((any::<bool>(), 0..MAX_MODULES, 0..2usize, any::<u16>()), 1..7).prop_map(|raw| {
        raw.into_iter()
            .enumerate()
            .map(|(i, (trait_like, module, file, mask))| TypeSpec {
                trait_like,
                module,
                file,
                parents: (0..i).filter(|j| mask & (1 << j) != 0).collect(),
            })
            .collect()
    })
}

fn corpus_spec() -> impl Strategy<Value = CorpusSpec> {
    (1..=MAX_MODULES, type_specs()).prop_flat_map(|(modules, types)| {
        let n = types.len();
        let target = prop::option::weighted(0.8, 0..n);
        let source = prop::option::weighted(0.5, 0..n);
        let conv = (0..modules, 0..2usize, source, target, any::<bool>(), any::<bool>()).prop_map(
            |(module, file, source, target, public, conditional)| ConvSpec {
                module,
                file,
                source,
                target,
                public,
                conditional,
            },
        );
        let class = (0..modules, 0..2usize, any::<bool>()).prop_map(|(module, file, with_type_class)| ClassSpec {
            module,
            file,
            with_type_class,
        });
        let method = (
            0..modules,
            0..2usize,
            prop::collection::vec(prop::sample::select(SHAPES.to_vec()), 1..4),
        )
            .prop_map(|(module, file, params)| MethodSpec { module, file, params });
        let methods = prop::collection::vec(method, 1..5);
        (
            Just(modules),
            Just(types),
            prop::collection::vec(conv, 0..5),
            prop::collection::vec(class, 0..3),
            methods,
        )
            .prop_flat_map(move |(modules, types, convs, classes, methods)| {
                let m = methods.len();
                let site = (0..modules, 0..m + 1, 0..4usize, any::<bool>(), any::<bool>(), 1..40u32).prop_map(
                    |(module, callee, args, synthetic, test, line)| SiteSpec {
                        module,
                        callee,
                        args: if synthetic { args } else { args.max(1) },
                        synthetic,
                        test,
                        line,
                    },
                );
                prop::collection::vec(site, 0..12).prop_map(move |sites| CorpusSpec {
                    modules,
                    types: types.clone(),
                    convs: convs.clone(),
                    classes: classes.clone(),
                    methods: methods.clone(),
                    sites,
                })
            })
    })
}

fn module_id(m: usize) -> String {
    format!("prop/p:m{m}")
}

fn src_path(file: usize) -> String {
    format!("src/main/scala/prop/F{file}.scala")
}

fn type_id(i: usize) -> String {
    format!("prop/T{i}#")
}

fn type_ref(i: Option<usize>) -> Value {
    match i {
        Some(i) => json!({"head": type_id(i)}),
        None => json!({"head": "scala/Int#"}),
    }
}

#[allow(clippy::too_many_arguments)]
fn declaration(
    id: &str,
    module: usize,
    kind: &str,
    file: usize,
    line: u32,
    implicit: bool,
    public: bool,
    sig: Value,
) -> Value {
    json!({"kind": "declaration", "id": id, "module": module_id(module), "declKind": kind, "language": "SCALA",
           "implicit": implicit, "visibility": if public { "PUBLIC" } else { "PRIVATE" }, "scope": "TOP_LEVEL",
           "path": src_path(file), "range": [line, 0, line, 10], "fromImplicitClass": false, "signature": sig})
}

fn plist(implicit: bool, params: Vec<(String, Value)>) -> Value {
    let params: Vec<Value> = params.into_iter().map(|(n, t)| json!({"name": n, "tpe": t})).collect();
    json!({"implicit": implicit, "params": params})
}

/// JSONL records for a generated corpus, in a fixed order.
fn corpus_records(spec: &CorpusSpec) -> Vec<Value> {
    let mut out = vec![json!({"kind": "project", "id": "prop/p", "stars": 50, "commits": 20,
        "firstCommit": "2018-01-01", "lastCommit": "2019-01-01", "dupRatio": 0.0, "inIndex": false})];
    for m in 0..spec.modules {
        out.push(
            json!({"kind": "module", "id": module_id(m), "project": "prop/p", "group": "org.prop",
            "artifact": format!("m{m}_2.13"), "version": "1.0", "platform": "JVM", "scalaVersion": "2.13.6",
            "locMain": 500, "locTest": 100, "totalCallSites": 1000}),
        );
    }
    let type_sig = |parents: Vec<Value>| json!({"sig": "type", "typeParams": [], "parents": parents});
    out.push(declaration(
        "prop/TC#",
        0,
        "TRAIT",
        0,
        1,
        false,
        true,
        json!({"sig": "type", "typeParams": ["prop/TC#[X]"], "parents": []}),
    ));
    out.push(declaration(
        "prop/Ctx#",
        0,
        "CLASS",
        0,
        2,
        false,
        true,
        type_sig(vec![]),
    ));
    out.push(declaration(
        "prop/inst.",
        0,
        "VAL",
        0,
        3,
        true,
        true,
        json!({"sig": "value", "tpe": {"head": "prop/TC#", "args": [{"head": "scala/Int#"}]}}),
    ));
    for (i, t) in spec.types.iter().enumerate() {
        let parents = t.parents.iter().map(|p| json!({"head": type_id(*p)})).collect();
        let kind = if t.trait_like { "TRAIT" } else { "CLASS" };
        out.push(declaration(
            &type_id(i),
            t.module.min(spec.modules - 1),
            kind,
            t.file,
            10 + i as u32,
            false,
            true,
            type_sig(parents),
        ));
    }
    for (i, c) in spec.convs.iter().enumerate() {
        let mut lists = vec![plist(false, vec![("x".into(), type_ref(c.source))])];
        if c.conditional {
            lists.push(plist(true, vec![("c".into(), json!({"head": "prop/Ctx#"}))]));
        }
        let sig = json!({"sig": "method", "typeParams": [], "paramLists": lists, "ret": type_ref(c.target)});
        out.push(declaration(
            &format!("prop/conv{i}()."),
            c.module,
            "DEF",
            c.file,
            30 + i as u32,
            true,
            c.public,
            sig,
        ));
    }
    for (i, c) in spec.classes.iter().enumerate() {
        let id = format!("prop/Wrap{i}#");
        let tp = format!("{id}[A]");
        let mut ctor = vec![plist(false, vec![("x".into(), json!({"head": tp}))])];
        if c.with_type_class {
            ctor.push(plist(
                true,
                vec![("t".into(), json!({"head": "prop/TC#", "args": [{"head": tp}]}))],
            ));
        }
        let sig = json!({"sig": "type", "typeParams": [tp], "parents": [], "ctor": ctor});
        out.push(declaration(
            &id,
            c.module,
            "CLASS",
            c.file,
            50 + i as u32,
            true,
            true,
            sig,
        ));
    }
    for (i, m) in spec.methods.iter().enumerate() {
        let id = format!("prop/f{i}().");
        let tp = format!("{id}[T]");
        let implicit = m
            .params
            .iter()
            .enumerate()
            .map(|(k, s)| (format!("p{k}"), s.tpe(&tp)))
            .collect();
        let sig = json!({"sig": "method", "typeParams": [tp], "paramLists": [
            plist(false, vec![("x".into(), json!({"head": tp}))]), plist(true, implicit)],
            "ret": {"head": "scala/Unit#"}});
        out.push(declaration(
            &id,
            m.module,
            "DEF",
            m.file,
            70 + i as u32,
            false,
            true,
            sig,
        ));
    }
    for s in &spec.sites {
        let callee = if s.callee < spec.methods.len() {
            format!("prop/f{}().", s.callee)
        } else {
            "prop/gone().".into()
        };
        let path = if s.test {
            "src/test/scala/prop/Spec.scala"
        } else {
            "src/main/scala/prop/Use.scala"
        };
        let args: Vec<Value> = (0..s.args).map(|_| json!({"ref": "prop/inst."})).collect();
        out.push(
            json!({"kind": "callsite", "module": module_id(s.module), "callee": callee, "path": path,
            "range": [s.line, 2, s.line, 20], "typeArgs": [], "implicitArgs": args, "syntheticCall": s.synthetic}),
        );
    }
    out
}

fn parse_records<'a>(records: impl IntoIterator<Item = &'a Value>) -> ParsedFacts {
    let text: String = records.into_iter().map(|r| format!("{r}\n")).collect();
    parse_facts(text.as_bytes()).expect("generated facts parse")
}

fn classify_spec(stdlib: &ParsedFacts, spec: &CorpusSpec) -> Result<LabeledCorpus, String> {
    let corpus =
        Corpus::build(vec![stdlib.clone(), parse_records(&corpus_records(spec))], true).map_err(|e| e.to_string())?;
    LabeledCorpus::classify(corpus, Config::default()).map_err(|e| e.to_string())
}

fn callsite_partition(stdlib: &ParsedFacts) -> Result<(), String> {
    runner(7)
        .run(&corpus_spec(), |spec| {
            let labeled = classify_spec(stdlib, &spec).map_err(TestCaseError::fail)?;
            let mut counted: BTreeMap<CallSiteIdiom, u64> = BTreeMap::new();
            let mut unresolved = 0;
            for (cs, label) in labeled
                .corpus
                .callsites
                .iter()
                .zip(&labeled.classification.callsite_idioms)
            {
                let method = cs
                    .callee
                    .as_str()
                    .strip_prefix("prop/f")
                    .and_then(|r| r.strip_suffix("()."))
                    .and_then(|i| i.parse::<usize>().ok());
                let Some(method) = method else {
                    prop_assert!(label.is_none(), "undeclared callee labeled: {cs:?}");
                    unresolved += 1;
                    continue;
                };
                let filled =
                    &spec.methods[method].params[..cs.implicit_args.len().min(spec.methods[method].params.len())];
                let expected = if filled.iter().any(|p| p.is_proof()) {
                    CallSiteIdiom::TypeProof
                } else if filled.iter().any(|p| p.is_type_class()) {
                    CallSiteIdiom::TypeClass
                } else {
                    CallSiteIdiom::Context
                };
                prop_assert_eq!(*label, Some(expected), "{:?}", cs);
                *counted.entry(expected).or_default() += 1;
            }
            prop_assert_eq!(labeled.classification.unresolved_callees.len(), unresolved);
            let summary = summarize(&labeled).map_err(|e| TestCaseError::fail(e.to_string()))?;
            let labeled_total: u64 = summary.corpus.call_site_idioms.values().sum();
            prop_assert_eq!(labeled_total + unresolved as u64, summary.corpus.implicit_call_sites);
            for (idiom, n) in &summary.corpus.call_site_idioms {
                prop_assert_eq!(counted.get(idiom).copied().unwrap_or(0), *n);
            }
            Ok(())
        })
        .map_err(|e| format!("call-site partition: {e}"))
}

fn conversion_partition(stdlib: &ParsedFacts) -> Result<(), String> {
    runner(11)
        .run(&corpus_spec(), |spec| {
            let labeled = classify_spec(stdlib, &spec).map_err(TestCaseError::fail)?;
            let mut expected: BTreeMap<String, ConversionKind> = BTreeMap::new();
            for (i, c) in spec.convs.iter().enumerate() {
                let kind = match c.target {
                    Some(t) if spec.types[t].trait_like => ConversionKind::LateTrait,
                    Some(t)
                        if spec.types[t].module.min(spec.modules - 1) == c.module && spec.types[t].file == c.file =>
                    {
                        ConversionKind::ExtensionMethod
                    }
                    _ => ConversionKind::Plain,
                };
                expected.insert(format!("prop/conv{i}()."), kind);
            }
            for i in 0..spec.classes.len() {
                expected.insert(format!("prop/Wrap{i}()."), ConversionKind::ExtensionMethod);
            }
            let got: BTreeMap<String, ConversionKind> = labeled
                .classification
                .conversions
                .iter()
                .map(|(id, info)| (id.to_string(), info.kind))
                .collect();
            prop_assert_eq!(&got, &expected);
            let mut by_kind: BTreeMap<ConversionKind, BTreeSet<&String>> = BTreeMap::new();
            for (id, kind) in &got {
                by_kind.entry(*kind).or_default().insert(id);
            }
            let total: usize = by_kind.values().map(BTreeSet::len).sum();
            prop_assert_eq!(total, got.len());
            Ok(())
        })
        .map_err(|e| format!("conversion partition: {e}"))
}

fn conformance_oracle() -> Result<(), String> {
    let graph = (1..12usize).prop_flat_map(|n| {
        (
            Just(n),
            prop::collection::vec(any::<u16>(), n),
            prop::collection::vec(prop::bool::weighted(0.2), n),
        )
    });
    runner(13).run(&graph, |(n, masks, external)| {
        let ext = "ext/E#";
        let mut lines = vec![json!({"kind": "module", "id": "c:m", "project": "c", "group": "g", "artifact": "a",
            "version": "1", "platform": "JVM", "scalaVersion": "2.13.6", "locMain": 1, "locTest": 0, "totalCallSites": 0})];
        let mut reach = vec![vec![false; n + 1]; n + 1];
        for i in 0..n {
            reach[i][i] = true;
            let tp = format!("T{i}#[A]");
            let mut parents = Vec::new();
            for j in (0..i).filter(|j| masks[i] & (1 << j) != 0) {
                parents.push(json!({"head": format!("T{j}#"), "args": [{"head": tp}]}));
                reach[i][j] = true;
            }
            if external[i] {
                parents.push(json!({"head": ext}));
                reach[i][n] = true;
            }
            lines.push(json!({"kind": "declaration", "id": format!("T{i}#"), "module": "c:m", "declKind": "TRAIT",
                "language": "SCALA", "implicit": false, "visibility": "PUBLIC", "scope": "TOP_LEVEL",
                "path": "T.scala", "range": [i + 1, 0, i + 1, 5], "fromImplicitClass": false,
                "signature": {"sig": "type", "typeParams": [tp], "parents": parents}}));
        }
        reach[n][n] = true;
        for k in 0..=n {
            for i in 0..=n {
                for j in 0..=n {
                    if reach[i][k] && reach[k][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
        let table = link_symbols(&[parse_records(&lines)]).map_err(|e| TestCaseError::fail(e.to_string()))?;
        let name = |i: usize| if i == n { ext.to_string() } else { format!("T{i}#") };
        for (i, row) in reach.iter().enumerate() {
            let t = TypeRef::new(name(i), if i == n { vec![] } else { vec![TypeRef::simple("scala/Int#")] });
            for (j, expected) in row.iter().enumerate() {
                let got = conforms_to(&t, &SymbolId::new(name(j)), &table).map_err(|e| TestCaseError::fail(e.to_string()))?;
                prop_assert_eq!(got, *expected, "{} <: {}", name(i), name(j));
            }
        }
        Ok(())
    })
    .map_err(|e| format!("conformance oracle: {e}"))
}

fn argument_tree() -> impl Strategy<Value = ArgumentTree> {
    let leaf = "[a-e]".prop_map(|s| ArgumentTree::ValueRef(SymbolId::new(format!("v/{s}."))));
    leaf.prop_recursive(5, 40, 4, |inner| {
        ("[f-j]", prop::collection::vec(inner, 0..4)).prop_map(|(s, args)| ArgumentTree::Call {
            decl: SymbolId::new(format!("c/{s}().")),
            type_args: Vec::new(),
            args,
        })
    })
}

/// Counts tree nodes in the serialized form, without using the model's own traversal.
fn count_nodes(v: &Value) -> usize {
    match v {
        Value::Object(map) => {
            let own = map.keys().filter(|k| *k == "ValueRef" || *k == "Call").count();
            own + map.values().map(count_nodes).sum::<usize>()
        }
        Value::Array(items) => items.iter().map(count_nodes).sum(),
        _ => 0,
    }
}

fn injected_count_oracle() -> Result<(), String> {
    let strategy = (prop::collection::vec(argument_tree(), 0..5), any::<bool>());
    runner(17)
        .run(&strategy, |(args, synthetic)| {
            let oracle = count_nodes(&serde_json::to_value(&args).expect("serializes")) + usize::from(synthetic);
            let cs = CallSite {
                callee: SymbolId::new("f()."),
                module: "m".into(),
                location: Location::new(&"m".into(), "F.scala", TextRange::new(1, 0, 1, 1), PathKind::Main),
                type_args: Vec::new(),
                implicit_args: args,
                whole_call_synthetic: synthetic,
            };
            prop_assert_eq!(injected_count(&cs), oracle);
            Ok(())
        })
        .map_err(|e| format!("injected_count oracle: {e}"))
}

/// Deterministic permutation of `0..n` from a seed.
fn permutation(n: usize, mut seed: u64) -> Vec<usize> {
    let mut out: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        seed ^= seed << 13;
        seed ^= seed >> 7;
        seed ^= seed << 17;
        out.swap(i, (seed % (i as u64 + 1)) as usize);
    }
    out
}

fn merge_order(stdlib: &ParsedFacts) -> Result<(), String> {
    let strategy = (corpus_spec(), any::<u64>(), 1..4usize);
    runner(19)
        .run(&strategy, |(spec, seed, parts)| {
            let records = corpus_records(&spec);
            let order = permutation(records.len(), seed | 1);
            let mut fragments: Vec<Vec<&Value>> = vec![Vec::new(); parts];
            for (k, i) in order.iter().enumerate() {
                fragments[k % parts].push(&records[*i]);
            }
            let build = |fragments: &[Vec<&Value>], stdlib_first: bool| -> Result<_, TestCaseError> {
                let mut parsed: Vec<ParsedFacts> = fragments.iter().map(|f| parse_records(f.iter().copied())).collect();
                if stdlib_first {
                    parsed.insert(0, stdlib.clone());
                } else {
                    parsed.push(stdlib.clone());
                }
                let corpus = Corpus::build(parsed, true).map_err(|e| TestCaseError::fail(e.to_string()))?;
                let labeled = LabeledCorpus::classify(corpus, Config::default())
                    .map_err(|e| TestCaseError::fail(e.to_string()))?;
                summarize(&labeled).map_err(|e| TestCaseError::fail(e.to_string()))
            };
            let forward = build(&fragments, true)?;
            let mut reversed: Vec<Vec<&Value>> = fragments.into_iter().rev().collect();
            for f in &mut reversed {
                f.reverse();
            }
            let backward = build(&reversed, false)?;
            prop_assert_eq!(forward, backward);
            Ok(())
        })
        .map_err(|e| format!("merge order: {e}"))
}

fn property_suites() -> Outcome {
    let start = Instant::now();
    let stdlib = read_facts("stdlib.jsonl");
    let mut timings = Vec::new();
    let suites: [Suite; 5] = [
        ("call-site partition", Box::new(|| callsite_partition(&stdlib))),
        ("conversion partition", Box::new(|| conversion_partition(&stdlib))),
        ("conformance oracle", Box::new(conformance_oracle)),
        ("injected_count oracle", Box::new(injected_count_oracle)),
        ("merge order", Box::new(|| merge_order(&stdlib))),
    ];
    for (name, suite) in suites {
        let t = Instant::now();
        suite()?;
        timings.push(format!("{name} {:.1}s", t.elapsed().as_secs_f64()));
    }
    let elapsed = within(Duration::from_secs(60), start)?;
    Ok(format!(
        "5 suites x {CASES} cases in {:.1}s ({})",
        elapsed.as_secs_f64(),
        timings.join(", ")
    ))
}

// ---- 8, 9: command-line pipeline --------------------------------------------

fn implicitus(args: &[&str]) -> Result<std::process::Output, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_implicitus"))
        .args(args)
        .output()
        .map_err(|e| format!("spawning implicitus: {e}"))?;
    if !out.status.success() {
        return Err(format!(
            "implicitus {args:?} failed with {}: {}",
            out.status,
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    Ok(out)
}

fn desk_inputs() -> Vec<String> {
    let f = fixtures();
    [
        "stdlib.jsonl",
        "desk/alpha.jsonl",
        "desk/beta.jsonl",
        "desk/gamma.jsonl",
        "desk/delta.jsonl",
    ]
    .iter()
    .map(|n| f.join(n).display().to_string())
    .collect()
}

fn digests(dir: &Path) -> Result<BTreeMap<String, String>, String> {
    let mut out = BTreeMap::new();
    for entry in fs::read_dir(dir).map_err(|e| e.to_string())? {
        let path = entry.map_err(|e| e.to_string())?.path();
        let bytes = fs::read(&path).map_err(|e| e.to_string())?;
        let digest: String = Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect();
        out.insert(
            path.file_name().unwrap_or_default().to_string_lossy().into_owned(),
            digest,
        );
    }
    Ok(out)
}

fn labeled_desk(dir: &Path) -> Result<PathBuf, String> {
    let corpus = dir.join("corpus.bin");
    let labeled = dir.join("labeled.bin");
    let mut args = vec!["ingest".to_string()];
    args.extend(desk_inputs());
    args.extend(["-o".into(), corpus.display().to_string()]);
    implicitus(&args.iter().map(String::as_str).collect::<Vec<_>>())?;
    implicitus(&[
        "classify",
        &corpus.display().to_string(),
        "-o",
        &labeled.display().to_string(),
    ])?;
    Ok(labeled)
}

fn report_determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let labeled = labeled_desk(tmp.path())?.display().to_string();
    let first = tmp.path().join("first");
    let second = tmp.path().join("second");
    implicitus(&[
        "--jobs",
        "1",
        "report",
        &labeled,
        "--csv-dir",
        &first.display().to_string(),
    ])?;
    implicitus(&[
        "--jobs",
        "4",
        "report",
        &labeled,
        "--csv-dir",
        &second.display().to_string(),
    ])?;
    let a = digests(&first)?;
    let b = digests(&second)?;
    check(a == b, format!("digests differ: {a:?} vs {b:?}"))?;
    let has_json = a.keys().any(|k| k.ends_with(".json"));
    let csvs = a.keys().filter(|k| k.ends_with(".csv")).count();
    check(has_json && csvs >= 5, format!("unexpected report files {:?}", a.keys()))?;
    Ok(format!(
        "{csvs} CSV + 1 JSON files byte-identical across runs (SHA-256)"
    ))
}

fn golden_summary_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/desk_summary.json")
}

fn end_to_end() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let start = Instant::now();
    let labeled = labeled_desk(tmp.path())?.display().to_string();
    let manifest = fixtures().join("desk/projects.jsonl").display().to_string();
    let verdicts = implicitus(&["dedup", "--manifest", &manifest])?;
    let summary = tmp.path().join("summary.json");
    implicitus(&["stats", &labeled, "-o", &summary.display().to_string()])?;
    let out = tmp.path().join("out");
    implicitus(&[
        "report",
        &labeled,
        "--csv-dir",
        &out.display().to_string(),
        "--top",
        "5",
    ])?;
    let elapsed = within(Duration::from_secs(10), start)?;

    let verdicts: Vec<Value> = String::from_utf8_lossy(&verdicts.stdout)
        .lines()
        .map(|l| serde_json::from_str(l).map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;
    let rejected: Vec<&str> = verdicts
        .iter()
        .filter(|v| v["retained"] == false)
        .filter_map(|v| v["project"].as_str())
        .collect();
    check(
        verdicts.len() == 4 && rejected == ["desk/delta"],
        format!("verdicts {verdicts:?}"),
    )?;

    let produced = fs::read_to_string(&summary).map_err(|e| e.to_string())?;
    let golden_path = golden_summary_path();
    if std::env::var_os("IMPLICITUS_BLESS").is_some() {
        fs::create_dir_all(golden_path.parent().expect("parent")).map_err(|e| e.to_string())?;
        fs::write(&golden_path, &produced).map_err(|e| e.to_string())?;
    }
    let pinned = fs::read_to_string(&golden_path).map_err(|e| format!("{}: {e}", golden_path.display()))?;
    check(produced == pinned, "summary.json differs from the pinned golden file")?;
    Ok(format!(
        "ingest, dedup, classify, stats, report in {:.2}s; summary.json matches golden",
        elapsed.as_secs_f64()
    ))
}

fn main() {
    let criteria: [Criterion; 9] = [
        (1, "type-class match rules", match_rules),
        (2, "tuple comparison example", tuple_example),
        (3, "Future snippet example", future_example),
        (4, "function-valued deck conversion", deck_example),
        (5, "idiom golden corpus", golden_idioms),
        (6, "retention truth table", retention_truth_table),
        (7, "property suites", property_suites),
        (8, "report determinism", report_determinism),
        (9, "end-to-end desk corpus", end_to_end),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (n, name, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str()) || f == &n.to_string()) {
            continue;
        }
        let outcome = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into());
            Err(msg)
        });
        match outcome {
            Ok(detail) => println!("criterion {n} PASS  {name}: {detail}"),
            Err(reason) => {
                failed += 1;
                println!("criterion {n} FAIL  {name}: {reason}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
