//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any failed.
//!
//! Run with `cargo test -p koslinker-cli --test acceptance`.

#[path = "../../core/tests/support/oracle.rs"]
mod oracle;

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use koslinker::corpus::{generate_synthetic, Corpus, SyntheticSpec};
use koslinker::kos::{ClassificationSystem, Descriptor, Thesaurus};
use koslinker::links::extract_links;
use koslinker::model::{train, Hyperparameters, TrainedModel};
use koslinker::{Language, ModelState};
use koslinker_cli::serve::{router, AppState};
use serde_json::Value;
use tower::ServiceExt;

use common::{bin, ok, Paths};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        let holds: bool = $cond;
        if !holds {
            return Err(format!($($fmt)+));
        }
    };
}

fn label_restriction() -> Outcome {
    let synth = generate_synthetic(&SyntheticSpec {
        num_docs: 500,
        ..SyntheticSpec::default()
    })
    .map_err(|e| e.to_string())?;
    let corpus = &synth.corpus;
    ensure!(
        corpus.documents.len() == 500,
        "corpus has {} documents",
        corpus.documents.len()
    );
    let mut state =
        ModelState::initialize(corpus, &Hyperparameters::default()).map_err(|e| e.to_string())?;
    let violations = |state: &ModelState| -> usize {
        corpus
            .documents
            .iter()
            .enumerate()
            .map(|(d, doc)| {
                Language::ALL
                    .iter()
                    .flat_map(|&lang| state.assignments(d, lang))
                    .filter(|t| !doc.labels.contains(t))
                    .count()
            })
            .sum()
    };
    ensure!(violations(&state) == 0, "violations after initialization");
    for sweep in 1..=100 {
        state.sweep();
        let v = violations(&state);
        ensure!(v == 0, "{v} violations after sweep {sweep}");
    }
    let tokens = corpus.token_count(Language::Words) + corpus.token_count(Language::Descriptors);
    Ok(format!(
        "500 docs, {tokens} tokens, 100 sweeps, 0 violations"
    ))
}

/// Recounts every matrix from the raw assignments and compares with the
/// sampler's stored counts.
fn recount_matches(state: &ModelState, corpus: &Corpus) -> Result<(), String> {
    let k = corpus.num_topics;
    let mut topic_term = [
        vec![vec![0u32; corpus.word_vocab.len()]; k],
        vec![vec![0u32; corpus.descriptor_vocab.len()]; k],
    ];
    for (d, doc) in corpus.documents.iter().enumerate() {
        let mut doc_topic: BTreeMap<u32, u32> = BTreeMap::new();
        for lang in Language::ALL {
            for (&v, &t) in doc.tokens(lang).iter().zip(state.assignments(d, lang)) {
                *doc_topic.entry(t).or_default() += 1;
                topic_term[lang.index()][t as usize][v as usize] += 1;
            }
        }
        let stored: BTreeMap<u32, u32> = state
            .doc_topic_counts(d)
            .into_iter()
            .filter(|&(_, n)| n > 0)
            .collect();
        ensure!(
            stored == doc_topic,
            "document {d}: stored {stored:?}, recount {doc_topic:?}"
        );
    }
    for lang in Language::ALL {
        for (t, row) in topic_term[lang.index()].iter().enumerate() {
            for (v, &n) in row.iter().enumerate() {
                let stored = state.topic_term_count(lang, t, v);
                ensure!(
                    stored == n,
                    "{lang:?} topic {t} term {v}: stored {stored}, recount {n}"
                );
            }
            let total: u64 = row.iter().map(|&n| n as u64).sum();
            let stored = state.topic_total(lang, t);
            ensure!(
                stored == total,
                "{lang:?} topic {t} total: stored {stored}, recount {total}"
            );
        }
    }
    Ok(())
}

fn count_conservation() -> Outcome {
    let synth = generate_synthetic(&SyntheticSpec {
        num_docs: 500,
        ..SyntheticSpec::default()
    })
    .map_err(|e| e.to_string())?;
    let corpus = &synth.corpus;
    let mut state =
        ModelState::initialize(corpus, &Hyperparameters::default()).map_err(|e| e.to_string())?;
    recount_matches(&state, corpus).map_err(|e| format!("after initialization: {e}"))?;
    let checkpoints = [1, 10, 100];
    for sweep in 1..=100 {
        state.sweep();
        if checkpoints.contains(&sweep) {
            recount_matches(&state, corpus).map_err(|e| format!("after sweep {sweep}: {e}"))?;
        }
    }
    Ok("recount equals stored counts after init and sweeps 1, 10, 100".into())
}

fn oracle_equivalence() -> Outcome {
    let corpus = oracle::tiny_corpus();
    let tokens: usize = corpus.documents.iter().map(|d| d.len()).sum();
    ensure!(
        corpus.documents.len() == 2 && corpus.num_topics == 2 && tokens <= 8,
        "oracle corpus shape"
    );
    let tv = oracle::sampled_tv(1_000, 50_000);
    ensure!(tv <= 0.05, "total variation {tv:.4} > 0.05");
    Ok(format!(
        "TV = {tv:.4} over 50000 retained samples (bound 0.05)"
    ))
}

fn flat_kos(corpus: &Corpus) -> (ClassificationSystem, Thesaurus) {
    let cs = ClassificationSystem::from_records(
        (0..corpus.num_topics)
            .map(|k| (koslinker::corpus::class_code(k), format!("class {k}"), None)),
    )
    .unwrap();
    let th = Thesaurus::from_descriptors(
        corpus
            .descriptor_vocab
            .terms()
            .iter()
            .zip(&corpus.descriptor_labels)
            .map(|(id, label)| Descriptor {
                id: id.clone(),
                preferred_label: label.clone(),
                alt_labels: vec![],
            }),
    )
    .unwrap();
    (cs, th)
}

fn planted_recovery() -> Outcome {
    let spec = SyntheticSpec::default();
    ensure!(
        (
            spec.num_topics,
            spec.descriptor_vocab_size,
            spec.word_vocab_size,
            spec.num_docs,
            spec.concentration
        ) == (10, 200, 500, 2000, 0.05),
        "synthetic defaults changed"
    );
    let synth = generate_synthetic(&spec).map_err(|e| e.to_string())?;
    let corpus = &synth.corpus;
    let model = train(corpus, &Hyperparameters::default()).map_err(|e| e.to_string())?;
    let (cs, th) = flat_kos(corpus);
    let links = extract_links(&model, &cs, &th, 5).map_err(|e| e.to_string())?;
    let mut per_topic = Vec::new();
    for l in &links {
        let planted: BTreeSet<usize> = synth
            .planted_top_descriptors(l.topic, 5)
            .into_iter()
            .collect();
        let found: BTreeSet<usize> = l
            .descriptors
            .iter()
            .map(|d| {
                corpus
                    .descriptor_labels
                    .iter()
                    .position(|x| *x == d.label)
                    .unwrap()
            })
            .collect();
        per_topic.push(planted.intersection(&found).count() as f64 / 5.0);
    }
    let mean = per_topic.iter().sum::<f64>() / per_topic.len() as f64;
    let min = per_topic.iter().cloned().fold(1.0, f64::min);
    ensure!(
        mean >= 0.8,
        "mean precision@5 {mean:.3} < 0.8 (per topic {per_topic:?})"
    );
    Ok(format!(
        "mean precision@5 = {mean:.3}, worst topic {min:.1} (bound 0.8)"
    ))
}

fn run_pipeline(p: &Paths, sources: &Path, train_extra: &[&str]) {
    let src = |n: &str| sources.join(n).to_string_lossy().into_owned();
    ok(bin().args([
        "ingest",
        "--classification",
        &src("classification.csv"),
        "--thesaurus",
        &src("thesaurus.jsonl"),
        "--documents",
        &src("documents.jsonl"),
        "--corpus",
        &p.s("corpus.json"),
    ]));
    ok(bin()
        .args([
            "train",
            "--corpus",
            &p.s("corpus.json"),
            "--model",
            &p.s("model.json"),
        ])
        .args(train_extra));
    ok(bin().args([
        "links",
        "--model",
        &p.s("model.json"),
        "--classification",
        &src("classification.csv"),
        "--thesaurus",
        &src("thesaurus.jsonl"),
        "--tree",
        &p.s("tree.json"),
    ]));
}

fn determinism() -> Outcome {
    let root = tempfile::tempdir().map_err(|e| e.to_string())?;
    let sources = root.path().join("src");
    ok(bin().args([
        "synthesize",
        "--out",
        &sources.to_string_lossy(),
        "--topics",
        "6",
        "--docs",
        "600",
    ]));
    let train_args = ["--iterations", "200", "--burn-in", "100", "--seed", "11"];
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let dir = root.path().join(run);
        std::fs::create_dir(&dir).map_err(|e| e.to_string())?;
        let p = Paths::new(&dir);
        run_pipeline(&p, &sources, &train_args);
        let read = |n: &str| std::fs::read(p.get(n)).unwrap();
        outputs.push((read("corpus.json"), read("model.json"), read("tree.json")));
    }
    let (a, b) = (&outputs[0], &outputs[1]);
    ensure!(a.0 == b.0, "corpus caches differ");
    ensure!(a.1 == b.1, "model files differ");
    ensure!(a.2 == b.2, "tree files differ");
    Ok(format!(
        "two CLI runs: model {} bytes, tree {} bytes, byte-identical",
        a.1.len(),
        a.2.len()
    ))
}

/// Parent of each class of the 20-class, 4-level fixture, listed in
/// depth-first order so class `cNNN` is topic NNN.
const FIXTURE_PARENTS: [Option<usize>; 20] = [
    None,
    Some(0),
    Some(1),
    Some(2),
    Some(2),
    Some(1),
    Some(0),
    Some(6),
    Some(7),
    Some(6),
    None,
    Some(10),
    Some(11),
    Some(12),
    Some(11),
    Some(10),
    Some(15),
    Some(16),
    Some(16),
    Some(15),
];

/// Class that no document carries.
const EMPTY_CLASS: usize = 19;

struct Fixture {
    _dir: tempfile::TempDir,
    paths: Paths,
    sources: std::path::PathBuf,
    tree_bytes: Vec<u8>,
}

fn code(i: usize) -> String {
    format!("c{i:03}")
}

fn build_fixture() -> Result<Fixture, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let sources = dir.path().join("src");
    // topics 0..18 get documents; the last class gets none
    ok(bin().args([
        "synthesize",
        "--out",
        &sources.to_string_lossy(),
        "--topics",
        "19",
        "--docs",
        "1500",
        "--seed",
        "5",
    ]));
    let mut csv = String::from("code,name,parent\n");
    for (i, parent) in FIXTURE_PARENTS.iter().enumerate() {
        let parent = parent.map(code).unwrap_or_default();
        csv.push_str(&format!("{},Class {i},{parent}\n", code(i)));
    }
    std::fs::write(sources.join("classification.csv"), csv).map_err(|e| e.to_string())?;
    let out = dir.path().join("out");
    std::fs::create_dir(&out).map_err(|e| e.to_string())?;
    let paths = Paths::new(&out);
    run_pipeline(&paths, &sources, &[]);
    let tree_bytes = std::fs::read(paths.get("tree.json")).map_err(|e| e.to_string())?;
    Ok(Fixture {
        _dir: dir,
        paths,
        sources,
        tree_bytes,
    })
}

fn structural_fidelity(f: &Fixture) -> Outcome {
    let cs = ClassificationSystem::parse(
        std::fs::File::open(f.sources.join("classification.csv")).map_err(|e| e.to_string())?,
    )
    .map_err(|e| e.to_string())?;
    ensure!(
        cs.len() == 20 && cs.max_level() == 4,
        "fixture has {} classes, {} levels",
        cs.len(),
        cs.max_level()
    );

    // expected children in input order, from the fixture table alone
    let mut children: Vec<Vec<String>> = vec![Vec::new(); 20];
    let mut roots = Vec::new();
    for (i, p) in FIXTURE_PARENTS.iter().enumerate() {
        match p {
            Some(p) => children[*p].push(code(i)),
            None => roots.push(code(i)),
        }
    }
    let tree: Value = serde_json::from_slice(&f.tree_bytes).map_err(|e| e.to_string())?;
    ensure!(
        tree["code"] == "ROOT" && tree["level"] == 0,
        "forest is not under a synthetic root"
    );
    let kids = |n: &Value| -> Vec<String> {
        n["children"]
            .as_array()
            .unwrap()
            .iter()
            .map(|c| c["code"].as_str().unwrap().to_string())
            .collect()
    };
    ensure!(kids(&tree) == roots, "root children {:?}", kids(&tree));

    let mut seen = BTreeSet::new();
    let mut stack: Vec<(&Value, usize)> = tree["children"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| (c, 1))
        .collect();
    let mut max_desc = 0;
    while let Some((node, depth)) = stack.pop() {
        let c = node["code"].as_str().unwrap();
        let i: usize = c[1..].parse().map_err(|_| format!("unexpected code {c}"))?;
        ensure!(seen.insert(i), "class {c} appears twice");
        ensure!(
            node["name"] == format!("Class {i}").as_str(),
            "class {c} has name {}",
            node["name"]
        );
        ensure!(
            node["level"] == depth,
            "class {c} at level {} instead of {depth}",
            node["level"]
        );
        ensure!(
            kids(node) == children[i],
            "class {c} children {:?}",
            kids(node)
        );
        let n = node["descriptors"].as_array().unwrap().len();
        ensure!(n <= 5, "class {c} has {n} descriptors");
        ensure!(i == EMPTY_CLASS || n == 5, "class {c} has {n} descriptors");
        max_desc = max_desc.max(n);
        for child in node["children"].as_array().unwrap() {
            stack.push((child, depth + 1));
        }
    }
    ensure!(seen.len() == 20, "tree has {} classes", seen.len());
    Ok(format!(
        "20 classes in 4 levels, isomorphic, at most {max_desc} descriptors per node"
    ))
}

fn find<'a>(node: &'a Value, code: &str) -> Option<&'a Value> {
    if node["code"] == code {
        return Some(node);
    }
    node["children"]
        .as_array()?
        .iter()
        .find_map(|c| find(c, code))
}

fn degenerate_handling(f: &Fixture) -> Outcome {
    let tree: Value = serde_json::from_slice(&f.tree_bytes).map_err(|e| e.to_string())?;
    let empty = code(EMPTY_CLASS);
    let node = find(&tree, &empty).ok_or("class missing from the tree")?;
    ensure!(
        node["low_support"] == true,
        "{empty} is not flagged low_support"
    );
    ensure!(
        node["descriptors"].as_array().unwrap().is_empty(),
        "{empty} has links"
    );
    let flagged = (0..20)
        .filter(|&i| find(&tree, &code(i)).unwrap()["low_support"] == true)
        .count();
    ensure!(flagged == 1, "{flagged} classes flagged low_support");

    let model = TrainedModel::read_from(std::fs::File::open(f.paths.get("model.json")).unwrap())
        .map_err(|e| e.to_string())?;
    ensure!(
        model.descriptor_support[EMPTY_CLASS] == 0,
        "empty class has support"
    );
    let v = model.descriptor_vocab.len() as f64;
    let row = &model.phi_descriptors[EMPTY_CLASS];
    ensure!(
        row.iter().all(|p| (p - 1.0 / v).abs() < 1e-12),
        "empty class row is not uniform"
    );
    Ok(format!(
        "{empty} has no documents: low_support=true, no descriptors, uniform row"
    ))
}

fn service_endpoints(f: &Fixture) -> Outcome {
    let model = TrainedModel::read_from(std::fs::File::open(f.paths.get("model.json")).unwrap())
        .map_err(|e| e.to_string())?;
    let cs = ClassificationSystem::parse(
        std::fs::File::open(f.sources.join("classification.csv")).unwrap(),
    )
    .map_err(|e| e.to_string())?;
    let state =
        AppState::new(f.tree_bytes.clone(), Some(model), Some(cs)).map_err(|e| e.to_string())?;
    let app = router(state, None);
    let rt = tokio::runtime::Builder::new_current_thread()
        .build()
        .map_err(|e| e.to_string())?;
    let get = |uri: &str| -> (StatusCode, Vec<u8>) {
        rt.block_on(async {
            let resp = app
                .clone()
                .oneshot(Request::get(uri).body(Body::empty()).unwrap())
                .await
                .unwrap();
            let status = resp.status();
            (
                status,
                resp.into_body()
                    .collect()
                    .await
                    .unwrap()
                    .to_bytes()
                    .to_vec(),
            )
        })
    };

    let (status, body) = get("/api/tree");
    ensure!(
        status == StatusCode::OK && body == f.tree_bytes,
        "/api/tree is not the tree file"
    );

    let tree: Value = serde_json::from_slice(&f.tree_bytes).unwrap();
    for i in [3, 10, EMPTY_CLASS] {
        let (status, body) = get(&format!("/api/suggest?classes={}&k=5", code(i)));
        ensure!(
            status == StatusCode::OK,
            "suggest {} returned {status}",
            code(i)
        );
        let got: Value = serde_json::from_slice(&body).unwrap();
        let want = &find(&tree, &code(i)).unwrap()["descriptors"];
        ensure!(
            got["descriptors"] == *want,
            "suggest {} differs from its node",
            code(i)
        );
    }
    let (status, _) = get("/api/suggest?classes=c001,c002,c016&k=3");
    ensure!(
        status == StatusCode::OK,
        "mixture suggestion returned {status}"
    );
    let (status, _) = get("/api/suggest?classes=c001,zzz");
    ensure!(
        status == StatusCode::BAD_REQUEST,
        "unknown code returned {status}"
    );
    Ok("/api/tree verbatim; /api/suggest matches nodes, rejects unknown codes".into())
}

fn run(name: &str, limit: Option<Duration>, check: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
        let msg = p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Err(format!("panicked: {msg}"))
    });
    let elapsed = start.elapsed();
    let result = match (result, limit) {
        (Ok(_), Some(l)) if elapsed > l => Err(format!("took {elapsed:.1?}, limit {l:?}")),
        (r, _) => r,
    };
    let limit = limit
        .map(|l| format!(", limit {}s", l.as_secs()))
        .unwrap_or_default();
    match &result {
        Ok(detail) => println!(
            "PASS  {name:<22} {detail} [{:.1}s{limit}]",
            elapsed.as_secs_f64()
        ),
        Err(detail) => println!(
            "FAIL  {name:<22} {detail} [{:.1}s{limit}]",
            elapsed.as_secs_f64()
        ),
    }
    result.is_ok()
}

fn main() {
    // failures are reported on their own line
    std::panic::set_hook(Box::new(|_| {}));
    let mut passed = vec![
        run(
            "label-restriction",
            Some(Duration::from_secs(30)),
            label_restriction,
        ),
        run("count-conservation", None, count_conservation),
        run(
            "oracle-equivalence",
            Some(Duration::from_secs(120)),
            oracle_equivalence,
        ),
        run(
            "planted-recovery",
            Some(Duration::from_secs(300)),
            planted_recovery,
        ),
        run("determinism", None, determinism),
    ];

    let start = Instant::now();
    let fixture =
        catch_unwind(build_fixture).unwrap_or_else(|_| Err("fixture pipeline panicked".into()));
    println!(
        "      (20-class fixture pipeline took {:.1}s)",
        start.elapsed().as_secs_f64()
    );
    match &fixture {
        Ok(f) => {
            passed.push(run("structural-fidelity", None, || structural_fidelity(f)));
            passed.push(run("degenerate-handling", None, || degenerate_handling(f)));
            passed.push(run("service-endpoints", None, || service_endpoints(f)));
        }
        Err(e) => {
            for name in [
                "structural-fidelity",
                "degenerate-handling",
                "service-endpoints",
            ] {
                println!("FAIL  {name:<22} fixture: {e}");
                passed.push(false);
            }
        }
    }
    let failed = passed.iter().filter(|p| !**p).count();
    println!(
        "acceptance: {} passed, {failed} failed",
        passed.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
