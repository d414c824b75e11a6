#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_koslinker"));
    // keep the caller's KOSLINKER_* settings out of the tests
    for (k, _) in std::env::vars() {
        if k.starts_with("KOSLINKER_") {
            cmd.env_remove(k);
        }
    }
    cmd
}

pub fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

pub fn ok(cmd: &mut Command) -> String {
    let out = run(cmd);
    assert!(
        out.status.success(),
        "command failed\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

pub fn failed(cmd: &mut Command) -> String {
    let out = run(cmd);
    assert!(!out.status.success(), "command unexpectedly succeeded");
    String::from_utf8(out.stderr).unwrap()
}

pub struct Paths {
    pub dir: PathBuf,
}

impl Paths {
    pub fn new(dir: &Path) -> Self {
        Paths {
            dir: dir.to_path_buf(),
        }
    }
    pub fn get(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }
    pub fn s(&self, name: &str) -> String {
        self.get(name).to_string_lossy().into_owned()
    }
}

/// Writes synthetic sources into `dir` and runs ingest, train and links on
/// them with the given seed. Returns the paths.
pub fn pipeline(dir: &Path, topics: usize, docs: usize, iterations: usize, seed: u64) -> Paths {
    let p = Paths::new(dir);
    ok(bin().args([
        "synthesize",
        "--out",
        &p.s(""),
        "--topics",
        &topics.to_string(),
        "--docs",
        &docs.to_string(),
        "--words",
        "200",
        "--descriptors",
        "80",
        "--seed",
        "3",
    ]));
    ok(bin().args([
        "ingest",
        "--classification",
        &p.s("classification.csv"),
        "--thesaurus",
        &p.s("thesaurus.jsonl"),
        "--documents",
        &p.s("documents.jsonl"),
        "--corpus",
        &p.s("corpus.json"),
        "--min-df",
        "2",
        "--max-df-ratio",
        "0.9",
    ]));
    ok(bin().args([
        "train",
        "--corpus",
        &p.s("corpus.json"),
        "--model",
        &p.s("model.json"),
        "--iterations",
        &iterations.to_string(),
        "--burn-in",
        &(iterations / 2).to_string(),
        "--sample-lag",
        "5",
        "--seed",
        &seed.to_string(),
    ]));
    ok(bin().args([
        "links",
        "--model",
        &p.s("model.json"),
        "--classification",
        &p.s("classification.csv"),
        "--thesaurus",
        &p.s("thesaurus.jsonl"),
        "--tree",
        &p.s("tree.json"),
    ]));
    p
}
