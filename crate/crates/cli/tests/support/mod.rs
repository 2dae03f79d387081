#![allow(dead_code)]

use std::path::Path;
use std::process::{Command, Output};

use aha_core::project::Project;
use aha_core::taxonomy::{CodeAssignment, Taxonomy, NOT_MEANINGFUL};
use sha2::{Digest, Sha256};

pub const EPOCH: &str = "1700000000";

/// Runs the `aha` binary inside `dir` with a pinned clock.
pub fn aha(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aha"))
        .args(args)
        .current_dir(dir)
        .env("SOURCE_DATE_EPOCH", EPOCH)
        .env_remove("AHA_API_KEY")
        .env_remove("AHA_PROVIDER_URL")
        .output()
        .expect("spawn aha")
}

/// Like [`aha`] but panics with stderr on a non-zero exit.
pub fn aha_ok(dir: &Path, args: &[&str]) -> Output {
    let out = aha(dir, args);
    assert!(out.status.success(), "aha {args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out
}

/// Deterministic stand-in for human coding: about 7% of accepted
/// completions are not meaningful, the rest carry one to three harm codes.
pub fn scripted_codes(project: &Project, taxonomy: &Taxonomy) -> Vec<CodeAssignment> {
    let harms: Vec<&str> =
        taxonomy.subcategories.iter().filter(|s| s.parent != NOT_MEANINGFUL).map(|s| s.id.as_str()).collect();
    let nm: Vec<&str> = taxonomy.subcategories_of(NOT_MEANINGFUL).map(|s| s.id.as_str()).collect();
    project
        .completions
        .iter()
        .filter(|c| c.is_accepted())
        .map(|c| {
            let h: [u8; 32] = Sha256::digest(c.id.as_bytes()).into();
            let mut ids: Vec<String> = if h[0] as usize * 100 / 256 < 7 {
                vec![nm[h[1] as usize % nm.len()].to_string()]
            } else {
                let n = 1 + h[1] as usize % 3;
                (0..n).map(|k| harms[h[2 + k] as usize % harms.len()].to_string()).collect()
            };
            ids.sort();
            ids.dedup();
            CodeAssignment { completion_id: c.id.clone(), coder_id: "coder-1".into(), subcategory_ids: ids }
        })
        .collect()
}

/// init → build → render → complete → crowd rounds → codes → analyze → report.
pub fn pipeline(dir: &Path, scenario: &str, seed: u64) {
    let s = seed.to_string();
    let s1 = (seed + 1).to_string();
    aha_ok(dir, &["--seed", &s, "init", "--bundled", scenario]);
    aha_ok(dir, &["matrix", "build"]);
    aha_ok(dir, &["vignettes", "render"]);
    aha_ok(dir, &["--seed", &s, "complete", "--provider", "mock"]);
    aha_ok(dir, &["--seed", &s, "crowd", "plan"]);
    aha_ok(dir, &["--seed", &s, "crowd", "simulate", "--out", "round0.csv"]);
    aha_ok(dir, &["crowd", "import", "--responses", "round0.csv"]);
    aha_ok(dir, &["--seed", &s, "crowd", "requeue"]);
    aha_ok(dir, &["--seed", &s1, "crowd", "simulate", "--out", "round1.csv", "--flag-fraction", "0"]);
    aha_ok(dir, &["crowd", "import", "--responses", "round1.csv"]);
    let project = Project::load(&dir.join("aha-project.json")).unwrap();
    let codes = scripted_codes(&project, &Taxonomy::bundled());
    std::fs::write(dir.join("codes.json"), serde_json::to_string_pretty(&codes).unwrap()).unwrap();
    aha_ok(dir, &["codes", "apply", "--file", "codes.json"]);
    aha_ok(dir, &["analyze", "--out", "analysis.json"]);
    aha_ok(dir, &["report", "--out", "report.json"]);
}
