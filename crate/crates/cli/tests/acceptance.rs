//! Acceptance checks, one PASS/FAIL line per criterion.
//!
//! Runs without network. Set `AHA_REFERENCE_CORPUS` to a list of coded project
//! files (one per scenario, separated like `PATH`) to also compare the
//! analysis against the published values.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod support;

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use aha_core::analysis::{unique_subcategories, AnalysisKind, AnalysisReport, Factor};
use aha_core::crowd::{
    import_responses, plan_assignments, requeue_rejected, rerun_quality_checks, simulate_responses, CrowdSettings,
    PlanOptions, SimulateOptions,
};
use aha_core::clock::Clock;
use aha_core::matrix::{build_matrix, enumerate_variants_multi, BehaviorVariant, EthicalMatrix};
use aha_core::project::Project;
use aha_core::scenario::bundled;
use aha_core::taxonomy::{roll_up, CodedCompletion, Taxonomy};
use aha_core::vignette::{render_all, render_vignette};
use aha_stats::{chi_square_test, holm_adjust, paired_t_test, ContingencyTable};
use serde::Deserialize;
use statrs::distribution::{ChiSquared, ContinuousCDF, StudentsT};
use support::{aha_ok, pipeline};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !($cond) {
            return Err(format!($($msg)+));
        }
    };
}

const SCENARIOS: [(&str, usize); 5] = [
    ("communication-compliance", 12),
    ("content-moderation", 13),
    ("disease-diagnosis", 16),
    ("hiring", 11),
    ("loan-application", 11),
];

fn built(id: &str) -> Project {
    let mut p = Project::from_config(bundled(id).unwrap());
    let variants = enumerate_variants_multi(&p.scenario.harm_labels).unwrap();
    let mut m = build_matrix(&p.scenario, &p.stakeholders, &variants).unwrap();
    render_all(&mut m, &p.scenario, &p.stakeholders).unwrap();
    p.matrix = Some(m);
    p
}

fn matrix_shape() -> Outcome {
    let start = Instant::now();
    for (id, rows) in SCENARIOS {
        let p = built(id);
        let m = p.matrix.as_ref().unwrap();
        ensure!(m.columns.len() == 16, "{id}: {} columns", m.columns.len());
        ensure!(m.rows.len() == rows, "{id}: {} rows, expected {rows}", m.rows.len());
        ensure!(m.n_cells() == rows * 16, "{id}: {} cells", m.n_cells());
    }
    let took = start.elapsed();
    ensure!(took < Duration::from_secs(1), "took {took:?}");
    Ok(format!("12/13/16/11/11 rows x 16 columns in {took:.0?}"))
}

#[derive(Deserialize)]
struct Golden {
    scenario: String,
    stakeholder: String,
    variant: BehaviorVariant,
    text: String,
}

fn vignette_goldens() -> Outcome {
    let goldens: Vec<Golden> =
        serde_json::from_str(include_str!("../../core/tests/fixtures/sample_vignettes.json")).map_err(|e| e.to_string())?;
    let scenarios: BTreeSet<&str> = goldens.iter().map(|g| g.scenario.as_str()).collect();
    ensure!(scenarios.len() == 5, "goldens cover {} scenarios", scenarios.len());
    for g in &goldens {
        let config = bundled(&g.scenario).map_err(|e| e.to_string())?;
        let s = config.stakeholder(&g.stakeholder).ok_or(format!("no stakeholder {}", g.stakeholder))?;
        let v = render_vignette(&config.scenario, s, &g.variant).map_err(|e| e.to_string())?;
        ensure!(v.text == g.text, "{} / {}:\n  got  {}\n  want {}", g.scenario, g.stakeholder, v.text, g.text);
    }
    Ok(format!("{} sample vignettes byte-identical", goldens.len()))
}

fn plan_ok(m: &EthicalMatrix, seed: u64) -> Result<usize, String> {
    let plan = plan_assignments(m, &PlanOptions { settings: CrowdSettings::default(), seed }).map_err(|e| e.to_string())?;
    let mut coverage: BTreeMap<String, usize> = BTreeMap::new();
    let mut per_slot: BTreeMap<u32, usize> = BTreeMap::new();
    for t in &plan.tasks {
        let distinct: BTreeSet<_> = t.cells.iter().collect();
        ensure!(t.cells.len() == 4 && distinct.len() == 4, "task {} has {} distinct of {}", t.task_id, distinct.len(), t.cells.len());
        ensure!(t.scenario_id == m.scenario_id, "task {} crosses scenarios", t.task_id);
        for c in &t.cells {
            *coverage.entry(c.to_string()).or_default() += 1;
        }
        *per_slot.entry(t.judge_slot).or_default() += 1;
    }
    ensure!(coverage.len() == m.n_cells(), "{} of {} vignettes assigned", coverage.len(), m.n_cells());
    ensure!(coverage.values().all(|&n| n == 3), "seed {seed}: coverage not exactly 3");
    ensure!(per_slot.values().all(|&n| n <= 5), "seed {seed}: a slot exceeds 5 tasks");
    Ok(plan.tasks.len())
}

fn crowd_plan() -> Outcome {
    let mut sizes = Vec::new();
    for id in ["loan-application", "disease-diagnosis", "communication-compliance"] {
        let m = built(id).matrix.unwrap();
        sizes.push(m.n_cells());
        for seed in 0..10 {
            plan_ok(&m, seed)?;
        }
    }
    let cc = built("communication-compliance").matrix.unwrap();
    let plan = plan_assignments(&cc, &PlanOptions { settings: CrowdSettings::default(), seed: 0 }).map_err(|e| e.to_string())?;
    ensure!(plan.tasks.len() == 144, "{} tasks", plan.tasks.len());
    ensure!(plan.min_judges == 29, "lower bound {}", plan.min_judges);
    Ok(format!("10 seeds x sizes {sizes:?}; communication compliance 144 tasks, >= 29 judges"))
}

fn qc_requeue() -> Outcome {
    let clock = Clock::Fixed(1_700_000_000);
    let mut p = built("hiring");
    let m = p.matrix.clone().unwrap();
    let plan = plan_assignments(&m, &PlanOptions { settings: CrowdSettings::default(), seed: 5 }).map_err(|e| e.to_string())?;
    p.crowd.tasks = plan.tasks;
    p.crowd.judges = plan.judges;
    p.crowd.refresh_ledger();
    let tasks = p.crowd.tasks.clone();
    let r0 = simulate_responses(&p.crowd, &tasks, &SimulateOptions { seed: 5, flag_fraction: 0.4 });
    let speed = r0.iter().filter(|r| r.duration_seconds < 5.0).count();
    let green = r0.iter().filter(|r| r.attention_answer == "green").count();
    ensure!(speed > 0 && green > 0, "fixture lacks mixed failures");
    ensure!(speed + green == (0.4 * tasks.len() as f64).round() as usize, "{} of {} flagged", speed + green, tasks.len());
    import_responses(&mut p, r0, vec![], clock).map_err(|e| e.to_string())?;

    let snapshot = p.clone();
    rerun_quality_checks(&mut p);
    rerun_quality_checks(&mut p);
    ensure!(p == snapshot, "re-running quality checks changed the project");

    let again = requeue_rejected(&mut p, 5).map_err(|e| e.to_string())?;
    let r1 = simulate_responses(&p.crowd, &again, &SimulateOptions { seed: 6, flag_fraction: 0.0 });
    import_responses(&mut p, r1, vec![], clock).map_err(|e| e.to_string())?;
    let mut accepted = vec![0usize; m.n_cells()];
    for c in p.completions.iter().filter(|c| c.source.is_crowd() && c.is_accepted()) {
        accepted[m.locate(&c.cell()).ok_or("completion outside matrix")?] += 1;
    }
    ensure!(accepted.iter().all(|&n| n == 3), "coverage after one requeue: min {:?} max {:?}", accepted.iter().min(), accepted.iter().max());
    Ok(format!("{speed} speed + {green} attention failures of {}; {} tasks requeued; 3 accepted everywhere", tasks.len(), again.len()))
}

/// Pearson statistic written out by hand, p from statrs.
fn reference_chi(counts: &[Vec<u64>]) -> (f64, f64, u32) {
    let rows: Vec<f64> = counts.iter().map(|r| r.iter().sum::<u64>() as f64).collect();
    let cols: Vec<f64> = (0..counts[0].len()).map(|j| counts.iter().map(|r| r[j] as f64).sum()).collect();
    let n: f64 = rows.iter().sum();
    let mut x2 = 0.0;
    for (i, r) in counts.iter().enumerate() {
        for (j, &o) in r.iter().enumerate() {
            let e = rows[i] * cols[j] / n;
            x2 += (o as f64 - e).powi(2) / e;
        }
    }
    let df = ((rows.len() - 1) * (cols.len() - 1)) as u32;
    (x2, ChiSquared::new(df as f64).unwrap().sf(x2), df)
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }
}

// 1.4142 is the pinned tolerance target, not a stand-in for SQRT_2.
#[allow(clippy::approx_constant)]
fn statistics_oracle() -> Outcome {
    let fixtures: Vec<Vec<Vec<u64>>> = vec![
        vec![vec![10, 20], vec![30, 40]],
        vec![vec![12, 5, 9], vec![7, 14, 3]],
        vec![vec![30, 10, 5, 2], vec![8, 25, 12, 9], vec![4, 6, 20, 15]],
        vec![vec![100, 1], vec![1, 100]],
        vec![vec![3, 7, 11, 2, 8], vec![9, 4, 6, 10, 5]],
        vec![vec![50, 52, 48], vec![49, 51, 50], vec![51, 47, 52], vec![50, 50, 50]],
    ];
    for f in &fixtures {
        let t = ContingencyTable::from_counts(f.clone()).map_err(|e| e.to_string())?;
        let got = chi_square_test::<f64>(&t).map_err(|e| e.to_string())?;
        let (x2, p, df) = reference_chi(f);
        ensure!(got.df == df, "{f:?}: df {} vs {df}", got.df);
        ensure!(rel(got.statistic, x2) < 1e-6, "{f:?}: chi2 {} vs {x2}", got.statistic);
        ensure!(rel(got.p_value, p) < 1e-6, "{f:?}: p {} vs {p}", got.p_value);
    }
    let small = chi_square_test::<f64>(&ContingencyTable::from_counts(fixtures[0].clone()).unwrap()).unwrap();
    ensure!((small.statistic - 0.7937).abs() < 1e-4 && small.df == 1, "[[10,20],[30,40]] gave {}", small.statistic);

    let uniform = chi_square_test::<f64>(&ContingencyTable::from_counts(vec![vec![5, 5, 5], vec![5, 5, 5]]).unwrap()).unwrap();
    ensure!(uniform.statistic.abs() < 1e-12 && (uniform.p_value - 1.0).abs() < 1e-12, "uniform table: {uniform:?}");

    let h: Vec<f64> = holm_adjust(&[0.01, 0.02, 0.04]);
    ensure!(h == [0.03, 0.04, 0.04], "holm {h:?}");
    let h: Vec<f64> = holm_adjust(&[0.5, 0.6]);
    ensure!(h == [1.0, 1.0], "holm {h:?}");

    let a = [10.0_f64, 12.0, 9.0, 11.0];
    let b = [8.0_f64, 11.0, 10.0, 9.0];
    let t = paired_t_test(&a, &b).map_err(|e| e.to_string())?;
    let p_ref = 2.0 * StudentsT::new(0.0, 1.0, 3.0).unwrap().sf(2.0_f64.sqrt());
    ensure!((t.statistic - 1.4142).abs() < 1e-4 && t.df == 3, "t = {} df {}", t.statistic, t.df);
    ensure!((t.p_value - 0.252).abs() < 1e-3 && (t.p_value - p_ref).abs() < 1e-4, "p = {} (statrs {p_ref})", t.p_value);
    let back = paired_t_test(&b, &a).unwrap();
    ensure!(back.statistic == -t.statistic && back.p_value == t.p_value, "antisymmetry broken");
    Ok(format!("{} chi-square fixtures within 1e-6; Holm exact; t = {:.4}, p = {:.4}", fixtures.len(), t.statistic, t.p_value))
}

fn coded(id: usize, subs: &[&str], t: &Taxonomy) -> CodedCompletion {
    let subcategories: BTreeSet<String> = subs.iter().map(|s| s.to_string()).collect();
    CodedCompletion {
        completion_id: format!("c{id}"),
        scenario_id: "fixture".into(),
        stakeholder_id: "s".into(),
        variant: built("hiring").matrix.unwrap().columns[0].clone(),
        source: "model".into(),
        categories: subcategories.iter().map(|s| t.parent_of(s).unwrap().to_string()).collect(),
        subcategories,
    }
}

fn roll_up_semantics() -> Outcome {
    let t = Taxonomy::bundled();
    let a = coded(0, &["economic-strain", "waste", "opportunity-loss"], &t);
    let b = coded(1, &["mental-health", "economic-strain"], &t);
    let r = roll_up([&a, &b], &t);
    ensure!(r.count("allocational") == 2, "allocational counted {}", r.count("allocational"));
    ensure!(r.count("well-being") == 1 && r.total_observations == 3, "{r:?}");

    // Every subset of a pool of codes, recounted by brute force.
    let pool = ["economic-strain", "waste", "mental-health", "safety", "loss-of-privacy", "backlash", "scapegoat"];
    let corpus: Vec<CodedCompletion> = (1u32..(1 << pool.len()))
        .map(|mask| {
            let subs: Vec<&str> = pool.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, s)| *s).collect();
            coded(mask as usize, &subs, &t)
        })
        .collect();
    let r = roll_up(&corpus, &t);
    for cat in &t.categories {
        let brute = corpus
            .iter()
            .filter(|c| c.subcategories.iter().any(|s| t.subcategory(s).unwrap().parent == cat.id))
            .count() as u64;
        ensure!(r.count(&cat.id) == brute, "{}: {} vs brute force {brute}", cat.id, r.count(&cat.id));
    }
    Ok(format!("same-category codes count once; {} generations recounted", corpus.len()))
}

fn diversity_dominance() -> Outcome {
    let t = Taxonomy::bundled();
    let fixture: Vec<CodedCompletion> =
        serde_json::from_str(include_str!("fixtures/disjoint_codes.json")).map_err(|e| e.to_string())?;
    let units = vec!["applicant".to_string()];
    let count = |corpus: &[CodedCompletion], admit: &dyn Fn(&str) -> bool| -> Result<BTreeMap<String, u64>, String> {
        Ok(unique_subcategories(corpus, &t, &units, admit).map_err(|e| e.to_string())?.per_stakeholder_counts)
    };
    let crowd = count(&fixture, &|s| s == "crowd")?["applicant"];
    let model = count(&fixture, &|s| s == "model")?["applicant"];
    let both = count(&fixture, &|_| true)?["applicant"];
    ensure!((crowd, model, both) == (2, 2, 3), "disjoint fixture gave {crowd}, {model}, {both}");

    let dir = tempfile::tempdir().unwrap();
    pipeline(dir.path(), "loan-application", 11);
    let p = Project::load(&dir.path().join("aha-project.json")).map_err(|e| e.to_string())?;
    let corpus = aha_core::taxonomy::coded_corpus(&p, &t);
    let rows = p.matrix.as_ref().unwrap().rows.clone();
    let stats = |admit: &dyn Fn(&str) -> bool| unique_subcategories(&corpus, &t, &rows, admit).map(|d| d.per_stakeholder_counts);
    let (c, m, all) = (stats(&|s| s == "crowd"), stats(&|s| s == "model"), stats(&|_| true));
    let (c, m, all) = (c.map_err(|e| e.to_string())?, m.map_err(|e| e.to_string())?, all.map_err(|e| e.to_string())?);
    for r in &rows {
        ensure!(all[r] >= c[r] && all[r] >= m[r], "{r}: combined {} < crowd {} or model {}", all[r], c[r], m[r]);
    }
    Ok(format!("fixture 2, 2, 3; combined dominates on {} stakeholders of a coded pipeline", rows.len()))
}

fn end_to_end() -> Outcome {
    let start = Instant::now();
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    pipeline(a.path(), "hiring", 7);
    let first = start.elapsed();
    pipeline(b.path(), "hiring", 7);
    for f in ["aha-project.json", "report.json", "analysis.json"] {
        let x = std::fs::read(a.path().join(f)).map_err(|e| e.to_string())?;
        let y = std::fs::read(b.path().join(f)).map_err(|e| e.to_string())?;
        ensure!(x == y, "{f} differs between runs");
    }
    ensure!(first < Duration::from_secs(30), "one hiring run took {first:?}");
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(a.path().join("report.json")).unwrap()).map_err(|e| e.to_string())?;
    ensure!(report["totals"]["harms"].as_u64().unwrap_or(0) > 0, "empty report");
    Ok(format!("project, analysis and report byte-identical; one run {first:.1?}"))
}

/// Published values: (scenario, N, df, χ² in column order direction,
/// conditioning, frequency, severity, source).
const PUBLISHED_BEHAVIOR: [(&str, u64, u32, [f64; 5]); 5] = [
    ("communication-compliance", 1000, 7, [30.25, 37.03, 10.65, 10.57, 32.16]),
    ("content-moderation", 878, 7, [28.61, 35.70, 7.39, 4.95, 49.42]),
    ("disease-diagnosis", 920, 7, [12.36, 112.37, 8.75, 10.47, 30.46]),
    ("hiring", 833, 6, [14.33, 58.69, 5.05, 5.83, 10.66]),
    ("loan-application", 751, 5, [6.04, 24.64, 6.39, 2.67, 30.04]),
];
const PUBLISHED_CROSS: (f64, u32, u64) = (1577.0, 28, 4382);

fn analyze_files(files: &[PathBuf], work: &Path) -> Result<AnalysisReport, String> {
    let first = files[0].to_str().unwrap();
    let mut args = vec!["--project", first, "analyze", "--out", "reference-analysis.json"];
    for f in &files[1..] {
        args.push("--include");
        args.push(f.to_str().unwrap());
    }
    aha_ok(work, &args);
    serde_json::from_slice(&std::fs::read(work.join("reference-analysis.json")).unwrap()).map_err(|e| e.to_string())
}

fn check_shape(r: &AnalysisReport) -> Result<(), String> {
    ensure!(r.behavior_table.len() == 5, "{} behavior rows", r.behavior_table.len());
    for row in &r.behavior_table {
        let factors: Vec<Factor> = row.tests.iter().map(|c| c.factor).collect();
        ensure!(factors == Factor::WITHIN_SCENARIO, "{}: columns {factors:?}", row.scenario);
        ensure!(row.tests.iter().all(|c| c.statistic.is_some() && c.p_value.is_some()), "{}: missing test", row.scenario);
    }
    let cross = r.entries.iter().filter(|e| e.analysis == AnalysisKind::ChiSquareScenarios).count();
    ensure!(cross == 1, "{cross} cross-scenario tests");
    Ok(())
}

fn reference_values() -> Outcome {
    let work = tempfile::tempdir().unwrap();
    if let Some(list) = std::env::var_os("AHA_REFERENCE_CORPUS") {
        let files: Vec<PathBuf> = std::env::split_paths(&list).map(|p| std::fs::canonicalize(p).unwrap()).collect();
        ensure!(files.len() == 5, "AHA_REFERENCE_CORPUS lists {} projects, expected 5", files.len());
        let r = analyze_files(&files, work.path())?;
        check_shape(&r)?;
        for (id, n, df, chis) in PUBLISHED_BEHAVIOR {
            let row = r.behavior_table.iter().find(|x| x.scenario == id).ok_or(format!("no row for {id}"))?;
            ensure!(row.n == n && row.df == df, "{id}: N {} df {} vs {n}, {df}", row.n, row.df);
            for (cell, want) in row.tests.iter().zip(chis) {
                let got = cell.statistic.unwrap();
                ensure!((got - want).abs() <= 0.005, "{id} {}: {got:.3} vs {want}", cell.factor);
            }
        }
        let cross = r.entries.iter().find(|e| e.analysis == AnalysisKind::ChiSquareScenarios).unwrap();
        let res = cross.result.as_ref().ok_or("cross-scenario test failed")?;
        ensure!(res.df == PUBLISHED_CROSS.1 && res.n == PUBLISHED_CROSS.2, "cross df {} N {}", res.df, res.n);
        ensure!((res.statistic - PUBLISHED_CROSS.0).abs() <= 0.5 && res.p_value < 1e-4, "cross chi2 {}", res.statistic);
        return Ok("published behavior table and cross-scenario test reproduced".into());
    }
    let dirs: Vec<_> = (0..5).map(|_| tempfile::tempdir().unwrap()).collect();
    for (d, (id, _)) in dirs.iter().zip(SCENARIOS) {
        pipeline(d.path(), id, 3);
    }
    let files: Vec<PathBuf> = dirs.iter().map(|d| d.path().join("aha-project.json")).collect();
    let r = analyze_files(&files, work.path())?;
    check_shape(&r)?;
    let cross = r.entries.iter().find(|e| e.analysis == AnalysisKind::ChiSquareScenarios).unwrap();
    let df = cross.result.as_ref().map(|x| x.df).ok_or("cross-scenario test failed")?;
    ensure!(df == PUBLISHED_CROSS.1, "synthetic cross-scenario df {df}");
    Ok("shape only on a synthetic corpus (set AHA_REFERENCE_CORPUS for value agreement)".into())
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("matrix shape", matrix_shape),
        ("vignette golden suite", vignette_goldens),
        ("crowd-plan properties", crowd_plan),
        ("QC and requeue", qc_requeue),
        ("statistics oracle suite", statistics_oracle),
        ("roll-up semantics", roll_up_semantics),
        ("diversity dominance", diversity_dominance),
        ("end-to-end determinism", end_to_end),
        ("conditional reference-value check", reference_values),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            Err(e.downcast_ref::<String>().cloned().or(e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
