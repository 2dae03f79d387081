#![allow(dead_code)]

use std::collections::BTreeSet;

use aha_core::clock::Clock;
use aha_core::crowd::{self, CrowdSettings, PlanOptions, SimulateOptions};
use aha_core::harvest::{complete_matrix, HarvestOptions};
use aha_core::matrix::{
    build_matrix, enumerate_variants_multi, BehaviorVariant, ErrorDirection, Frequency, HarmConditioning, Severity,
};
use aha_core::project::Project;
use aha_core::provider::{MockProvider, RetryPolicy};
use aha_core::scenario::bundled;
use aha_core::taxonomy::{CodeAssignment, CodedCompletion, Taxonomy, NOT_MEANINGFUL};
use aha_core::vignette::render_all;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub const CLOCK: Clock = Clock::Fixed(1_700_000_000);

pub const SCENARIOS: [&str; 5] =
    ["communication-compliance", "content-moderation", "disease-diagnosis", "hiring", "loan-application"];

/// Bundled scenario with its matrix built and rendered.
pub fn rendered(id: &str) -> Project {
    let mut p = Project::from_config(bundled(id).unwrap());
    let variants = enumerate_variants_multi(&p.scenario.harm_labels).unwrap();
    let mut m = build_matrix(&p.scenario, &p.stakeholders, &variants).unwrap();
    render_all(&mut m, &p.scenario, &p.stakeholders).unwrap();
    p.matrix = Some(m);
    p
}

pub fn harvest(p: &mut Project, seed: u64, parallelism: usize) {
    let options = HarvestOptions { seed, parallelism, retry: RetryPolicy::none(), clock: CLOCK, ..Default::default() };
    complete_matrix(p, &MockProvider::new(), &options, &mut |_| Ok(())).unwrap();
}

/// Plan, one flagged round, requeue, one clean round.
pub fn crowdsource(p: &mut Project, seed: u64, flag_fraction: f64) {
    let plan =
        crowd::plan_assignments(p.matrix.as_ref().unwrap(), &PlanOptions { settings: CrowdSettings::default(), seed })
            .unwrap();
    p.crowd.tasks = plan.tasks;
    p.crowd.judges = plan.judges;
    p.crowd.refresh_ledger();
    let tasks = p.crowd.tasks.clone();
    let r0 = crowd::simulate_responses(&p.crowd, &tasks, &SimulateOptions { seed, flag_fraction });
    crowd::import_responses(p, r0, vec![], CLOCK).unwrap();
    let again = crowd::requeue_rejected(p, seed).unwrap();
    let r1 = crowd::simulate_responses(&p.crowd, &again, &SimulateOptions { seed: seed + 1, flag_fraction: 0.0 });
    crowd::import_responses(p, r1, vec![], CLOCK).unwrap();
}

fn rng_for(seed: u64, key: &str) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(key.as_bytes());
    ChaCha8Rng::from_seed(h.finalize().into())
}

/// Stand-in for human coding: each accepted completion gets one to three
/// subcategories, about 7% of them not meaningful. A pure function of the
/// seed and the completion id.
pub fn scripted_codes(p: &Project, taxonomy: &Taxonomy, seed: u64) -> Vec<CodeAssignment> {
    let harms: Vec<&str> =
        taxonomy.subcategories.iter().filter(|s| s.parent != NOT_MEANINGFUL).map(|s| s.id.as_str()).collect();
    let nm: Vec<&str> = taxonomy.subcategories_of(NOT_MEANINGFUL).map(|s| s.id.as_str()).collect();
    p.completions
        .iter()
        .filter(|c| c.is_accepted())
        .map(|c| {
            let mut rng = rng_for(seed, &c.id);
            let ids: BTreeSet<&str> = if rng.gen_bool(0.07) {
                [*nm.choose(&mut rng).unwrap()].into()
            } else {
                let n = rng.gen_range(1..=3);
                harms.choose_multiple(&mut rng, n).copied().collect()
            };
            CodeAssignment {
                completion_id: c.id.clone(),
                coder_id: "coder-1".into(),
                subcategory_ids: ids.into_iter().map(String::from).collect(),
            }
        })
        .collect()
}

pub fn variant(fp: bool, acc: bool, egr: bool, label: Option<&str>) -> BehaviorVariant {
    BehaviorVariant::new(
        if fp { ErrorDirection::FalsePositive } else { ErrorDirection::FalseNegative },
        if acc { Frequency::Accumulated } else { Frequency::OneTime },
        if egr { Severity::Egregious } else { Severity::Unspecified },
        label.map_or(HarmConditioning::Unspecified, |l| HarmConditioning::Specified(l.into())),
    )
}

/// Hand-built coded completion; categories are derived from the bundled taxonomy.
pub fn coded(id: &str, stakeholder: &str, v: BehaviorVariant, source: &str, subs: &[&str]) -> CodedCompletion {
    let t = Taxonomy::bundled();
    let subcategories: BTreeSet<String> = subs.iter().map(|s| s.to_string()).collect();
    let categories = subcategories.iter().map(|s| t.parent_of(s).expect("known subcategory").to_string()).collect();
    CodedCompletion {
        completion_id: id.into(),
        scenario_id: "fixture".into(),
        stakeholder_id: stakeholder.into(),
        variant: v,
        source: source.into(),
        subcategories,
        categories,
    }
}
