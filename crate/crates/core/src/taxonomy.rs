//! Harm taxonomy and human-supplied code assignments.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::completion::Completion;
use crate::error::{Error, Result};
use crate::matrix::BehaviorVariant;
use crate::project::Project;

pub const NOT_MEANINGFUL: &str = "not-meaningful";
pub const NOT_A_HARM: &str = "not-a-harm";
pub const NONSENSICAL: &str = "nonsensical";

const BUNDLED: &str = include_str!("../taxonomy/harms.json");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HarmCategory {
    pub id: String,
    pub name: String,
    pub definition: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HarmSubcategory {
    pub id: String,
    pub name: String,
    pub definition: String,
    pub parent: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Taxonomy {
    #[serde(default = "one")]
    pub schema_version: u32,
    pub categories: Vec<HarmCategory>,
    pub subcategories: Vec<HarmSubcategory>,
}

fn one() -> u32 {
    1
}

impl Taxonomy {
    pub fn bundled() -> Self {
        load_taxonomy(BUNDLED).expect("bundled taxonomy is valid")
    }

    pub fn category(&self, id: &str) -> Option<&HarmCategory> {
        self.categories.iter().find(|c| c.id == id)
    }

    pub fn subcategory(&self, id: &str) -> Option<&HarmSubcategory> {
        self.subcategories.iter().find(|s| s.id == id)
    }

    /// Resolves a subcategory by id or case-insensitive name.
    pub fn resolve(&self, key: &str) -> Option<&HarmSubcategory> {
        let k = key.trim();
        self.subcategory(k).or_else(|| self.subcategories.iter().find(|s| s.name.eq_ignore_ascii_case(k)))
    }

    pub fn parent_of(&self, subcategory_id: &str) -> Option<&str> {
        self.subcategory(subcategory_id).map(|s| s.parent.as_str())
    }

    pub fn subcategories_of<'a>(&'a self, category_id: &'a str) -> impl Iterator<Item = &'a HarmSubcategory> + 'a {
        self.subcategories.iter().filter(move |s| s.parent == category_id)
    }

    /// Position of a category in taxonomy order.
    pub fn category_rank(&self, id: &str) -> usize {
        self.categories.iter().position(|c| c.id == id).unwrap_or(usize::MAX)
    }

    /// Categories that count as harms (everything but not-meaningful).
    pub fn meaningful_categories(&self) -> impl Iterator<Item = &HarmCategory> {
        self.categories.iter().filter(|c| c.id != NOT_MEANINGFUL)
    }

    pub fn validate(&self) -> Result<()> {
        if self.categories.is_empty() {
            return Err(Error::Taxonomy("no categories".into()));
        }
        let mut ids = BTreeSet::new();
        for c in &self.categories {
            if !ids.insert(c.id.as_str()) {
                return Err(Error::DuplicateId { kind: "category", id: c.id.clone() });
            }
        }
        let cats = ids.clone();
        for s in &self.subcategories {
            if !ids.insert(s.id.as_str()) {
                return Err(Error::DuplicateId { kind: "subcategory", id: s.id.clone() });
            }
            if !cats.contains(s.parent.as_str()) {
                return Err(Error::Taxonomy(format!("subcategory '{}' has unknown parent '{}'", s.id, s.parent)));
            }
        }
        Ok(())
    }
}

pub fn load_taxonomy(document: &str) -> Result<Taxonomy> {
    let t: Taxonomy = serde_json::from_str(document)
        .map_err(|e| Error::schema(format!("line {} column {}", e.line(), e.column()), e.to_string()))?;
    t.validate()?;
    Ok(t)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeAssignment {
    pub completion_id: String,
    pub coder_id: String,
    pub subcategory_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CodingOutcome {
    pub applied: usize,
    /// Accepted completions without any code.
    pub worklist: Vec<String>,
}

pub fn read_assignments(document: &str) -> Result<Vec<CodeAssignment>> {
    if document.trim().is_empty() {
        return Ok(Vec::new());
    }
    serde_json::from_str(document)
        .map_err(|e| Error::schema(format!("line {} column {}", e.line(), e.column()), e.to_string()))
}

/// Validates all assignments, canonicalizes subcategory names to ids and
/// attaches them. A later assignment by the same coder for the same
/// completion replaces the earlier one, so re-applying a file is a no-op.
pub fn apply_codes(project: &mut Project, taxonomy: &Taxonomy, assignments: Vec<CodeAssignment>) -> Result<CodingOutcome> {
    let mut resolved = Vec::with_capacity(assignments.len());
    for a in assignments {
        let c = project
            .completion(&a.completion_id)
            .ok_or_else(|| Error::UnknownId { kind: "completion", id: a.completion_id.clone() })?;
        if !c.is_accepted() {
            return Err(Error::RejectedCompletion(a.completion_id.clone()));
        }
        if a.subcategory_ids.is_empty() {
            return Err(Error::Taxonomy(format!("assignment for '{}' has no subcategories", a.completion_id)));
        }
        let mut ids = BTreeSet::new();
        for key in &a.subcategory_ids {
            let s = taxonomy.resolve(key).ok_or_else(|| Error::UnknownId { kind: "subcategory", id: key.clone() })?;
            ids.insert(s.id.clone());
        }
        resolved.push(CodeAssignment { completion_id: a.completion_id, coder_id: a.coder_id, subcategory_ids: ids.into_iter().collect() });
    }
    let applied = resolved.len();
    for a in resolved {
        project.codes.retain(|b| !(b.completion_id == a.completion_id && b.coder_id == a.coder_id));
        project.codes.push(a);
    }
    project.codes.sort_by(|a, b| (&a.completion_id, &a.coder_id).cmp(&(&b.completion_id, &b.coder_id)));
    let coded: BTreeSet<&str> = project.codes.iter().map(|a| a.completion_id.as_str()).collect();
    let worklist = project
        .completions
        .iter()
        .filter(|c| c.is_accepted() && !coded.contains(c.id.as_str()))
        .map(|c| c.id.clone())
        .collect();
    Ok(CodingOutcome { applied, worklist })
}

/// An accepted completion with the union of its codes across coders.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodedCompletion {
    pub completion_id: String,
    pub scenario_id: String,
    pub stakeholder_id: String,
    pub variant: BehaviorVariant,
    /// "model" or "crowd".
    pub source: String,
    pub subcategories: BTreeSet<String>,
    /// Distinct parents of `subcategories`.
    pub categories: BTreeSet<String>,
}

impl CodedCompletion {
    pub fn is_not_meaningful(&self) -> bool {
        self.categories.contains(NOT_MEANINGFUL)
    }

    /// Carries harm codes only; mixed completions are left out of
    /// distributions.
    pub fn is_meaningful(&self) -> bool {
        !self.is_not_meaningful()
    }
}

fn corpus_from(project: &Project, taxonomy: &Taxonomy, coder: Option<&str>) -> Vec<CodedCompletion> {
    let mut codes: BTreeMap<&str, BTreeSet<String>> = BTreeMap::new();
    for a in project.codes.iter().filter(|a| coder.is_none_or(|c| a.coder_id == c)) {
        codes.entry(a.completion_id.as_str()).or_default().extend(a.subcategory_ids.iter().cloned());
    }
    project
        .completions
        .iter()
        .filter(|c| c.is_accepted())
        .filter_map(|c: &Completion| {
            let subs = codes.get(c.id.as_str())?.clone();
            let categories = subs.iter().filter_map(|s| taxonomy.parent_of(s).map(str::to_string)).collect();
            Some(CodedCompletion {
                completion_id: c.id.clone(),
                scenario_id: project.scenario.id.clone(),
                stakeholder_id: c.stakeholder_id.clone(),
                variant: c.variant.clone(),
                source: c.source.label().to_string(),
                subcategories: subs,
                categories,
            })
        })
        .collect()
}

/// Union of all coders' assignments.
pub fn coded_corpus(project: &Project, taxonomy: &Taxonomy) -> Vec<CodedCompletion> {
    corpus_from(project, taxonomy, None)
}

pub fn coded_corpus_for_coder(project: &Project, taxonomy: &Taxonomy, coder_id: &str) -> Vec<CodedCompletion> {
    corpus_from(project, taxonomy, Some(coder_id))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RollUp {
    /// (category id, count) in taxonomy order, zero counts included.
    pub counts: Vec<(String, u64)>,
    pub total_observations: u64,
    pub n_completions: u64,
}

impl RollUp {
    pub fn count(&self, category: &str) -> u64 {
        self.counts.iter().find(|(c, _)| c == category).map_or(0, |(_, n)| *n)
    }
}

/// Each distinct parent category counts once per completion.
pub fn roll_up<'a>(corpus: impl IntoIterator<Item = &'a CodedCompletion>, taxonomy: &Taxonomy) -> RollUp {
    let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
    let mut n = 0;
    for c in corpus {
        n += 1;
        for cat in &c.categories {
            *counts.entry(cat.as_str()).or_default() += 1;
        }
    }
    let counts: Vec<(String, u64)> =
        taxonomy.categories.iter().map(|c| (c.id.clone(), counts.get(c.id.as_str()).copied().unwrap_or(0))).collect();
    RollUp { total_observations: counts.iter().map(|(_, n)| n).sum(), counts, n_completions: n }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeaningfulnessReport {
    pub n_coded: u64,
    pub n_not_meaningful: u64,
    pub fraction: f64,
    /// Not-meaningful completions per source label.
    pub by_source: BTreeMap<String, u64>,
    /// Not-meaningful completions per not-meaningful subcode.
    pub by_subcode: BTreeMap<String, u64>,
    /// Share of not-meaningful completions coded nonsensical.
    pub nonsensical_share: f64,
}

pub fn meaningfulness_report<'a>(corpus: impl IntoIterator<Item = &'a CodedCompletion>, taxonomy: &Taxonomy) -> MeaningfulnessReport {
    let nm_codes: BTreeSet<&str> = taxonomy.subcategories_of(NOT_MEANINGFUL).map(|s| s.id.as_str()).collect();
    let mut r = MeaningfulnessReport {
        n_coded: 0,
        n_not_meaningful: 0,
        fraction: 0.0,
        by_source: BTreeMap::new(),
        by_subcode: nm_codes.iter().map(|c| (c.to_string(), 0)).collect(),
        nonsensical_share: 0.0,
    };
    for c in corpus {
        r.n_coded += 1;
        if !c.is_not_meaningful() {
            continue;
        }
        r.n_not_meaningful += 1;
        *r.by_source.entry(c.source.clone()).or_default() += 1;
        for s in c.subcategories.iter().filter(|s| nm_codes.contains(s.as_str())) {
            *r.by_subcode.entry(s.clone()).or_default() += 1;
        }
    }
    if r.n_coded > 0 {
        r.fraction = r.n_not_meaningful as f64 / r.n_coded as f64;
    }
    if r.n_not_meaningful > 0 {
        r.nonsensical_share = r.by_subcode.get(NONSENSICAL).copied().unwrap_or(0) as f64 / r.n_not_meaningful as f64;
    }
    r
}
