//! Report document consumed by the review UI: harms grouped by stakeholder,
//! then category, then subcategory, with precomputed facet counts.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::analysis::{analyze, AnalyzeOptions, ContrastSet, DiversityReport};
use crate::error::{Error, Result};
use crate::matrix::BehaviorVariant;
use crate::project::Project;
use crate::scenario::StakeholderKind;
use crate::taxonomy::{coded_corpus, CodedCompletion, MeaningfulnessReport, Taxonomy};

pub const REPORT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub report_version: u32,
    pub scenario: ReportScenario,
    pub totals: Totals,
    pub categories: Vec<CategoryCount>,
    pub stakeholders: Vec<StakeholderFacet>,
    pub contrasts: Vec<ContrastSet>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diversity: Option<DiversityReport>,
    pub meaningfulness: MeaningfulnessReport,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportScenario {
    pub id: String,
    pub name: String,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Totals {
    /// Distinct harms listed anywhere in the report.
    pub harms: u64,
    pub stakeholders: u64,
    pub model_harms: u64,
    pub crowd_harms: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryCount {
    pub id: String,
    pub name: String,
    pub definition: String,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StakeholderFacet {
    pub id: String,
    pub display_name: String,
    pub kind: StakeholderKind,
    pub harm_count: u64,
    pub categories: Vec<CategoryFacet>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryFacet {
    pub id: String,
    pub name: String,
    pub count: u64,
    pub subcategories: Vec<SubcategoryFacet>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubcategoryFacet {
    pub id: String,
    pub name: String,
    pub definition: String,
    pub count: u64,
    pub harms: Vec<HarmEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HarmEntry {
    pub completion_id: String,
    pub text: String,
    /// "model" or "crowd".
    pub source: String,
    pub variant: BehaviorVariant,
    pub variant_key: String,
    pub variant_label: String,
}

/// Lists accepted completions with harm codes only; completions coded (even
/// partly) as not meaningful are left out.
pub fn emit_report(project: &Project, taxonomy: &Taxonomy) -> Result<Report> {
    let corpus = coded_corpus(project, taxonomy);
    if corpus.is_empty() {
        return Err(Error::NothingCoded);
    }
    let harms: Vec<&CodedCompletion> = corpus.iter().filter(|c| c.is_meaningful()).collect();
    let order: Vec<String> = match &project.matrix {
        Some(m) => m.rows.clone(),
        None => project.stakeholders.iter().map(|s| s.id.clone()).collect(),
    };

    let entry = |c: &CodedCompletion| {
        let text = project.completion(&c.completion_id).map(|x| x.text.clone()).unwrap_or_default();
        HarmEntry {
            completion_id: c.completion_id.clone(),
            text,
            source: c.source.clone(),
            variant: c.variant.clone(),
            variant_key: c.variant.key(),
            variant_label: c.variant.to_string(),
        }
    };

    let stakeholders = order
        .iter()
        .map(|sid| {
            let s = project.stakeholder(sid).ok_or_else(|| Error::UnknownId { kind: "stakeholder", id: sid.clone() })?;
            let mine: Vec<&&CodedCompletion> = harms.iter().filter(|c| &c.stakeholder_id == sid).collect();
            let categories = taxonomy
                .meaningful_categories()
                .filter_map(|cat| {
                    let in_cat: Vec<&&CodedCompletion> = mine.iter().copied().filter(|c| c.categories.contains(&cat.id)).collect();
                    if in_cat.is_empty() {
                        return None;
                    }
                    let subcategories = taxonomy
                        .subcategories_of(&cat.id)
                        .filter_map(|sub| {
                            let listed: Vec<HarmEntry> =
                                in_cat.iter().filter(|c| c.subcategories.contains(&sub.id)).map(|c| entry(c)).collect();
                            (!listed.is_empty()).then(|| SubcategoryFacet {
                                id: sub.id.clone(),
                                name: sub.name.clone(),
                                definition: sub.definition.clone(),
                                count: listed.len() as u64,
                                harms: listed,
                            })
                        })
                        .collect();
                    Some(CategoryFacet { id: cat.id.clone(), name: cat.name.clone(), count: in_cat.len() as u64, subcategories })
                })
                .collect();
            Ok(StakeholderFacet {
                id: s.id.clone(),
                display_name: s.display_name.clone(),
                kind: s.kind,
                harm_count: mine.len() as u64,
                categories,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let categories = taxonomy
        .meaningful_categories()
        .map(|cat| CategoryCount {
            id: cat.id.clone(),
            name: cat.name.clone(),
            definition: cat.definition.clone(),
            count: harms.iter().filter(|c| c.categories.contains(&cat.id)).count() as u64,
        })
        .collect();

    let analysis = analyze(&[project], taxonomy, AnalyzeOptions::default())?;
    let listed: BTreeSet<&str> = harms.iter().map(|c| c.completion_id.as_str()).collect();
    Ok(Report {
        report_version: REPORT_VERSION,
        scenario: ReportScenario {
            id: project.scenario.id.clone(),
            name: project.scenario.name.clone(),
            description: project.scenario.full_description(),
        },
        totals: Totals {
            harms: listed.len() as u64,
            stakeholders: stakeholders.len() as u64,
            model_harms: harms.iter().filter(|c| c.source == "model").count() as u64,
            crowd_harms: harms.iter().filter(|c| c.source == "crowd").count() as u64,
        },
        categories,
        stakeholders,
        contrasts: analysis.contrasts,
        diversity: analysis.diversity.into_iter().next(),
        meaningfulness: analysis.meaningfulness.into_iter().next().map(|m| m.report).expect("one scenario analysed"),
    })
}

impl Report {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}
