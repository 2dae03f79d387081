//! Deployment scenarios, their stakeholders, and the clause slots the
//! vignette engine composes.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{BehaviorVariant, ErrorDirection, Frequency, HarmConditioning, Severity};

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

/// Decision-clause wording for one grammatical number.
///
/// For a false positive the vignette reads "{subject_clause} when
/// {fails_clause}"; for a false negative, "{negation_clause} when
/// {holds_clause}". Egregious errors replace the reality clause with the
/// direction's severity clause.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClauseForms {
    pub subject_clause: String,
    pub negation_clause: String,
    pub holds_clause: String,
    pub fails_clause: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub severity_false_positive: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub severity_false_negative: Option<String>,
}

/// Partial [`ClauseForms`]; present fields replace the defaults.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClausePatch {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subject_clause: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub negation_clause: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub holds_clause: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fails_clause: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub severity_false_positive: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub severity_false_negative: Option<String>,
}

impl ClausePatch {
    pub(crate) fn apply(&self, forms: &mut ClauseForms) {
        let set = |dst: &mut String, src: &Option<String>| {
            if let Some(s) = src {
                dst.clone_from(s);
            }
        };
        set(&mut forms.subject_clause, &self.subject_clause);
        set(&mut forms.negation_clause, &self.negation_clause);
        set(&mut forms.holds_clause, &self.holds_clause);
        set(&mut forms.fails_clause, &self.fails_clause);
        if self.severity_false_positive.is_some() {
            forms.severity_false_positive.clone_from(&self.severity_false_positive);
        }
        if self.severity_false_negative.is_some() {
            forms.severity_false_negative.clone_from(&self.severity_false_negative);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClauseSlots {
    pub singular: ClauseForms,
    pub plural: ClauseForms,
}

/// Replacement clauses for one stakeholder, applied to every variant that
/// matches the given dimension values (absent dimensions match anything).
/// More specific patterns are applied after less specific ones.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClauseOverride {
    pub stakeholder: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error_direction: Option<ErrorDirection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frequency: Option<Frequency>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub severity: Option<Severity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub harm_specified: Option<bool>,
    pub clauses: ClausePatch,
}

impl ClauseOverride {
    pub fn matches(&self, stakeholder_id: &str, v: &BehaviorVariant) -> bool {
        self.stakeholder == stakeholder_id
            && self.error_direction.is_none_or(|d| d == v.error_direction)
            && self.frequency.is_none_or(|f| f == v.frequency)
            && self.severity.is_none_or(|s| s == v.severity)
            && self.harm_specified.is_none_or(|h| {
                h == matches!(v.harm_conditioning, HarmConditioning::Specified(_))
            })
    }

    pub fn specificity(&self) -> usize {
        usize::from(self.error_direction.is_some())
            + usize::from(self.frequency.is_some())
            + usize::from(self.severity.is_some())
            + usize::from(self.harm_specified.is_some())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scenario {
    pub id: String,
    pub name: String,
    pub description: String,
    /// How predictions are acted on, when the description alone leaves it open.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub use_clause: Option<String>,
    pub clauses: ClauseSlots,
    /// Labels for the harm-specified columns.
    pub harm_labels: Vec<String>,
    /// Render accumulated variants as "If the system often determines ...".
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub often_accumulated: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub overrides: Vec<ClauseOverride>,
}

impl Scenario {
    /// Description followed by the use clause, if any.
    pub fn full_description(&self) -> String {
        match &self.use_clause {
            Some(u) => format!("{} {}", self.description, u),
            None => self.description.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        non_empty("scenario.id", &self.id)?;
        non_empty("scenario.name", &self.name)?;
        non_empty("scenario.description", &self.description)?;
        if let Some(u) = &self.use_clause {
            non_empty("scenario.use_clause", u)?;
        }
        for (number, forms) in [("singular", &self.clauses.singular), ("plural", &self.clauses.plural)] {
            let f = |slot: &str| format!("scenario.clauses.{number}.{slot}");
            non_empty(&f("subject_clause"), &forms.subject_clause)?;
            non_empty(&f("negation_clause"), &forms.negation_clause)?;
            non_empty(&f("holds_clause"), &forms.holds_clause)?;
            non_empty(&f("fails_clause"), &forms.fails_clause)?;
        }
        if self.harm_labels.is_empty() {
            return Err(Error::schema("scenario.harm_labels", "at least one label is required"));
        }
        for (i, l) in self.harm_labels.iter().enumerate() {
            non_empty(&format!("scenario.harm_labels[{i}]"), l)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GrammaticalSubject {
    /// "you may be harmed"
    #[default]
    SecondPerson,
    /// "{noun phrase} may be harmed", e.g. "the community"
    Group(String),
}

impl GrammaticalSubject {
    pub fn phrase(&self) -> &str {
        match self {
            GrammaticalSubject::SecondPerson => "you",
            GrammaticalSubject::Group(g) => g,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StakeholderKind {
    Direct,
    Indirect,
}

fn is_true(b: &bool) -> bool {
    *b
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stakeholder {
    pub id: String,
    pub display_name: String,
    /// Completes "Imagine you are …".
    pub perspective_phrase: String,
    #[serde(default)]
    pub subject: GrammaticalSubject,
    pub kind: StakeholderKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub demographic_group: Option<String>,
    /// Generated drafts stay unapproved until a human signs off.
    #[serde(default = "yes", skip_serializing_if = "is_true")]
    pub approved: bool,
}

impl Stakeholder {
    pub fn validate(&self, field: &str) -> Result<()> {
        non_empty(&format!("{field}.id"), &self.id)?;
        non_empty(&format!("{field}.display_name"), &self.display_name)?;
        non_empty(&format!("{field}.perspective_phrase"), &self.perspective_phrase)?;
        if let GrammaticalSubject::Group(g) = &self.subject {
            non_empty(&format!("{field}.subject.group"), g)?;
        }
        Ok(())
    }
}

/// A hand-written completion for one cell, used as a few-shot example.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExampleSpec {
    pub stakeholder: String,
    pub variant: BehaviorVariant,
    pub completion: String,
}

/// Scenario document: the `scenario`/`stakeholders` portion of a project
/// file, plus optional few-shot examples.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    pub scenario: Scenario,
    #[serde(default)]
    pub stakeholders: Vec<Stakeholder>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub few_shot_examples: Vec<ExampleSpec>,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != CONFIG_SCHEMA_VERSION {
            return Err(Error::SchemaVersion(self.schema_version));
        }
        self.scenario.validate()?;
        validate_stakeholders(&self.stakeholders)?;
        let ids: BTreeSet<&str> = self.stakeholders.iter().map(|s| s.id.as_str()).collect();
        for (i, o) in self.scenario.overrides.iter().enumerate() {
            if !ids.contains(o.stakeholder.as_str()) {
                return Err(Error::schema(
                    format!("scenario.overrides[{i}].stakeholder"),
                    format!("unknown stakeholder '{}'", o.stakeholder),
                ));
            }
        }
        for (i, e) in self.few_shot_examples.iter().enumerate() {
            if !ids.contains(e.stakeholder.as_str()) {
                return Err(Error::schema(
                    format!("few_shot_examples[{i}].stakeholder"),
                    format!("unknown stakeholder '{}'", e.stakeholder),
                ));
            }
            e.variant.validate()?;
            non_empty(&format!("few_shot_examples[{i}].completion"), &e.completion)?;
        }
        Ok(())
    }

    pub fn stakeholder(&self, id: &str) -> Option<&Stakeholder> {
        self.stakeholders.iter().find(|s| s.id == id)
    }
}

pub fn validate_stakeholders(stakeholders: &[Stakeholder]) -> Result<()> {
    let mut seen = BTreeSet::new();
    for (i, s) in stakeholders.iter().enumerate() {
        s.validate(&format!("stakeholders[{i}]"))?;
        if !seen.insert(s.id.as_str()) {
            return Err(Error::DuplicateId { kind: "stakeholder", id: s.id.clone() });
        }
    }
    Ok(())
}

fn non_empty(field: &str, value: &str) -> Result<()> {
    if value.trim().is_empty() {
        Err(Error::schema(field, "must be non-empty"))
    } else {
        Ok(())
    }
}

/// Parses and validates a scenario document.
pub fn load_scenario(document: &str) -> Result<ScenarioConfig> {
    let config: ScenarioConfig = serde_json::from_str(document).map_err(|e| {
        Error::schema(format!("line {} column {}", e.line(), e.column()), e.to_string())
    })?;
    config.validate()?;
    Ok(config)
}

/// Scenario configs shipped with the crate, by id.
pub const BUNDLED: [(&str, &str); 5] = [
    ("communication-compliance", include_str!("../scenarios/communication-compliance.json")),
    ("content-moderation", include_str!("../scenarios/content-moderation.json")),
    ("disease-diagnosis", include_str!("../scenarios/disease-diagnosis.json")),
    ("hiring", include_str!("../scenarios/hiring.json")),
    ("loan-application", include_str!("../scenarios/loan-application.json")),
];

pub fn bundled_ids() -> impl Iterator<Item = &'static str> {
    BUNDLED.iter().map(|(id, _)| *id)
}

pub fn bundled_document(id: &str) -> Option<&'static str> {
    BUNDLED.iter().find(|(k, _)| *k == id).map(|(_, doc)| *doc)
}

pub fn bundled(id: &str) -> Result<ScenarioConfig> {
    let doc = bundled_document(id)
        .ok_or_else(|| Error::UnknownId { kind: "bundled scenario", id: id.to_string() })?;
    load_scenario(doc)
}
