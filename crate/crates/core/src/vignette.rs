//! Second-person vignette rendering.
//!
//! Sentence skeleton:
//!
//! ```text
//! Imagine you are {perspective}. If the system [often ]determines that
//! {decision} when {reality}, {subject} may {be harmed | experience {label}} because...
//! ```
//!
//! `decision` is the subject clause for a false positive and the negation
//! clause for a false negative. `reality` states the opposite truth, or the
//! severity clause for egregious errors. Accumulated variants use the
//! plural clause forms (and "often" when the scenario asks for it).

use serde::{Deserialize, Serialize};

use crate::error::{CellFailure, Error, Result};
use crate::matrix::{BehaviorVariant, CellRef, EthicalMatrix, ErrorDirection, Frequency, HarmConditioning, Severity};
use crate::scenario::{ClauseForms, Scenario, Stakeholder};

pub const OPENER: &str = "Imagine you are ";
pub const ENDING: &str = "because...";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vignette {
    pub cell: CellRef,
    pub text: String,
}

/// Default clause forms for the variant's number, with matching
/// per-stakeholder overrides applied from least to most specific.
pub fn resolve_clauses(scenario: &Scenario, stakeholder_id: &str, variant: &BehaviorVariant) -> ClauseForms {
    let mut forms = match variant.frequency {
        Frequency::OneTime => scenario.clauses.singular.clone(),
        Frequency::Accumulated => scenario.clauses.plural.clone(),
    };
    let mut matching: Vec<(usize, usize)> = scenario
        .overrides
        .iter()
        .enumerate()
        .filter(|(_, o)| o.matches(stakeholder_id, variant))
        .map(|(i, o)| (o.specificity(), i))
        .collect();
    matching.sort();
    for (_, i) in matching {
        scenario.overrides[i].clauses.apply(&mut forms);
    }
    forms
}

pub fn render_vignette(
    scenario: &Scenario,
    stakeholder: &Stakeholder,
    variant: &BehaviorVariant,
) -> Result<Vignette> {
    let missing = |slot: &'static str| Error::MissingClause {
        stakeholder: stakeholder.id.clone(),
        variant: variant.key(),
        slot,
    };
    let forms = resolve_clauses(scenario, &stakeholder.id, variant);
    let decision = match variant.error_direction {
        ErrorDirection::FalsePositive => &forms.subject_clause,
        ErrorDirection::FalseNegative => &forms.negation_clause,
    };
    let reality = match (variant.severity, variant.error_direction) {
        (Severity::Unspecified, ErrorDirection::FalsePositive) => Some(&forms.fails_clause),
        (Severity::Unspecified, ErrorDirection::FalseNegative) => Some(&forms.holds_clause),
        (Severity::Egregious, ErrorDirection::FalsePositive) => forms.severity_false_positive.as_ref(),
        (Severity::Egregious, ErrorDirection::FalseNegative) => forms.severity_false_negative.as_ref(),
    };
    let reality = match (reality, variant.severity, variant.error_direction) {
        (Some(r), _, _) if !r.trim().is_empty() => r,
        (_, Severity::Egregious, ErrorDirection::FalsePositive) => return Err(missing("severity_false_positive")),
        (_, Severity::Egregious, ErrorDirection::FalseNegative) => return Err(missing("severity_false_negative")),
        (_, Severity::Unspecified, ErrorDirection::FalsePositive) => return Err(missing("fails_clause")),
        (_, Severity::Unspecified, ErrorDirection::FalseNegative) => return Err(missing("holds_clause")),
    };
    if decision.trim().is_empty() {
        return Err(missing(match variant.error_direction {
            ErrorDirection::FalsePositive => "subject_clause",
            ErrorDirection::FalseNegative => "negation_clause",
        }));
    }
    let verb = if scenario.often_accumulated && variant.frequency == Frequency::Accumulated {
        "often determines"
    } else {
        "determines"
    };
    let harm = match &variant.harm_conditioning {
        HarmConditioning::Unspecified => "be harmed".to_string(),
        HarmConditioning::Specified(label) => format!("experience {label}"),
    };
    let text = format!(
        "{OPENER}{}. If the system {verb} that {decision} when {reality}, {} may {harm} {ENDING}",
        stakeholder.perspective_phrase,
        stakeholder.subject.phrase(),
    );
    if text.contains('{') || text.contains('}') {
        return Err(Error::Precondition(format!(
            "unresolved placeholder in vignette for ({}, {})",
            stakeholder.id,
            variant.key()
        )));
    }
    Ok(Vignette { cell: CellRef::new(stakeholder.id.clone(), variant.clone()), text })
}

/// Fills every cell's vignette. On any failure the matrix is left untouched
/// and all failing cells are reported.
pub fn render_all(matrix: &mut EthicalMatrix, scenario: &Scenario, stakeholders: &[Stakeholder]) -> Result<()> {
    let mut rendered = Vec::with_capacity(matrix.n_cells());
    let mut failures = Vec::new();
    for i in 0..matrix.n_cells() {
        let cell = matrix.cell_ref(i);
        let Some(stakeholder) = stakeholders.iter().find(|s| s.id == cell.stakeholder_id) else {
            failures.push(CellFailure {
                stakeholder: cell.stakeholder_id.clone(),
                variant: cell.variant.key(),
                error: Box::new(Error::UnknownId { kind: "stakeholder", id: cell.stakeholder_id.clone() }),
            });
            continue;
        };
        match render_vignette(scenario, stakeholder, &cell.variant) {
            Ok(v) => rendered.push(v.text),
            Err(e) => failures.push(CellFailure {
                stakeholder: cell.stakeholder_id.clone(),
                variant: cell.variant.key(),
                error: Box::new(e),
            }),
        }
    }
    if !failures.is_empty() {
        return Err(Error::Cells(failures));
    }
    for (cell, text) in matrix.cells.iter_mut().zip(rendered) {
        cell.vignette = Some(text);
    }
    Ok(())
}
