//! One-shot stakeholder generation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prompt::{build_stakeholder_prompt, draft_stakeholders, parse_stakeholder_list};
use crate::provider::{CompletionProvider, CompletionRequest, ModelParams, RetryPolicy};
use crate::scenario::{validate_stakeholders, Scenario, Stakeholder};

/// Provider-generated stakeholders awaiting human review.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StakeholderDraft {
    pub raw_completion: String,
    pub stakeholders: Vec<Stakeholder>,
}

pub fn generate_stakeholders(
    scenario: &Scenario,
    provider: &dyn CompletionProvider,
    exemplar_scenario: &Scenario,
    exemplar_stakeholders: &[Stakeholder],
    params: &ModelParams,
    retry: &RetryPolicy,
    seed: u64,
) -> Result<StakeholderDraft> {
    if exemplar_scenario.id == scenario.id {
        return Err(Error::Precondition(format!(
            "exemplar scenario '{}' must differ from the target scenario",
            scenario.id
        )));
    }
    if exemplar_stakeholders.is_empty() {
        return Err(Error::Precondition("exemplar stakeholder list is empty".into()));
    }
    let prompt = build_stakeholder_prompt(scenario, exemplar_scenario, exemplar_stakeholders);
    let single = ModelParams { n_completions: 1, ..params.clone() };
    let request = CompletionRequest { prompt: &prompt, params: &single, seed };
    let texts = retry.call(|| provider.complete(&request))?;
    let raw = texts.into_iter().next().unwrap_or_default();
    let names = parse_stakeholder_list(&raw)?;
    Ok(StakeholderDraft { raw_completion: raw, stakeholders: draft_stakeholders(&names) })
}

/// Marks reviewed stakeholders as approved. `edited` replaces the draft list
/// when the reviewer changed it.
pub fn approve(draft: &StakeholderDraft, edited: Option<Vec<Stakeholder>>) -> Result<Vec<Stakeholder>> {
    let mut list = edited.unwrap_or_else(|| draft.stakeholders.clone());
    for s in &mut list {
        s.approved = true;
    }
    validate_stakeholders(&list)?;
    Ok(list)
}
