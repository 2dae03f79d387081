//! Prompt layouts for few-shot harm completion and one-shot stakeholder
//! generation, plus the parser for generated stakeholder lists.

use crate::error::{Error, Result};
use crate::scenario::{Scenario, Stakeholder, StakeholderKind};

pub const STAKEHOLDER_CUE: &str = "Stakeholders:";
pub const EXAMPLE_HEADER: &str = "Example:";
pub const SCENARIO_PREFIX: &str = "Scenario: ";

/// A vignette paired with a hand-written completion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FewShotExample {
    pub vignette: String,
    pub completion: String,
}

/// Scenario block, numbered stakeholder list, example blocks, then the
/// target vignette as the final line. Blocks are separated by blank lines.
pub fn build_llm_prompt(
    scenario: &Scenario,
    stakeholders: &[Stakeholder],
    examples: &[FewShotExample],
    vignette: &str,
) -> Result<String> {
    if examples.is_empty() {
        return Err(Error::Precondition("few-shot example list is empty".into()));
    }
    let mut blocks = Vec::with_capacity(examples.len() + 3);
    blocks.push(format!("{SCENARIO_PREFIX}{}", scenario.full_description()));
    let list: Vec<String> = stakeholders
        .iter()
        .enumerate()
        .map(|(i, s)| format!("{}. {}", i + 1, s.display_name))
        .collect();
    blocks.push(format!("{STAKEHOLDER_CUE}\n{}", list.join("\n")));
    for ex in examples {
        blocks.push(format!("{EXAMPLE_HEADER}\n{} {}", ex.vignette, ex.completion.trim()));
    }
    blocks.push(vignette.to_string());
    Ok(blocks.join("\n\n"))
}

/// One exemplar block, then the target scenario, then the cue line.
pub fn build_stakeholder_prompt(
    target: &Scenario,
    exemplar: &Scenario,
    exemplar_stakeholders: &[Stakeholder],
) -> String {
    let list: Vec<String> = exemplar_stakeholders.iter().map(|s| format!("- {}", s.display_name)).collect();
    format!(
        "{SCENARIO_PREFIX}{}\n{STAKEHOLDER_CUE}\n{}\n\n{SCENARIO_PREFIX}{}\n{STAKEHOLDER_CUE}",
        exemplar.full_description(),
        list.join("\n"),
        target.full_description(),
    )
}

/// Extracts stakeholder names from a completion. Accepts one name per line
/// (optionally bulleted or numbered) or `;`-separated names; stops at the
/// next "Scenario:" block if the model kept going.
pub fn parse_stakeholder_list(raw: &str) -> Result<Vec<String>> {
    let mut names: Vec<String> = Vec::new();
    for line in raw.lines() {
        let line = line.trim();
        if line.starts_with(SCENARIO_PREFIX.trim_end()) {
            break;
        }
        for part in line.split(';') {
            let name = strip_marker(part.trim()).trim().trim_end_matches(['.', ',']).trim();
            if name.is_empty() || name.eq_ignore_ascii_case(STAKEHOLDER_CUE.trim_end_matches(':')) {
                continue;
            }
            if !names.iter().any(|n| n.eq_ignore_ascii_case(name)) {
                names.push(name.to_string());
            }
        }
    }
    if names.is_empty() {
        return Err(Error::Unparseable { reason: "no stakeholder names found".into(), raw: raw.to_string() });
    }
    Ok(names)
}

fn strip_marker(s: &str) -> &str {
    let s = s.trim_start_matches(['-', '*', '•']).trim_start();
    let digits = s.chars().take_while(char::is_ascii_digit).count();
    if digits > 0 {
        let rest = &s[digits..];
        if let Some(r) = rest.strip_prefix('.').or_else(|| rest.strip_prefix(')')) {
            return r.trim_start();
        }
    }
    s
}

/// Unapproved stakeholder records for generated names.
pub fn draft_stakeholders(names: &[String]) -> Vec<Stakeholder> {
    let mut used: Vec<String> = Vec::new();
    names
        .iter()
        .map(|name| {
            let base = crate::slug(name.strip_prefix("the ").unwrap_or(name)).replace('-', "_");
            let base = if base.is_empty() { "stakeholder".to_string() } else { base };
            let mut id = base.clone();
            let mut k = 2;
            while used.contains(&id) {
                id = format!("{base}_{k}");
                k += 1;
            }
            used.push(id.clone());
            Stakeholder {
                id,
                display_name: name.clone(),
                perspective_phrase: name.clone(),
                subject: Default::default(),
                kind: StakeholderKind::Indirect,
                demographic_group: None,
                approved: false,
            }
        })
        .collect()
}
