//! Filling matrix cells with model completions.

use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::mpsc;

use crate::clock::Clock;
use crate::completion::{Completion, QualityFlags, Source};
use crate::error::{CellFailure, Error, Result};
use crate::matrix::CellRef;
use crate::project::Project;
use crate::prompt::{build_llm_prompt, FewShotExample};
use crate::provider::{CompletionProvider, CompletionRequest, ModelParams, ProviderError, RetryPolicy};
use crate::vignette::render_vignette;

#[derive(Debug, Clone)]
pub struct HarvestOptions {
    pub params: ModelParams,
    pub parallelism: usize,
    pub seed: u64,
    pub retry: RetryPolicy,
    /// Invoke the checkpoint callback after this many finished cells.
    pub checkpoint_every: usize,
    pub clock: Clock,
}

impl Default for HarvestOptions {
    fn default() -> Self {
        Self {
            params: ModelParams::default(),
            parallelism: 1,
            seed: 0,
            retry: RetryPolicy::default(),
            checkpoint_every: 16,
            clock: Clock::System,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct HarvestSummary {
    pub cells_completed: usize,
    pub cells_skipped: usize,
    pub completions_added: usize,
    pub rejected: usize,
}

pub fn model_completion_id(cell: &CellRef, provider: &str, ordinal: u32) -> String {
    format!("m/{}/{}/{}/{:03}", cell.stakeholder_id, cell.variant.key(), provider, ordinal)
}

/// One provider call for one cell. Returns exactly `n_completions` records;
/// blank texts are kept and flagged rather than dropped.
pub fn complete_cell(
    provider: &dyn CompletionProvider,
    prompt: &str,
    cell: &CellRef,
    params: &ModelParams,
    retry: &RetryPolicy,
    seed: u64,
    clock: Clock,
) -> Result<Vec<Completion>> {
    params.validate()?;
    let request = CompletionRequest { prompt, params, seed };
    let texts = retry.call(|| provider.complete(&request))?;
    if texts.len() != params.n_completions as usize {
        return Err(ProviderError::Malformed(format!(
            "expected {} completions, got {}",
            params.n_completions,
            texts.len()
        ))
        .into());
    }
    let collected_at = clock.now();
    Ok(texts
        .into_iter()
        .enumerate()
        .map(|(i, raw)| {
            let text = raw.trim().to_string();
            let qc = if text.is_empty() { QualityFlags::empty() } else { QualityFlags::clean() };
            Completion {
                id: model_completion_id(cell, provider.name(), i as u32),
                stakeholder_id: cell.stakeholder_id.clone(),
                variant: cell.variant.clone(),
                ordinal: i as u32,
                text,
                source: Source::Model {
                    provider: provider.name().to_string(),
                    model_name: params.model_name.clone(),
                    temperature: params.temperature,
                    max_tokens: params.max_tokens,
                },
                collected_at: collected_at.clone(),
                qc,
            }
        })
        .collect())
}

/// Few-shot examples rendered against the scenario's clause slots.
pub fn rendered_examples(project: &Project) -> Result<Vec<FewShotExample>> {
    project
        .few_shot_examples
        .iter()
        .map(|e| {
            let s = project
                .stakeholder(&e.stakeholder)
                .ok_or_else(|| Error::UnknownId { kind: "stakeholder", id: e.stakeholder.clone() })?;
            Ok(FewShotExample {
                vignette: render_vignette(&project.scenario, s, &e.variant)?.text,
                completion: e.completion.clone(),
            })
        })
        .collect()
}

/// Completes every cell that does not yet hold `n_completions` completions
/// from this provider. Finished cells are appended as they arrive and the
/// checkpoint callback runs every `checkpoint_every` cells and at the end,
/// so an interrupted run resumes where it stopped.
pub fn complete_matrix(
    project: &mut Project,
    provider: &dyn CompletionProvider,
    options: &HarvestOptions,
    checkpoint: &mut dyn FnMut(&Project) -> Result<()>,
) -> Result<HarvestSummary> {
    options.params.validate()?;
    let matrix = project.require_vignettes()?.clone();
    let examples = rendered_examples(project)?;
    let row_stakeholders: Vec<_> = matrix
        .rows
        .iter()
        .map(|id| project.stakeholder(id).cloned().ok_or_else(|| Error::UnknownId { kind: "stakeholder", id: id.clone() }))
        .collect::<Result<_>>()?;

    let n = options.params.n_completions as usize;
    let mut summary = HarvestSummary::default();
    let mut pending = Vec::new();
    for i in 0..matrix.n_cells() {
        let cell = matrix.cell_ref(i);
        let done = project
            .completions
            .iter()
            .filter(|c| c.cell() == cell && matches!(&c.source, Source::Model { provider: p, .. } if p == provider.name()))
            .count();
        if done >= n {
            summary.cells_skipped += 1;
            continue;
        }
        if done > 0 {
            return Err(Error::Precondition(format!("cell {cell} holds a partial set of {done} completions")));
        }
        let prompt = build_llm_prompt(
            &project.scenario,
            &row_stakeholders,
            &examples,
            matrix.cells[i].vignette.as_deref().expect("vignettes checked"),
        )?;
        pending.push((cell, prompt));
    }

    let next = AtomicUsize::new(0);
    let abort = AtomicBool::new(false);
    let workers = options.parallelism.clamp(1, pending.len().max(1));
    let mut failures = Vec::new();
    let mut since_checkpoint = 0;
    std::thread::scope(|scope| -> Result<()> {
        let (tx, rx) = mpsc::channel();
        for _ in 0..workers {
            let tx = tx.clone();
            let (pending, next, abort) = (&pending, &next, &abort);
            scope.spawn(move || loop {
                if abort.load(Ordering::SeqCst) {
                    break;
                }
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some((cell, prompt)) = pending.get(i) else { break };
                let out = complete_cell(provider, prompt, cell, &options.params, &options.retry, options.seed, options.clock);
                if matches!(out, Err(Error::Provider(ProviderError::Auth(_)))) {
                    abort.store(true, Ordering::SeqCst);
                }
                if tx.send((cell.clone(), out)).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        for (cell, outcome) in rx {
            match outcome {
                Ok(completions) => {
                    summary.cells_completed += 1;
                    summary.completions_added += completions.len();
                    summary.rejected += completions.iter().filter(|c| !c.qc.accepted).count();
                    project.append_completions(completions)?;
                    since_checkpoint += 1;
                    if since_checkpoint >= options.checkpoint_every.max(1) {
                        checkpoint(project)?;
                        since_checkpoint = 0;
                    }
                }
                Err(e) => failures.push(CellFailure {
                    stakeholder: cell.stakeholder_id.clone(),
                    variant: cell.variant.key(),
                    error: Box::new(e),
                }),
            }
        }
        Ok(())
    })?;
    checkpoint(project)?;
    if !failures.is_empty() {
        return Err(Error::Cells(failures));
    }
    Ok(summary)
}
