use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::plan::{first_fit, task_id};
use super::{apply_quality_checks, CrowdResponse, CrowdTask, ManualAnnotation, StoredResponse};
use crate::clock::Clock;
use crate::completion::{Completion, Source};
use crate::error::{Error, Result};
use crate::project::Project;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ImportSummary {
    pub responses: usize,
    pub accepted_responses: usize,
    pub completions_added: usize,
    pub accepted_completions: usize,
}

pub fn crowd_completion_id(task_id: &str, position: usize) -> String {
    format!("c/{task_id}/{}", position + 1)
}

/// Validates the whole bundle first, then stores every response with its QC
/// flags and appends one completion per vignette. Completions of flagged
/// responses are kept but carry `accepted = false`.
pub fn import_responses(
    project: &mut Project,
    responses: Vec<CrowdResponse>,
    annotations: Vec<ManualAnnotation>,
    clock: Clock,
) -> Result<ImportSummary> {
    project.require_matrix()?;
    let state = &project.crowd;
    let mut seen_tasks: BTreeSet<String> = state.responses.iter().map(|r| r.response.task_id.clone()).collect();
    let mut slot_worker: BTreeMap<u32, String> =
        state.responses.iter().map(|r| (r.judge_slot, r.response.judge_id.clone())).collect();
    let mut worker_slot: BTreeMap<String, u32> = slot_worker.iter().map(|(s, w)| (w.clone(), *s)).collect();
    let rejected_in: BTreeMap<&str, u32> = state
        .responses
        .iter()
        .filter(|r| !r.qc.accepted)
        .map(|r| (r.response.judge_id.as_str(), r.round))
        .collect();

    let mut staged = Vec::with_capacity(responses.len());
    for (i, mut resp) in responses.into_iter().enumerate() {
        let row = i + 1;
        let bad = |message: String| Error::BadResponse { row, message };
        let task = state.task(&resp.task_id).ok_or_else(|| bad(format!("unknown task_id '{}'", resp.task_id)))?;
        let arity = task.cells.len();
        while resp.completions.len() > arity && resp.completions.last().is_some_and(|t| t.trim().is_empty()) {
            resp.completions.pop();
        }
        if resp.completions.len() != arity {
            return Err(bad(format!(
                "task '{}' has {arity} vignettes but the row holds {} completions",
                task.task_id,
                resp.completions.len()
            )));
        }
        if !resp.duration_seconds.is_finite() || resp.duration_seconds < 0.0 {
            return Err(bad(format!("duration_seconds must be a non-negative number, got {}", resp.duration_seconds)));
        }
        if resp.judge_id.trim().is_empty() {
            return Err(bad("judge_id is empty".into()));
        }
        if !seen_tasks.insert(resp.task_id.clone()) {
            return Err(bad(format!("task '{}' already has a response", resp.task_id)));
        }
        if let Some(&round) = rejected_in.get(resp.judge_id.as_str()) {
            if task.round > round {
                return Err(bad(format!("worker '{}' was rejected in round {round} and cannot re-judge", resp.judge_id)));
            }
        }
        match (slot_worker.get(&task.judge_slot), worker_slot.get(&resp.judge_id)) {
            (Some(w), _) if *w != resp.judge_id => {
                return Err(bad(format!("judge slot {} is already bound to worker '{w}'", task.judge_slot)));
            }
            (_, Some(&s)) if s != task.judge_slot => {
                return Err(bad(format!("worker '{}' is already bound to judge slot {s}", resp.judge_id)));
            }
            _ => {
                slot_worker.insert(task.judge_slot, resp.judge_id.clone());
                worker_slot.insert(resp.judge_id.clone(), task.judge_slot);
            }
        }
        staged.push((task.clone(), resp));
    }

    let state = &mut project.crowd;
    for a in annotations {
        state.annotations.retain(|b| !(b.judge_id == a.judge_id && b.task_id == a.task_id));
        state.annotations.push(a);
    }
    let collected_at = clock.now();
    let mut summary = ImportSummary::default();
    let mut new_completions = Vec::new();
    for (task, resp) in staged {
        let qc = apply_quality_checks(&resp, &state.qc, &state.annotations);
        summary.responses += 1;
        summary.accepted_responses += usize::from(qc.accepted);
        for (k, (cell, raw)) in task.cells.iter().zip(&resp.completions).enumerate() {
            let text = raw.trim().to_string();
            let flags = qc.with_empty(text.is_empty());
            summary.accepted_completions += usize::from(flags.accepted);
            new_completions.push(Completion {
                id: crowd_completion_id(&task.task_id, k),
                stakeholder_id: cell.stakeholder_id.clone(),
                variant: cell.variant.clone(),
                ordinal: k as u32,
                text,
                source: Source::Crowd { judge_id: resp.judge_id.clone(), task_id: task.task_id.clone() },
                collected_at: collected_at.clone(),
                qc: flags,
            });
        }
        state.responses.push(StoredResponse { response: resp, round: task.round, judge_slot: task.judge_slot, qc });
    }
    state.refresh_ledger();
    summary.completions_added = new_completions.len();
    project.append_completions(new_completions)?;
    Ok(summary)
}

/// Recomputes every stored response's flags from the stored annotations and
/// config, and propagates them to the crowd completions. Idempotent.
pub fn rerun_quality_checks(project: &mut Project) {
    let state = &mut project.crowd;
    let mut by_task = BTreeMap::new();
    for r in &mut state.responses {
        r.qc = apply_quality_checks(&r.response, &state.qc, &state.annotations);
        by_task.insert(r.response.task_id.clone(), r.qc.clone());
    }
    state.refresh_ledger();
    for c in &mut project.completions {
        if let Source::Crowd { task_id, .. } = &c.source {
            if let Some(qc) = by_task.get(task_id) {
                c.qc = qc.with_empty(c.text.trim().is_empty());
            }
        }
    }
}

/// Schedules a new round covering each vignette's shortfall
/// (judgments_per_vignette − accepted − pending). Tasks hold distinct
/// vignettes and may be shorter than the usual size when the shortfall is
/// small. Flagged workers receive nothing; fresh slots are opened as needed.
pub fn requeue_rejected(project: &mut Project, seed: u64) -> Result<Vec<CrowdTask>> {
    let matrix = project.require_matrix()?;
    let state = &project.crowd;
    if state.tasks.is_empty() {
        return Err(Error::Precondition("no crowd plan yet (run `crowd plan`)".into()));
    }
    let k = state.settings.judgments_per_vignette;
    let size = state.settings.vignettes_per_task;
    let cap = state.settings.max_tasks_per_judge;
    let n = matrix.n_cells();

    let mut covered = vec![0usize; n];
    for c in project.completions.iter().filter(|c| c.source.is_crowd() && c.is_accepted()) {
        if let Some(i) = matrix.locate(&c.cell()) {
            covered[i] += 1;
        }
    }
    for t in state.pending_tasks() {
        for cell in &t.cells {
            if let Some(i) = matrix.locate(cell) {
                covered[i] += 1;
            }
        }
    }
    let mut deficit: Vec<usize> = covered.iter().map(|&c| k.saturating_sub(c)).collect();
    if deficit.iter().all(|&d| d == 0) {
        return Ok(Vec::new());
    }

    let mut rank: Vec<usize> = (0..n).collect();
    rank.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut packed = Vec::new();
    loop {
        let mut open: Vec<usize> = rank.iter().copied().filter(|&i| deficit[i] > 0).collect();
        if open.is_empty() {
            break;
        }
        // Largest shortfall first keeps the number of rounds per vignette low.
        open.sort_by_key(|&i| std::cmp::Reverse(deficit[i]));
        open.truncate(size);
        for &i in &open {
            deficit[i] -= 1;
        }
        packed.push(open);
    }

    let mut slots: Vec<_> = state
        .judges
        .iter()
        .map(|j| {
            let seen: BTreeSet<usize> = state
                .tasks
                .iter()
                .filter(|t| t.judge_slot == j.slot)
                .flat_map(|t| t.cells.iter().filter_map(|c| matrix.locate(c)))
                .collect();
            (j.clone(), seen)
        })
        .collect();
    let round = state.current_round().map_or(0, |r| r + 1);
    let scenario_id = matrix.scenario_id.clone();
    let tasks: Vec<CrowdTask> = packed
        .iter()
        .enumerate()
        .map(|(i, cells)| CrowdTask {
            task_id: task_id(round, i + 1),
            scenario_id: scenario_id.clone(),
            round,
            judge_slot: first_fit(&mut slots, cells, cap),
            cells: cells.iter().map(|&c| matrix.cell_ref(c)).collect(),
        })
        .collect();
    let state = &mut project.crowd;
    state.judges = slots.into_iter().map(|(j, _)| j).collect();
    state.tasks.extend(tasks.iter().cloned());
    state.refresh_ledger();
    Ok(tasks)
}
