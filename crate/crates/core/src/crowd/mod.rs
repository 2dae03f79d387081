//! Crowd tasks: planning, bundle export/import, quality checks and
//! re-judgment rounds.

mod bundle;
mod import;
mod plan;
mod qc;
mod simulate;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::completion::{ManualFlag, QualityFlags};
use crate::error::{Error, Result};
use crate::matrix::{CellRef, EthicalMatrix};

pub use bundle::{
    export_tasks_csv, export_tasks_json, read_annotations, read_responses_csv, read_responses_json, task_records,
    write_responses_csv, write_responses_json, TaskRecord, TaskVignette,
};
pub use import::{import_responses, requeue_rejected, rerun_quality_checks, ImportSummary};
pub use plan::{plan_assignments, AssignmentPlan, PlanOptions};
pub use qc::{apply_quality_checks, normalize_answer, QcConfig};
pub use simulate::{simulate_responses, SimulateOptions};

pub const ATTENTION_QUESTION: &str = "What is the color of the sky?";

/// Background questions shown after the vignettes, in their original order.
pub const DEMOGRAPHIC_QUESTIONS: [&str; 7] = [
    "Have you experienced discrimination on the basis of your race, ethnicity, gender, nationality, sexual orientation, ability or religious beliefs?",
    "Have you experienced any adverse impacts from any AI or computational systems you have had to use in the past?",
    "Do you have any experience with AI systems like the one in scenario above?",
    "How familiar are you with how AI systems like the one in the scenario above work?",
    "What is your age range?",
    "What is the color of the sky? (Attention check question)",
    "Please let us know if you have any comments/feedback for improving this task.",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrowdSettings {
    pub judgments_per_vignette: usize,
    pub vignettes_per_task: usize,
    pub max_tasks_per_judge: u32,
}

impl Default for CrowdSettings {
    fn default() -> Self {
        Self { judgments_per_vignette: 3, vignettes_per_task: 4, max_tasks_per_judge: 5 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrowdTask {
    pub task_id: String,
    pub scenario_id: String,
    /// 0 for the initial plan, then one per re-judgment round.
    pub round: u32,
    pub judge_slot: u32,
    pub cells: Vec<CellRef>,
}

/// Abstract judge; bound to a platform worker id by the first imported
/// response for one of its tasks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JudgeSlot {
    pub slot: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub worker_id: Option<String>,
    pub tasks_assigned: u32,
    pub capacity_remaining: u32,
    #[serde(default)]
    pub rejected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrowdResponse {
    pub task_id: String,
    pub judge_id: String,
    pub completions: Vec<String>,
    pub attention_answer: String,
    pub duration_seconds: f64,
    #[serde(default)]
    pub demographics: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManualAnnotation {
    pub judge_id: String,
    pub task_id: String,
    pub flag: ManualFlag,
}

/// Every imported response is kept, flagged or not.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredResponse {
    pub response: CrowdResponse,
    pub round: u32,
    pub judge_slot: u32,
    pub qc: QualityFlags,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CrowdState {
    #[serde(default)]
    pub settings: CrowdSettings,
    #[serde(default)]
    pub qc: QcConfig,
    #[serde(default)]
    pub tasks: Vec<CrowdTask>,
    #[serde(default)]
    pub judges: Vec<JudgeSlot>,
    #[serde(default)]
    pub responses: Vec<StoredResponse>,
    #[serde(default)]
    pub annotations: Vec<ManualAnnotation>,
}

impl CrowdState {
    pub fn task(&self, task_id: &str) -> Option<&CrowdTask> {
        self.tasks.iter().find(|t| t.task_id == task_id)
    }

    pub fn current_round(&self) -> Option<u32> {
        self.tasks.iter().map(|t| t.round).max()
    }

    pub fn pending_tasks(&self) -> Vec<&CrowdTask> {
        let answered: BTreeSet<&str> = self.responses.iter().map(|r| r.response.task_id.as_str()).collect();
        self.tasks.iter().filter(|t| !answered.contains(t.task_id.as_str())).collect()
    }

    /// Recomputes the judge ledger from tasks and stored responses.
    pub fn refresh_ledger(&mut self) {
        let cap = self.settings.max_tasks_per_judge;
        let mut rejected_workers = BTreeSet::new();
        for r in &self.responses {
            if !r.qc.accepted {
                rejected_workers.insert(r.response.judge_id.clone());
            }
        }
        for j in &mut self.judges {
            j.tasks_assigned = self.tasks.iter().filter(|t| t.judge_slot == j.slot).count() as u32;
            j.worker_id = self
                .responses
                .iter()
                .find(|r| r.judge_slot == j.slot)
                .map(|r| r.response.judge_id.clone());
            j.rejected = j.worker_id.as_ref().is_some_and(|w| rejected_workers.contains(w));
            j.capacity_remaining = if j.rejected { 0 } else { cap.saturating_sub(j.tasks_assigned) };
        }
    }

    pub fn validate(&self, matrix: Option<&EthicalMatrix>) -> Result<()> {
        if self.tasks.is_empty() && self.responses.is_empty() {
            return Ok(());
        }
        let matrix = matrix.ok_or_else(|| Error::schema("crowd.tasks", "crowd tasks present without a matrix"))?;
        let slots: BTreeSet<u32> = self.judges.iter().map(|j| j.slot).collect();
        let mut ids = BTreeSet::new();
        for t in &self.tasks {
            if !ids.insert(t.task_id.as_str()) {
                return Err(Error::DuplicateId { kind: "task", id: t.task_id.clone() });
            }
            if t.scenario_id != matrix.scenario_id {
                return Err(Error::schema(format!("crowd.tasks[{}].scenario_id", t.task_id), "does not match matrix"));
            }
            if !slots.contains(&t.judge_slot) {
                return Err(Error::UnknownId { kind: "judge slot", id: t.judge_slot.to_string() });
            }
            for c in &t.cells {
                if matrix.locate(c).is_none() {
                    return Err(Error::UnknownId { kind: "cell", id: c.to_string() });
                }
            }
        }
        for r in &self.responses {
            if !ids.contains(r.response.task_id.as_str()) {
                return Err(Error::UnknownId { kind: "task", id: r.response.task_id.clone() });
            }
        }
        Ok(())
    }
}
