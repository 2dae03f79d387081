use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{CrowdResponse, CrowdTask, ManualAnnotation, ATTENTION_QUESTION, DEMOGRAPHIC_QUESTIONS};
use crate::error::{Error, Result};
use crate::matrix::{BehaviorVariant, EthicalMatrix};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskVignette {
    pub stakeholder_id: String,
    pub variant: BehaviorVariant,
    pub vignette: String,
}

/// One task as handed to the crowd platform.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskRecord {
    pub task_id: String,
    pub scenario_id: String,
    pub vignettes: Vec<TaskVignette>,
    pub attention_question: String,
    pub questions: Vec<String>,
}

pub fn task_records(tasks: &[CrowdTask], matrix: &EthicalMatrix) -> Result<Vec<TaskRecord>> {
    tasks
        .iter()
        .map(|t| {
            let vignettes = t
                .cells
                .iter()
                .map(|c| {
                    let text = matrix
                        .locate(c)
                        .and_then(|i| matrix.cells[i].vignette.clone())
                        .ok_or_else(|| Error::Precondition(format!("no rendered vignette for {c}")))?;
                    Ok(TaskVignette { stakeholder_id: c.stakeholder_id.clone(), variant: c.variant.clone(), vignette: text })
                })
                .collect::<Result<_>>()?;
            Ok(TaskRecord {
                task_id: t.task_id.clone(),
                scenario_id: t.scenario_id.clone(),
                vignettes,
                attention_question: ATTENTION_QUESTION.to_string(),
                questions: DEMOGRAPHIC_QUESTIONS.iter().map(|q| q.to_string()).collect(),
            })
        })
        .collect()
}

/// `width` is the number of vignette columns; shorter tasks leave trailing
/// cells blank.
pub fn export_tasks_csv<W: Write>(records: &[TaskRecord], width: usize, out: W) -> Result<()> {
    let width = records.iter().map(|r| r.vignettes.len()).max().unwrap_or(0).max(width);
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["task_id".to_string(), "scenario_id".to_string()];
    header.extend((1..=width).map(|i| format!("vignette_{i}")));
    header.push("attention_question".into());
    header.extend((1..=DEMOGRAPHIC_QUESTIONS.len()).map(|i| format!("q{i}")));
    w.write_record(&header)?;
    for r in records {
        let mut row = vec![r.task_id.clone(), r.scenario_id.clone()];
        row.extend((0..width).map(|i| r.vignettes.get(i).map(|v| v.vignette.clone()).unwrap_or_default()));
        row.push(r.attention_question.clone());
        row.extend(r.questions.iter().cloned());
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io("<task bundle>", e))?;
    Ok(())
}

pub fn export_tasks_json(records: &[TaskRecord]) -> Result<String> {
    let mut s = serde_json::to_string_pretty(records)?;
    s.push('\n');
    Ok(s)
}

pub fn write_responses_csv<W: Write>(responses: &[CrowdResponse], width: usize, out: W) -> Result<()> {
    let width = responses.iter().map(|r| r.completions.len()).max().unwrap_or(0).max(width);
    let demo_keys: Vec<String> = {
        let mut keys: Vec<String> = responses.iter().flat_map(|r| r.demographics.keys().cloned()).collect();
        keys.sort();
        keys.dedup();
        keys
    };
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["task_id".to_string(), "judge_id".to_string()];
    header.extend((1..=width).map(|i| format!("completion_{i}")));
    header.extend(["attention_answer".to_string(), "duration_seconds".to_string()]);
    header.extend(demo_keys.iter().cloned());
    w.write_record(&header)?;
    for r in responses {
        let mut row = vec![r.task_id.clone(), r.judge_id.clone()];
        row.extend((0..width).map(|i| r.completions.get(i).cloned().unwrap_or_default()));
        row.push(r.attention_answer.clone());
        row.push(r.duration_seconds.to_string());
        row.extend(demo_keys.iter().map(|k| r.demographics.get(k).cloned().unwrap_or_default()));
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io("<response bundle>", e))?;
    Ok(())
}

pub fn write_responses_json(responses: &[CrowdResponse]) -> Result<String> {
    let mut s = serde_json::to_string_pretty(responses)?;
    s.push('\n');
    Ok(s)
}

/// Columns: task_id, judge_id, completion_1..N, attention_answer,
/// duration_seconds; any other non-empty column is kept as a demographic
/// answer.
pub fn read_responses_csv<R: Read>(input: R) -> Result<Vec<CrowdResponse>> {
    let mut rdr = csv::Reader::from_reader(input);
    let header = rdr.headers()?.clone();
    let find = |name: &str| header.iter().position(|h| h.trim() == name);
    let required = |name: &str| find(name).ok_or_else(|| Error::schema(name, "missing column in response bundle"));
    let (task_col, judge_col) = (required("task_id")?, required("judge_id")?);
    let (answer_col, duration_col) = (required("attention_answer")?, required("duration_seconds")?);
    let mut completion_cols: Vec<(usize, usize)> = header
        .iter()
        .enumerate()
        .filter_map(|(i, h)| h.trim().strip_prefix("completion_")?.parse::<usize>().ok().map(|n| (n, i)))
        .collect();
    completion_cols.sort();
    let used: Vec<usize> = [task_col, judge_col, answer_col, duration_col]
        .into_iter()
        .chain(completion_cols.iter().map(|&(_, i)| i))
        .collect();

    let mut out = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let row = i + 1;
        let record = record?;
        let get = |c: usize| record.get(c).unwrap_or("").to_string();
        let duration_raw = get(duration_col);
        let duration_seconds = duration_raw.trim().parse::<f64>().map_err(|_| Error::BadResponse {
            row,
            message: format!("duration_seconds '{duration_raw}' is not a number"),
        })?;
        let demographics: BTreeMap<String, String> = header
            .iter()
            .enumerate()
            .filter(|(c, _)| !used.contains(c))
            .filter_map(|(c, h)| {
                let v = record.get(c)?.trim();
                (!v.is_empty()).then(|| (h.trim().to_string(), v.to_string()))
            })
            .collect();
        out.push(CrowdResponse {
            task_id: get(task_col).trim().to_string(),
            judge_id: get(judge_col).trim().to_string(),
            completions: completion_cols.iter().map(|&(_, c)| get(c)).collect(),
            attention_answer: get(answer_col),
            duration_seconds,
            demographics,
        });
    }
    Ok(out)
}

pub fn read_responses_json(document: &str) -> Result<Vec<CrowdResponse>> {
    serde_json::from_str(document)
        .map_err(|e| Error::schema(format!("line {} column {}", e.line(), e.column()), e.to_string()))
}

pub fn read_annotations(document: &str) -> Result<Vec<ManualAnnotation>> {
    serde_json::from_str(document)
        .map_err(|e| Error::schema(format!("line {} column {}", e.line(), e.column()), e.to_string()))
}
