use serde::{Deserialize, Serialize};

use super::{CrowdResponse, ManualAnnotation};
use crate::completion::QualityFlags;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QcConfig {
    pub accepted_sky_answers: Vec<String>,
    pub speed_threshold_seconds: f64,
}

impl Default for QcConfig {
    fn default() -> Self {
        Self { accepted_sky_answers: vec!["blue".into()], speed_threshold_seconds: 5.0 }
    }
}

/// Lowercase, collapse whitespace, drop trailing punctuation.
pub fn normalize_answer(answer: &str) -> String {
    let joined = answer.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase();
    joined.trim_end_matches(['.', '!', '?', ',']).trim_end().to_string()
}

/// Pure function of the response, the config and the annotations.
pub fn apply_quality_checks(
    response: &CrowdResponse,
    config: &QcConfig,
    annotations: &[ManualAnnotation],
) -> QualityFlags {
    let speed = response.duration_seconds < config.speed_threshold_seconds;
    let answer = normalize_answer(&response.attention_answer);
    let attention = !config.accepted_sky_answers.iter().any(|a| normalize_answer(a) == answer);
    let manual = annotations
        .iter()
        .find(|a| a.judge_id == response.judge_id && a.task_id == response.task_id)
        .map(|a| a.flag);
    QualityFlags::new(speed, attention, manual, false)
}
