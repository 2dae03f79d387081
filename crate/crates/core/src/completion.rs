use serde::{Deserialize, Serialize};

use crate::matrix::{BehaviorVariant, CellRef};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ManualFlag {
    Nonsense,
    Irrelevant,
}

/// Quality-control outcome. A completion is accepted iff no flag is set.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QualityFlags {
    #[serde(default)]
    pub speed_flag: bool,
    #[serde(default)]
    pub attention_flag: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manual_flag: Option<ManualFlag>,
    /// Text was empty after trimming.
    #[serde(default)]
    pub empty_flag: bool,
    pub accepted: bool,
}

impl QualityFlags {
    pub fn new(speed_flag: bool, attention_flag: bool, manual_flag: Option<ManualFlag>, empty_flag: bool) -> Self {
        let accepted = !speed_flag && !attention_flag && manual_flag.is_none() && !empty_flag;
        Self { speed_flag, attention_flag, manual_flag, empty_flag, accepted }
    }

    pub fn clean() -> Self {
        Self::new(false, false, None, false)
    }

    pub fn empty() -> Self {
        Self::new(false, false, None, true)
    }

    /// Merges response-level flags with a per-text emptiness check.
    pub fn with_empty(&self, empty: bool) -> Self {
        Self::new(self.speed_flag, self.attention_flag, self.manual_flag, self.empty_flag || empty)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Source {
    Model { provider: String, model_name: String, temperature: f64, max_tokens: u32 },
    Crowd { judge_id: String, task_id: String },
}

impl Source {
    pub fn is_model(&self) -> bool {
        matches!(self, Source::Model { .. })
    }

    pub fn is_crowd(&self) -> bool {
        matches!(self, Source::Crowd { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            Source::Model { .. } => "model",
            Source::Crowd { .. } => "crowd",
        }
    }
}

/// One harvested harm description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Completion {
    pub id: String,
    pub stakeholder_id: String,
    pub variant: BehaviorVariant,
    /// Position among the completions produced by one request or response.
    pub ordinal: u32,
    pub text: String,
    pub source: Source,
    pub collected_at: String,
    pub qc: QualityFlags,
}

impl Completion {
    pub fn cell(&self) -> CellRef {
        CellRef::new(self.stakeholder_id.clone(), self.variant.clone())
    }

    pub fn is_accepted(&self) -> bool {
        self.qc.accepted
    }
}

/// Which completions an analysis looks at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceFilter {
    Model,
    Crowd,
    Combined,
}

impl SourceFilter {
    pub fn admits(&self, source: &Source) -> bool {
        match self {
            SourceFilter::Model => source.is_model(),
            SourceFilter::Crowd => source.is_crowd(),
            SourceFilter::Combined => true,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepted_iff_no_flags() {
        assert!(QualityFlags::clean().accepted);
        assert!(!QualityFlags::empty().accepted);
        assert!(!QualityFlags::new(true, false, None, false).accepted);
        assert!(!QualityFlags::new(false, true, None, false).accepted);
        assert!(!QualityFlags::new(false, false, Some(ManualFlag::Irrelevant), false).accepted);
        assert!(!QualityFlags::clean().with_empty(true).accepted);
    }
}
