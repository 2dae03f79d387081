//! Single-file JSON project: scenario, stakeholders, matrix, completions,
//! crowd state, codes, analyses and a run log.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::AnalysisReport;
use crate::completion::Completion;
use crate::crowd::CrowdState;
use crate::error::{Error, Result};
use crate::generate::StakeholderDraft;
use crate::matrix::EthicalMatrix;
use crate::scenario::{validate_stakeholders, ExampleSpec, Scenario, ScenarioConfig, Stakeholder};
use crate::taxonomy::{CodeAssignment, Taxonomy};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunEvent {
    pub seq: u64,
    pub timestamp: String,
    pub command: String,
    pub args: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Project {
    pub schema_version: u32,
    pub scenario: Scenario,
    pub stakeholders: Vec<Stakeholder>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stakeholder_draft: Option<StakeholderDraft>,
    #[serde(default)]
    pub few_shot_examples: Vec<ExampleSpec>,
    #[serde(default)]
    pub matrix: Option<EthicalMatrix>,
    #[serde(default)]
    pub completions: Vec<Completion>,
    #[serde(default)]
    pub crowd: CrowdState,
    /// Set when codes were applied against a non-bundled taxonomy.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub taxonomy: Option<Taxonomy>,
    #[serde(default)]
    pub codes: Vec<CodeAssignment>,
    #[serde(default)]
    pub analyses: Option<AnalysisReport>,
    #[serde(default)]
    pub run_log: Vec<RunEvent>,
}

impl Project {
    pub fn from_config(config: ScenarioConfig) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            scenario: config.scenario,
            stakeholders: config.stakeholders,
            stakeholder_draft: None,
            few_shot_examples: config.few_shot_examples,
            matrix: None,
            completions: Vec::new(),
            crowd: CrowdState::default(),
            taxonomy: None,
            codes: Vec::new(),
            analyses: None,
            run_log: Vec::new(),
        }
    }

    pub fn from_json(document: &str) -> Result<Self> {
        let project: Project = serde_json::from_str(document).map_err(|e| {
            Error::schema(format!("line {} column {}", e.line(), e.column()), e.to_string())
        })?;
        if project.schema_version != SCHEMA_VERSION {
            return Err(Error::SchemaVersion(project.schema_version));
        }
        project.validate()?;
        Ok(project)
    }

    /// Canonical serialization: pretty JSON with a trailing newline.
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let doc = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&doc)
    }

    /// Writes atomically (temp file + rename in the same directory).
    pub fn save(&self, path: &Path) -> Result<()> {
        let doc = self.to_json()?;
        let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
        let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
        tmp.write_all(doc.as_bytes()).map_err(|e| Error::io(tmp.path(), e))?;
        // Temp files are created owner-only; keep the existing file's mode.
        let perms = match std::fs::metadata(path) {
            Ok(m) => m.permissions(),
            Err(_) => default_permissions(),
        };
        tmp.as_file().set_permissions(perms).map_err(|e| Error::io(tmp.path(), e))?;
        tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
        Ok(())
    }

    /// The taxonomy codes were applied against.
    pub fn taxonomy(&self) -> Taxonomy {
        self.taxonomy.clone().unwrap_or_else(Taxonomy::bundled)
    }

    pub fn stakeholder(&self, id: &str) -> Option<&Stakeholder> {
        self.stakeholders.iter().find(|s| s.id == id)
    }

    pub fn completion(&self, id: &str) -> Option<&Completion> {
        self.completions.iter().find(|c| c.id == id)
    }

    pub fn require_matrix(&self) -> Result<&EthicalMatrix> {
        self.matrix.as_ref().ok_or_else(|| Error::Precondition("matrix not built yet (run `matrix build`)".into()))
    }

    pub fn require_vignettes(&self) -> Result<&EthicalMatrix> {
        let m = self.require_matrix()?;
        if m.cells.iter().any(|c| c.vignette.is_none()) {
            return Err(Error::Precondition("vignettes not rendered yet (run `vignettes render`)".into()));
        }
        Ok(m)
    }

    pub fn log_event(&mut self, timestamp: String, command: impl Into<String>, args: Vec<String>, seed: Option<u64>) {
        let seq = self.run_log.last().map_or(0, |e| e.seq + 1);
        self.run_log.push(RunEvent { seq, timestamp, command: command.into(), args, seed });
    }

    /// Appends completions to the store and to their cells, then restores
    /// canonical order. Every completion must address an existing cell and
    /// carry a fresh id.
    pub fn append_completions(&mut self, new: Vec<Completion>) -> Result<()> {
        let matrix = self.matrix.as_mut().ok_or_else(|| Error::Precondition("matrix not built".into()))?;
        let mut ids: BTreeSet<String> = self.completions.iter().map(|c| c.id.clone()).collect();
        let mut located = Vec::with_capacity(new.len());
        for c in &new {
            let idx = matrix.locate(&c.cell()).ok_or_else(|| Error::UnknownId { kind: "cell", id: c.cell().to_string() })?;
            if !ids.insert(c.id.clone()) {
                return Err(Error::DuplicateId { kind: "completion", id: c.id.clone() });
            }
            located.push(idx);
        }
        for (c, idx) in new.into_iter().zip(located) {
            matrix.cells[idx].completion_ids.push(c.id.clone());
            self.completions.push(c);
        }
        self.normalize();
        Ok(())
    }

    /// Sorts completions by (cell, source kind, id) and mirrors that order in
    /// each cell's id list, so the file does not depend on arrival order.
    pub fn normalize(&mut self) {
        let Some(matrix) = self.matrix.as_mut() else { return };
        let index: BTreeMap<_, usize> = (0..matrix.n_cells()).map(|i| (matrix.cell_ref(i), i)).collect();
        self.completions.sort_by_cached_key(|c| {
            (index.get(&c.cell()).copied().unwrap_or(usize::MAX), u8::from(c.source.is_crowd()), c.id.clone())
        });
        for cell in &mut matrix.cells {
            cell.completion_ids.clear();
        }
        for c in &self.completions {
            if let Some(&i) = index.get(&c.cell()) {
                matrix.cells[i].completion_ids.push(c.id.clone());
            }
        }
    }

    /// Referential integrity across id spaces.
    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        validate_stakeholders(&self.stakeholders)?;
        let ids: BTreeSet<&str> = self.stakeholders.iter().map(|s| s.id.as_str()).collect();
        for (i, o) in self.scenario.overrides.iter().enumerate() {
            if !ids.contains(o.stakeholder.as_str()) {
                return Err(Error::schema(format!("scenario.overrides[{i}].stakeholder"), format!("unknown stakeholder '{}'", o.stakeholder)));
            }
        }
        let mut completion_ids = BTreeSet::new();
        for c in &self.completions {
            if !completion_ids.insert(c.id.as_str()) {
                return Err(Error::DuplicateId { kind: "completion", id: c.id.clone() });
            }
        }
        if let Some(m) = &self.matrix {
            if m.scenario_id != self.scenario.id {
                return Err(Error::schema("matrix.scenario_id", "does not match scenario.id"));
            }
            if m.cells.len() != m.rows.len() * m.columns.len() {
                return Err(Error::schema("matrix.cells", "cell count is not rows × columns"));
            }
            for r in &m.rows {
                let s = self.stakeholder(r).ok_or_else(|| Error::UnknownId { kind: "stakeholder", id: r.clone() })?;
                if !s.approved {
                    return Err(Error::Unapproved(vec![r.clone()]));
                }
            }
            for cell in &m.cells {
                for id in &cell.completion_ids {
                    if !completion_ids.contains(id.as_str()) {
                        return Err(Error::UnknownId { kind: "completion", id: id.clone() });
                    }
                }
            }
            for c in &self.completions {
                if m.locate(&c.cell()).is_none() {
                    return Err(Error::UnknownId { kind: "cell", id: c.cell().to_string() });
                }
            }
        } else if !self.completions.is_empty() {
            return Err(Error::schema("completions", "completions present without a matrix"));
        }
        for a in &self.codes {
            if !completion_ids.contains(a.completion_id.as_str()) {
                return Err(Error::UnknownId { kind: "completion", id: a.completion_id.clone() });
            }
        }
        self.crowd.validate(self.matrix.as_ref())?;
        Ok(())
    }
}

#[cfg(unix)]
fn default_permissions() -> std::fs::Permissions {
    use std::os::unix::fs::PermissionsExt;
    std::fs::Permissions::from_mode(0o644)
}

#[cfg(not(unix))]
fn default_permissions() -> std::fs::Permissions {
    std::fs::metadata(".").map(|m| m.permissions()).expect("current directory is readable")
}

/// Exclusive advisory lock on `<project>.lock`, released on drop.
#[derive(Debug)]
pub struct ProjectLock {
    file: File,
    path: PathBuf,
}

impl ProjectLock {
    pub fn acquire(project_path: &Path) -> Result<Self> {
        let mut name = project_path.as_os_str().to_owned();
        name.push(".lock");
        let path = PathBuf::from(name);
        let file = File::options()
            .create(true)
            .truncate(false)
            .write(true)
            .open(&path)
            .map_err(|e| Error::io(&path, e))?;
        match file.try_lock() {
            Ok(()) => Ok(Self { file, path }),
            Err(std::fs::TryLockError::WouldBlock) => Err(Error::Locked(project_path.to_path_buf())),
            Err(std::fs::TryLockError::Error(e)) => Err(Error::io(&path, e)),
        }
    }
}

impl Drop for ProjectLock {
    fn drop(&mut self) {
        let _ = self.file.unlock();
        let _ = std::fs::remove_file(&self.path);
    }
}
