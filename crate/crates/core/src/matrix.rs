//! Behavior variants (matrix columns) and the stakeholder × behavior grid.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::{Scenario, Stakeholder};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorDirection {
    FalsePositive,
    FalseNegative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frequency {
    OneTime,
    Accumulated,
}

// Declaration order is the canonical column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Unspecified,
    Egregious,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HarmConditioning {
    Unspecified,
    Specified(String),
}

impl HarmConditioning {
    pub fn label(&self) -> Option<&str> {
        match self {
            HarmConditioning::Unspecified => None,
            HarmConditioning::Specified(l) => Some(l),
        }
    }
}

/// One column of the ethical matrix.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BehaviorVariant {
    pub error_direction: ErrorDirection,
    pub frequency: Frequency,
    pub severity: Severity,
    pub harm_conditioning: HarmConditioning,
}

impl BehaviorVariant {
    pub fn new(
        error_direction: ErrorDirection,
        frequency: Frequency,
        severity: Severity,
        harm_conditioning: HarmConditioning,
    ) -> Self {
        Self { error_direction, frequency, severity, harm_conditioning }
    }

    /// Compact, filesystem- and CSV-safe key, e.g. `fn-acc-egr-h:financial-concerns`.
    pub fn key(&self) -> String {
        let dir = match self.error_direction {
            ErrorDirection::FalsePositive => "fp",
            ErrorDirection::FalseNegative => "fn",
        };
        let freq = match self.frequency {
            Frequency::OneTime => "once",
            Frequency::Accumulated => "acc",
        };
        let sev = match self.severity {
            Severity::Unspecified => "uns",
            Severity::Egregious => "egr",
        };
        let harm = match &self.harm_conditioning {
            HarmConditioning::Unspecified => "h:none".to_string(),
            HarmConditioning::Specified(l) => format!("h:{}", crate::slug(l)),
        };
        format!("{dir}-{freq}-{sev}-{harm}")
    }

    pub fn validate(&self) -> Result<()> {
        if let HarmConditioning::Specified(l) = &self.harm_conditioning {
            if l.trim().is_empty() {
                return Err(Error::schema("harm_conditioning", "specified harm label is empty"));
            }
        }
        Ok(())
    }
}

impl fmt::Display for BehaviorVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key())
    }
}

/// The full cross product of behavior dimensions for each conditioned-harm
/// label, in canonical order: direction, frequency, severity, conditioning.
/// The unconditioned variant precedes the label-specific ones.
pub fn enumerate_variants_multi(labels: &[String]) -> Result<Vec<BehaviorVariant>> {
    if labels.is_empty() {
        return Err(Error::Precondition("at least one conditioned-harm label is required".into()));
    }
    let mut seen = BTreeSet::new();
    for l in labels {
        if l.trim().is_empty() {
            return Err(Error::Precondition("conditioned-harm label is empty".into()));
        }
        if !seen.insert(l.as_str()) {
            return Err(Error::DuplicateId { kind: "harm label", id: l.clone() });
        }
    }
    let conditionings: Vec<HarmConditioning> = std::iter::once(HarmConditioning::Unspecified)
        .chain(labels.iter().cloned().map(HarmConditioning::Specified))
        .collect();
    let mut out = Vec::with_capacity(8 * conditionings.len());
    for dir in [ErrorDirection::FalsePositive, ErrorDirection::FalseNegative] {
        for freq in [Frequency::OneTime, Frequency::Accumulated] {
            for sev in [Severity::Unspecified, Severity::Egregious] {
                for cond in &conditionings {
                    out.push(BehaviorVariant::new(dir, freq, sev, cond.clone()));
                }
            }
        }
    }
    Ok(out)
}

/// The sixteen variants for a single conditioned-harm label.
pub fn enumerate_variants(conditioned_harm_label: &str) -> Result<Vec<BehaviorVariant>> {
    enumerate_variants_multi(&[conditioned_harm_label.to_string()])
}

/// Coordinates of a cell, by stakeholder id and variant.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CellRef {
    pub stakeholder_id: String,
    pub variant: BehaviorVariant,
}

impl CellRef {
    pub fn new(stakeholder_id: impl Into<String>, variant: BehaviorVariant) -> Self {
        Self { stakeholder_id: stakeholder_id.into(), variant }
    }
}

impl fmt::Display for CellRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.stakeholder_id, self.variant.key())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cell {
    #[serde(default)]
    pub vignette: Option<String>,
    #[serde(default)]
    pub completion_ids: Vec<String>,
}

/// Stakeholders (rows) × behavior variants (columns), stored row-major.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EthicalMatrix {
    pub scenario_id: String,
    /// Stakeholder ids, in row order.
    pub rows: Vec<String>,
    pub columns: Vec<BehaviorVariant>,
    pub cells: Vec<Cell>,
}

impl EthicalMatrix {
    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn index(&self, row: usize, col: usize) -> usize {
        assert!(row < self.rows.len() && col < self.columns.len(), "cell out of range");
        row * self.columns.len() + col
    }

    pub fn cell(&self, row: usize, col: usize) -> &Cell {
        &self.cells[self.index(row, col)]
    }

    pub fn cell_mut(&mut self, row: usize, col: usize) -> &mut Cell {
        let i = self.index(row, col);
        &mut self.cells[i]
    }

    /// (row, col) for a flat cell index.
    pub fn coords(&self, index: usize) -> (usize, usize) {
        (index / self.columns.len(), index % self.columns.len())
    }

    pub fn cell_ref(&self, index: usize) -> CellRef {
        let (r, c) = self.coords(index);
        CellRef::new(self.rows[r].clone(), self.columns[c].clone())
    }

    pub fn locate(&self, cell: &CellRef) -> Option<usize> {
        let r = self.rows.iter().position(|id| *id == cell.stakeholder_id)?;
        let c = self.columns.iter().position(|v| *v == cell.variant)?;
        Some(self.index(r, c))
    }

    pub fn cell_refs(&self) -> impl Iterator<Item = CellRef> + '_ {
        (0..self.cells.len()).map(|i| self.cell_ref(i))
    }

    /// Rows as CSV records: stakeholder_id, direction, frequency, severity,
    /// conditioning, vignette, n_completions.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "stakeholder_id",
            "direction",
            "frequency",
            "severity",
            "conditioning",
            "vignette",
            "n_completions",
        ])?;
        for (i, cell) in self.cells.iter().enumerate() {
            let r = self.cell_ref(i);
            let v = &r.variant;
            w.write_record([
                r.stakeholder_id.as_str(),
                enum_name(&v.error_direction).as_str(),
                enum_name(&v.frequency).as_str(),
                enum_name(&v.severity).as_str(),
                v.harm_conditioning.label().unwrap_or("unspecified"),
                cell.vignette.as_deref().unwrap_or(""),
                cell.completion_ids.len().to_string().as_str(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }
}

pub(crate) fn enum_name<T: Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(serde_json::Value::String(s)) => s,
        other => panic!("not a unit enum: {other:?}"),
    }
}

/// Builds an empty matrix. Every stakeholder must be approved.
pub fn build_matrix(
    scenario: &Scenario,
    stakeholders: &[Stakeholder],
    variants: &[BehaviorVariant],
) -> Result<EthicalMatrix> {
    if stakeholders.is_empty() {
        return Err(Error::Precondition("stakeholder list is empty".into()));
    }
    if variants.is_empty() {
        return Err(Error::Precondition("variant list is empty".into()));
    }
    let unapproved: Vec<String> =
        stakeholders.iter().filter(|s| !s.approved).map(|s| s.id.clone()).collect();
    if !unapproved.is_empty() {
        return Err(Error::Unapproved(unapproved));
    }
    let mut ids = BTreeSet::new();
    for s in stakeholders {
        if !ids.insert(s.id.as_str()) {
            return Err(Error::DuplicateId { kind: "stakeholder", id: s.id.clone() });
        }
    }
    let mut cols = BTreeSet::new();
    for v in variants {
        v.validate()?;
        if !cols.insert(v) {
            return Err(Error::DuplicateId { kind: "variant", id: v.key() });
        }
    }
    Ok(EthicalMatrix {
        scenario_id: scenario.id.clone(),
        rows: stakeholders.iter().map(|s| s.id.clone()).collect(),
        columns: variants.to_vec(),
        cells: vec![Cell::default(); stakeholders.len() * variants.len()],
    })
}
