use serde::{Deserialize, Serialize};

use crate::error::StatsError;

/// Two-way table of non-negative counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContingencyTable {
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

/// Levels removed from a table because their marginal sum was zero.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DroppedLevels {
    pub rows: Vec<String>,
    pub cols: Vec<String>,
}

impl DroppedLevels {
    pub fn is_empty(&self) -> bool {
        self.rows.is_empty() && self.cols.is_empty()
    }
}

impl ContingencyTable {
    pub fn new(
        row_labels: Vec<String>,
        col_labels: Vec<String>,
        counts: Vec<Vec<u64>>,
    ) -> Result<Self, StatsError> {
        if row_labels.len() != counts.len() {
            return Err(StatsError::LabelMismatch {
                axis: "rows",
                labels: row_labels.len(),
                cells: counts.len(),
            });
        }
        for (row, r) in counts.iter().enumerate() {
            if r.len() != col_labels.len() {
                return Err(StatsError::Ragged { row, got: r.len(), expected: col_labels.len() });
            }
        }
        Ok(Self { row_labels, col_labels, counts })
    }

    /// Unlabelled table; rows and columns are named by index.
    pub fn from_counts(counts: Vec<Vec<u64>>) -> Result<Self, StatsError> {
        let cols = counts.first().map_or(0, Vec::len);
        let rows = (0..counts.len()).map(|i| format!("r{i}")).collect();
        let cols = (0..cols).map(|j| format!("c{j}")).collect();
        Self::new(rows, cols, counts)
    }

    pub fn n_rows(&self) -> usize {
        self.counts.len()
    }

    pub fn n_cols(&self) -> usize {
        self.col_labels.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn row_sums(&self) -> Vec<u64> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<u64> {
        (0..self.n_cols()).map(|j| self.counts.iter().map(|r| r[j]).sum()).collect()
    }

    /// Removes rows and columns whose marginal sum is zero.
    pub fn drop_empty(&self) -> (ContingencyTable, DroppedLevels) {
        let row_sums = self.row_sums();
        let col_sums = self.col_sums();
        let keep_cols: Vec<usize> = (0..self.n_cols()).filter(|&j| col_sums[j] > 0).collect();
        let mut dropped = DroppedLevels {
            rows: Vec::new(),
            cols: (0..self.n_cols())
                .filter(|&j| col_sums[j] == 0)
                .map(|j| self.col_labels[j].clone())
                .collect(),
        };
        let mut row_labels = Vec::new();
        let mut counts = Vec::new();
        for (i, row) in self.counts.iter().enumerate() {
            if row_sums[i] == 0 {
                dropped.rows.push(self.row_labels[i].clone());
                continue;
            }
            row_labels.push(self.row_labels[i].clone());
            counts.push(keep_cols.iter().map(|&j| row[j]).collect());
        }
        let table = ContingencyTable {
            row_labels,
            col_labels: keep_cols.iter().map(|&j| self.col_labels[j].clone()).collect(),
            counts,
        };
        (table, dropped)
    }
}
