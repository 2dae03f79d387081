use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestMethod {
    ChiSquare,
    PairedT,
}

/// Outcome of a hypothesis test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct TestResult<T> {
    pub method: TestMethod,
    pub statistic: T,
    pub df: u32,
    pub p_value: T,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adjusted_p: Option<T>,
    /// Observations behind the test (table total or number of pairs).
    pub n: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl<T: Scalar> TestResult<T> {
    pub fn is_significant(&self, alpha: T) -> bool {
        self.adjusted_p.unwrap_or(self.p_value) < alpha
    }
}
