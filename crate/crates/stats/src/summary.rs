use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::StatsError;
use crate::scalar::Scalar;

pub fn mean<T: Scalar>(xs: &[T]) -> T {
    let sum = xs.iter().fold(T::zero(), |acc, &x| acc + x);
    sum / T::from_count(xs.len() as u64)
}

/// Sample standard deviation (n − 1 denominator). Zero for fewer than two values.
pub fn sample_std_dev<T: Scalar>(xs: &[T]) -> T {
    if xs.len() < 2 {
        return T::zero();
    }
    let m = mean(xs);
    let ss = xs.iter().fold(T::zero(), |acc, &x| acc + (x - m) * (x - m));
    (ss / T::from_count(xs.len() as u64 - 1)).sqrt()
}

pub fn standard_error<T: Scalar>(xs: &[T]) -> T {
    if xs.is_empty() {
        return T::zero();
    }
    sample_std_dev(xs) / T::from_count(xs.len() as u64).sqrt()
}

/// Per-unit counts of distinct items, with their mean and standard error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct DiversitySummary<T> {
    pub per_stakeholder_counts: BTreeMap<String, u64>,
    pub mean: T,
    pub standard_error: T,
}

impl<T: Scalar> DiversitySummary<T> {
    pub fn from_counts(per_stakeholder_counts: BTreeMap<String, u64>) -> Result<Self, StatsError> {
        if per_stakeholder_counts.is_empty() {
            return Err(StatsError::Empty);
        }
        let xs: Vec<T> = per_stakeholder_counts.values().map(|&c| T::from_count(c)).collect();
        Ok(Self { mean: mean(&xs), standard_error: standard_error(&xs), per_stakeholder_counts })
    }

    /// Counts as `(unit, value)` pairs, suitable for a keyed paired test.
    pub fn keyed(&self) -> Vec<(String, T)> {
        self.per_stakeholder_counts
            .iter()
            .map(|(k, &v)| (k.clone(), T::from_count(v)))
            .collect()
    }
}

/// Number of distinct items observed per unit. Units listed in `units` but
/// absent from `observations` get a count of zero.
pub fn unique_per_unit<'a, I>(units: &[String], observations: I) -> BTreeMap<String, u64>
where
    I: IntoIterator<Item = (&'a str, &'a str)>,
{
    let mut sets: BTreeMap<String, BTreeSet<&'a str>> =
        units.iter().map(|u| (u.clone(), BTreeSet::new())).collect();
    for (unit, item) in observations {
        sets.entry(unit.to_string()).or_default().insert(item);
    }
    sets.into_iter().map(|(k, s)| (k, s.len() as u64)).collect()
}
