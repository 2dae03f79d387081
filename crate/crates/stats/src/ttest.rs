use crate::error::StatsError;
use crate::result::{TestMethod, TestResult};
use crate::scalar::Scalar;
use crate::special::student_t_two_tailed;
use crate::summary::{mean, sample_std_dev};

/// Two-tailed paired-sample t-test on `a - b`.
pub fn paired_t_test<T: Scalar>(a: &[T], b: &[T]) -> Result<TestResult<T>, StatsError> {
    if a.len() != b.len() {
        return Err(StatsError::LengthMismatch { left: a.len(), right: b.len() });
    }
    let n = a.len();
    if n < 2 {
        return Err(StatsError::TooFewSamples(n));
    }
    let diffs: Vec<T> = a.iter().zip(b).map(|(&x, &y)| x - y).collect();
    let sd = sample_std_dev(&diffs);
    if sd == T::zero() {
        return Err(StatsError::DegenerateSample);
    }
    let statistic = mean(&diffs) / (sd / T::from_count(n as u64).sqrt());
    let df = (n - 1) as u32;
    Ok(TestResult {
        method: TestMethod::PairedT,
        statistic,
        df,
        p_value: student_t_two_tailed(statistic, df),
        adjusted_p: None,
        n: n as u64,
        warnings: Vec::new(),
    })
}

/// Paired t-test over samples keyed by unit (e.g. stakeholder). Both sides
/// must cover exactly the same keys; pairs are matched by key.
pub fn paired_t_test_keyed<T: Scalar>(
    a: &[(String, T)],
    b: &[(String, T)],
) -> Result<TestResult<T>, StatsError> {
    use std::collections::BTreeMap;
    let left: BTreeMap<&str, T> = a.iter().map(|(k, v)| (k.as_str(), *v)).collect();
    let right: BTreeMap<&str, T> = b.iter().map(|(k, v)| (k.as_str(), *v)).collect();
    if let Some(k) = left.keys().find(|k| !right.contains_key(*k)) {
        return Err(StatsError::KeyMismatch(format!("'{k}' missing from second sample")));
    }
    if let Some(k) = right.keys().find(|k| !left.contains_key(*k)) {
        return Err(StatsError::KeyMismatch(format!("'{k}' missing from first sample")));
    }
    let xs: Vec<T> = left.values().copied().collect();
    let ys: Vec<T> = right.values().copied().collect();
    paired_t_test(&xs, &ys)
}
