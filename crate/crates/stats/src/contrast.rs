use crate::error::StatsError;
use crate::scalar::Scalar;

/// Per-category percentage-point difference between two levels:
/// `100 * (share under first - share under second)`, where shares are taken
/// within each level's own total.
pub fn percentage_point_contrast<T: Scalar>(
    first: (&str, &[u64]),
    second: (&str, &[u64]),
) -> Result<Vec<T>, StatsError> {
    let (first_label, first) = first;
    let (second_label, second) = second;
    if first.len() != second.len() {
        return Err(StatsError::LengthMismatch { left: first.len(), right: second.len() });
    }
    let total_a: u64 = first.iter().sum();
    let total_b: u64 = second.iter().sum();
    if total_a == 0 {
        return Err(StatsError::EmptyLevel(first_label.to_string()));
    }
    if total_b == 0 {
        return Err(StatsError::EmptyLevel(second_label.to_string()));
    }
    let (ta, tb) = (T::from_count(total_a), T::from_count(total_b));
    let hundred = T::lit(100.0);
    Ok(first
        .iter()
        .zip(second)
        .map(|(&a, &b)| hundred * (T::from_count(a) / ta - T::from_count(b) / tb))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn fractions_within_level() {
        let c: Vec<f64> = percentage_point_contrast(("fp", &[5, 5]), ("fn", &[3, 7])).unwrap();
        assert_relative_eq!(c[0], 20.0, epsilon = 1e-12);
        assert_relative_eq!(c[1], -20.0, epsilon = 1e-12);
    }

    #[test]
    fn identical_distributions() {
        let c: Vec<f64> = percentage_point_contrast(("a", &[2, 4, 6]), ("b", &[1, 2, 3])).unwrap();
        assert!(c.iter().all(|&x| x.abs() < 1e-12));
    }

    #[test]
    fn empty_level() {
        let err = percentage_point_contrast::<f64>(("a", &[1, 2]), ("b", &[0, 0])).unwrap_err();
        assert_eq!(err, StatsError::EmptyLevel("b".into()));
    }
}
