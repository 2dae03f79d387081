use crate::contingency::ContingencyTable;
use crate::error::StatsError;
use crate::result::{TestMethod, TestResult};
use crate::scalar::Scalar;
use crate::special::chi_square_sf;

/// Expected cell counts under independence: row sum × column sum / N.
pub fn expected_counts<T: Scalar>(table: &ContingencyTable) -> Vec<Vec<T>> {
    let n = T::from_count(table.total());
    let col_sums = table.col_sums();
    table
        .row_sums()
        .into_iter()
        .map(|r| {
            col_sums
                .iter()
                .map(|&c| T::from_count(r) * T::from_count(c) / n)
                .collect()
        })
        .collect()
}

/// Pearson χ² test of independence, without continuity correction.
pub fn chi_square_test<T: Scalar>(table: &ContingencyTable) -> Result<TestResult<T>, StatsError> {
    if table.n_rows() < 2 || table.n_cols() < 2 {
        return Err(StatsError::TooFewLevels { rows: table.n_rows(), cols: table.n_cols() });
    }
    if let Some(i) = table.row_sums().iter().position(|&s| s == 0) {
        return Err(StatsError::ZeroMargin { axis: "row", label: table.row_labels[i].clone() });
    }
    if let Some(j) = table.col_sums().iter().position(|&s| s == 0) {
        return Err(StatsError::ZeroMargin { axis: "column", label: table.col_labels[j].clone() });
    }

    let expected = expected_counts::<T>(table);
    let mut statistic = T::zero();
    let mut low_cells = 0usize;
    for (obs_row, exp_row) in table.counts.iter().zip(&expected) {
        for (&o, &e) in obs_row.iter().zip(exp_row) {
            let diff = T::from_count(o) - e;
            statistic = statistic + diff * diff / e;
            if e < T::lit(5.0) {
                low_cells += 1;
            }
        }
    }
    let df = ((table.n_rows() - 1) * (table.n_cols() - 1)) as u32;
    let mut warnings = Vec::new();
    if low_cells > 0 {
        warnings.push(format!(
            "{low_cells} of {} cells have expected count below 5",
            table.n_rows() * table.n_cols()
        ));
    }
    Ok(TestResult {
        method: TestMethod::ChiSquare,
        statistic,
        df,
        p_value: chi_square_sf(statistic, df),
        adjusted_p: None,
        n: table.total(),
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn table(counts: Vec<Vec<u64>>) -> ContingencyTable {
        ContingencyTable::from_counts(counts).unwrap()
    }

    #[test]
    fn hand_computed_two_by_two() {
        // E = (12, 18, 28, 42)
        let t = table(vec![vec![10, 20], vec![30, 40]]);
        let e = expected_counts::<f64>(&t);
        assert_relative_eq!(e[0][0], 12.0);
        assert_relative_eq!(e[0][1], 18.0);
        assert_relative_eq!(e[1][0], 28.0);
        assert_relative_eq!(e[1][1], 42.0);
        let r: TestResult<f64> = chi_square_test(&t).unwrap();
        let by_hand = 4.0 / 12.0 + 4.0 / 18.0 + 4.0 / 28.0 + 4.0 / 42.0;
        assert_relative_eq!(r.statistic, by_hand, max_relative = 1e-14);
        assert_eq!(r.df, 1);
        assert!(r.warnings.is_empty());
    }

    #[test]
    fn uniform_table() {
        let r: TestResult<f64> = chi_square_test(&table(vec![vec![10, 10], vec![10, 10]])).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn low_expected_warning() {
        let r: TestResult<f64> = chi_square_test(&table(vec![vec![3, 1], vec![1, 3]])).unwrap();
        assert_eq!(r.warnings.len(), 1);
    }

    #[test]
    fn zero_margin_is_error() {
        let err = chi_square_test::<f64>(&table(vec![vec![0, 4], vec![0, 3]])).unwrap_err();
        assert!(matches!(err, StatsError::ZeroMargin { axis: "column", .. }));
        let err = chi_square_test::<f64>(&table(vec![vec![1, 4]])).unwrap_err();
        assert!(matches!(err, StatsError::TooFewLevels { .. }));
    }
}
