use aha_stats::special::{
    chi_square_sf, regularized_beta, regularized_gamma_p, regularized_gamma_q,
    student_t_two_tailed,
};
use aha_stats::{chi_square_test, holm_adjust, paired_t_test, ContingencyTable, TestResult64};
use approx::assert_relative_eq;
use proptest::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF, StudentsT};
use statrs::function::{beta, gamma};

fn table(counts: Vec<Vec<u64>>) -> ContingencyTable {
    ContingencyTable::from_counts(counts).unwrap()
}

/// (counts, statistic, df, p) frozen from SciPy's chi2_contingency(correction=False).
fn frozen_fixtures() -> Vec<(Vec<Vec<u64>>, f64, u32, f64)> {
    vec![
        (vec![vec![10, 20], vec![30, 40]], 0.793_650_793_650_793_6, 1, 0.372_998_483_613_486_86),
        (vec![vec![12, 5, 7], vec![3, 9, 14]], 8.810_286_935_286_934, 2, 0.012_214_353_924_559_529),
        (
            vec![vec![25, 10, 5, 8], vec![7, 14, 22, 9], vec![11, 3, 6, 30]],
            55.286_066_875_379_106,
            6,
            4.058_075_950_843_817_3e-10,
        ),
        (
            vec![vec![100, 80, 60], vec![90, 95, 70], vec![40, 50, 120], vec![5, 10, 15]],
            68.753_630_717_642_35,
            6,
            7.363_649_927_564_775e-13,
        ),
        (vec![vec![3, 1], vec![1, 3]], 2.0, 1, 0.157_299_207_050_281_05),
    ]
}

#[test]
fn chi_square_matches_frozen_reference() {
    for (counts, stat, df, p) in frozen_fixtures() {
        let r: TestResult64 = chi_square_test(&table(counts)).unwrap();
        assert_relative_eq!(r.statistic, stat, max_relative = 1e-10);
        assert_eq!(r.df, df);
        assert_relative_eq!(r.p_value, p, max_relative = 1e-9);
    }
}

#[test]
fn paired_t_matches_frozen_reference() {
    let r = paired_t_test(&[10.0, 12.0, 9.0, 11.0], &[8.0, 11.0, 10.0, 9.0]).unwrap();
    assert_relative_eq!(r.statistic, std::f64::consts::SQRT_2, max_relative = 1e-12);
    assert_relative_eq!(r.p_value, 0.252_215_496_355_504_2, max_relative = 1e-10);

    let a = [14.0, 15.0, 13.0, 16.0, 12.0, 14.0, 15.0, 13.0, 17.0, 14.0, 15.0, 16.0];
    let b = [19.0, 20.0, 18.0, 22.0, 17.0, 19.0, 21.0, 18.0, 23.0, 19.0, 20.0, 21.0];
    let r = paired_t_test(&a, &b).unwrap();
    assert_eq!(r.df, 11);
    assert_relative_eq!(r.statistic, -40.211_938_525_766_2, max_relative = 1e-10);
    assert_relative_eq!(r.p_value, 2.730_188_281_546_487_6e-13, max_relative = 1e-6);
}

#[test]
fn t_df3_closed_form() {
    // CDF for ν = 3: 1/2 + (1/π)[t/(√3(1 + t²/3)) + atan(t/√3)]
    for t in [0.25_f64, 1.0, std::f64::consts::SQRT_2, 2.5, 7.0] {
        let s3 = 3.0_f64.sqrt();
        let cdf = 0.5
            + (t / (s3 * (1.0 + t * t / 3.0)) + (t / s3).atan()) / std::f64::consts::PI;
        let want = 2.0 * (1.0 - cdf);
        assert_relative_eq!(student_t_two_tailed(t, 3), want, max_relative = 1e-10);
    }
}

#[test]
fn chi_square_even_df_closed_form() {
    // Q(k, x) for integer k is a finite Poisson sum.
    for df in [2u32, 4, 8, 14] {
        for x in [0.5_f64, 3.0, 11.0, 40.0] {
            let k = df / 2;
            let half = x / 2.0;
            let mut term = 1.0;
            let mut sum = 1.0;
            for i in 1..k {
                term *= half / f64::from(i);
                sum += term;
            }
            assert_relative_eq!(chi_square_sf(x, df), (-half).exp() * sum, max_relative = 1e-10);
        }
    }
}

proptest! {
    #[test]
    fn gamma_matches_statrs(a in 0.05f64..80.0, x in 0.0f64..120.0) {
        let ours = regularized_gamma_p(a, x);
        let theirs = gamma::gamma_lr(a, x);
        prop_assert!((ours - theirs).abs() <= 1e-10 * theirs.abs().max(1e-300) || (ours - theirs).abs() < 1e-13,
            "P({a}, {x}): {ours} vs {theirs}");
        let q = regularized_gamma_q(a, x);
        prop_assert!((ours + q - 1.0).abs() < 1e-12);
    }

    #[test]
    fn beta_matches_statrs(x in 0.0f64..=1.0, a in 0.1f64..60.0, b in 0.1f64..60.0) {
        let ours = regularized_beta(x, a, b);
        let theirs = beta::beta_reg(a, b, x);
        prop_assert!((ours - theirs).abs() <= 1e-10 * theirs.abs() || (ours - theirs).abs() < 1e-13,
            "I_{x}({a}, {b}): {ours} vs {theirs}");
    }

    #[test]
    fn chi_square_sf_matches_statrs(x in 0.01f64..150.0, df in 1u32..40) {
        let theirs = 1.0 - ChiSquared::new(f64::from(df)).unwrap().cdf(x);
        let ours = chi_square_sf(x, df);
        // statrs goes through 1 - cdf, so compare absolutely in the far tail.
        prop_assert!((ours - theirs).abs() < 1e-10_f64.max(1e-10 * theirs));
    }

    #[test]
    fn t_two_tailed_matches_statrs(t in -30.0f64..30.0, df in 1u32..60) {
        let dist = StudentsT::new(0.0, 1.0, f64::from(df)).unwrap();
        let theirs = 2.0 * dist.cdf(-t.abs());
        let ours = student_t_two_tailed(t, df);
        prop_assert!((ours - theirs).abs() < 1e-10_f64.max(1e-9 * theirs));
    }

    #[test]
    fn chi_square_permutation_invariant(
        counts in prop::collection::vec(prop::collection::vec(1u64..60, 4), 3),
        k in 2u64..6,
    ) {
        let base: TestResult64 = chi_square_test(&table(counts.clone())).unwrap();
        let mut rows = counts.clone();
        rows.reverse();
        let permuted: Vec<Vec<u64>> = rows
            .iter()
            .map(|r| vec![r[2], r[0], r[3], r[1]])
            .collect();
        let p: TestResult64 = chi_square_test(&table(permuted)).unwrap();
        prop_assert!((p.statistic - base.statistic).abs() <= 1e-9 * base.statistic.max(1.0));
        let scaled: Vec<Vec<u64>> = counts.iter().map(|r| r.iter().map(|c| c * k).collect()).collect();
        let s: TestResult64 = chi_square_test(&table(scaled)).unwrap();
        prop_assert!((s.statistic - k as f64 * base.statistic).abs() <= 1e-9 * s.statistic.max(1.0));
    }

    #[test]
    fn identical_rows_give_zero(row in prop::collection::vec(1u64..50, 2..6), mults in prop::collection::vec(1u64..5, 2..5)) {
        let counts: Vec<Vec<u64>> = mults.iter().map(|m| row.iter().map(|c| c * m).collect()).collect();
        let r: TestResult64 = chi_square_test(&table(counts)).unwrap();
        prop_assert!(r.statistic.abs() < 1e-12);
        prop_assert!((r.p_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn holm_monotone_and_dominating(raw in prop::collection::vec(0.0f64..=1.0, 1..12)) {
        let adj = holm_adjust(&raw);
        let mut order: Vec<usize> = (0..raw.len()).collect();
        order.sort_by(|&a, &b| raw[a].partial_cmp(&raw[b]).unwrap());
        for w in order.windows(2) {
            prop_assert!(adj[w[0]] <= adj[w[1]]);
        }
        for (a, r) in adj.iter().zip(&raw) {
            prop_assert!(a >= r && *a <= 1.0);
        }
    }

    #[test]
    fn paired_t_antisymmetric(
        pairs in prop::collection::vec((0u32..40, 0u32..40), 2..20)
    ) {
        let a: Vec<f64> = pairs.iter().map(|p| f64::from(p.0)).collect();
        let b: Vec<f64> = pairs.iter().map(|p| f64::from(p.1)).collect();
        match (paired_t_test(&a, &b), paired_t_test(&b, &a)) {
            (Ok(x), Ok(y)) => {
                prop_assert_eq!(x.statistic, -y.statistic);
                prop_assert_eq!(x.p_value, y.p_value);
            }
            (Err(x), Err(y)) => prop_assert_eq!(x, y),
            _ => prop_assert!(false, "asymmetric failure"),
        }
    }
}
