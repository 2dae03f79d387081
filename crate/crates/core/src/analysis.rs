//! Tests over coded corpora: χ² by behavior dimension, source and scenario,
//! Holm-corrected pairwise scenario comparisons, percentage-point contrasts
//! and the unique-subcategory diversity comparison.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use aha_stats::{
    chi_square_test, holm_adjust, paired_t_test_keyed, percentage_point_contrast, unique_per_unit, ContingencyTable,
    DiversitySummary64, DroppedLevels, StatsError, TestResult64,
};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{enum_name, HarmConditioning};
use crate::project::Project;
use crate::taxonomy::{coded_corpus, meaningfulness_report, CodedCompletion, MeaningfulnessReport, Taxonomy};

pub const ANALYSIS_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Factor {
    Scenario,
    ErrorDirection,
    Frequency,
    Severity,
    Conditioning,
    Source,
}

impl Factor {
    pub const BEHAVIOR: [Factor; 4] = [Factor::ErrorDirection, Factor::Frequency, Factor::Severity, Factor::Conditioning];
    /// Column order of the per-scenario behavior table.
    pub const WITHIN_SCENARIO: [Factor; 5] =
        [Factor::ErrorDirection, Factor::Conditioning, Factor::Frequency, Factor::Severity, Factor::Source];

    pub fn name(self) -> String {
        enum_name(&self)
    }

    pub fn level(self, c: &CodedCompletion) -> String {
        let v = &c.variant;
        match self {
            Factor::Scenario => c.scenario_id.clone(),
            Factor::ErrorDirection => enum_name(&v.error_direction),
            Factor::Frequency => enum_name(&v.frequency),
            Factor::Severity => enum_name(&v.severity),
            Factor::Conditioning => match v.harm_conditioning {
                HarmConditioning::Unspecified => "unspecified".into(),
                HarmConditioning::Specified(_) => "specified".into(),
            },
            Factor::Source => c.source.clone(),
        }
    }

    /// Fixed level order; scenarios keep their corpus order.
    fn canonical_levels(self) -> &'static [&'static str] {
        match self {
            Factor::Scenario => &[],
            Factor::ErrorDirection => &["false_positive", "false_negative"],
            Factor::Frequency => &["one_time", "accumulated"],
            Factor::Severity => &["unspecified", "egregious"],
            Factor::Conditioning => &["unspecified", "specified"],
            Factor::Source => &["crowd", "model"],
        }
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for Factor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.replace('-', "_"))).map_err(|_| {
            Error::schema(
                "factor",
                format!("unknown factor '{s}' (scenario, error_direction, frequency, severity, conditioning, source)"),
            )
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Contingency {
    pub table: ContingencyTable,
    pub dropped: DroppedLevels,
}

fn levels_of(corpus: &[&CodedCompletion], factor: Factor) -> Vec<String> {
    let mut levels: Vec<String> = factor.canonical_levels().iter().map(|s| s.to_string()).collect();
    for c in corpus {
        let l = factor.level(c);
        if !levels.contains(&l) {
            levels.push(l);
        }
    }
    levels
}

/// Category observations (each distinct category once per completion) by
/// factor level, over meaningful completions. Empty levels and categories
/// are dropped and reported.
pub fn contingency(corpus: &[CodedCompletion], taxonomy: &Taxonomy, factor: Factor) -> Result<Contingency> {
    let meaningful: Vec<&CodedCompletion> = corpus.iter().filter(|c| c.is_meaningful()).collect();
    let rows = levels_of(&meaningful, factor);
    let cols: Vec<String> = taxonomy.meaningful_categories().map(|c| c.id.clone()).collect();
    let mut counts = vec![vec![0u64; cols.len()]; rows.len()];
    for c in &meaningful {
        let r = rows.iter().position(|l| *l == factor.level(c)).expect("level listed");
        for cat in &c.categories {
            if let Some(j) = cols.iter().position(|x| x == cat) {
                counts[r][j] += 1;
            }
        }
    }
    let full = ContingencyTable::new(rows, cols, counts).map_err(|e| Error::stats(factor.name(), e))?;
    let (table, dropped) = full.drop_empty();
    if table.n_rows() < 2 || table.n_cols() < 2 {
        return Err(Error::stats(
            factor.name(),
            StatsError::TooFewLevels { rows: table.n_rows(), cols: table.n_cols() },
        ));
    }
    Ok(Contingency { table, dropped })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnalysisKind {
    /// χ² of category distribution against one factor within a scenario.
    ChiSquare,
    /// χ² of category distribution across scenarios.
    ChiSquareScenarios,
    /// χ² for one pair of scenarios, Holm-adjusted across pairs.
    PairwiseScenarios,
    /// Paired t-test on per-stakeholder unique-subcategory counts.
    PairedTDiversity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisEntry {
    pub analysis: AnalysisKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<String>,
    pub factors: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<ContingencyTable>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dropped: Option<DroppedLevels>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result: Option<TestResult64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl AnalysisEntry {
    fn chi(analysis: AnalysisKind, scenario: Option<String>, factors: Vec<String>, outcome: Result<Contingency>) -> Self {
        let mut e = Self { analysis, scenario, factors, table: None, dropped: None, result: None, error: None };
        match outcome.and_then(|c| {
            let r = chi_square_test::<f64>(&c.table).map_err(|s| Error::stats(e.factors.join(" vs "), s))?;
            Ok((c, r))
        }) {
            Ok((c, r)) => {
                e.table = Some(c.table);
                e.dropped = Some(c.dropped);
                e.result = Some(r);
            }
            Err(err) => e.error = Some(err.to_string()),
        }
        e
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContrastSet {
    pub scenario: String,
    pub factor: Factor,
    pub first: String,
    pub second: String,
    /// (category id, percentage points first − second), meaningful
    /// categories in taxonomy order.
    #[serde(default)]
    pub points: Vec<(String, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// 100 × (share under `first` − share under `second`) per category.
pub fn contrast(
    corpus: &[CodedCompletion],
    taxonomy: &Taxonomy,
    factor: Factor,
    first: &str,
    second: &str,
) -> Result<Vec<(String, f64)>> {
    let cats: Vec<String> = taxonomy.meaningful_categories().map(|c| c.id.clone()).collect();
    let count = |level: &str| {
        let mut v = vec![0u64; cats.len()];
        for c in corpus.iter().filter(|c| c.is_meaningful() && factor.level(c) == level) {
            for cat in &c.categories {
                if let Some(j) = cats.iter().position(|x| x == cat) {
                    v[j] += 1;
                }
            }
        }
        v
    };
    let (a, b) = (count(first), count(second));
    let pp: Vec<f64> = percentage_point_contrast((first, &a), (second, &b)).map_err(|e| Error::stats(factor.name(), e))?;
    Ok(cats.into_iter().zip(pp).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiversityReport {
    pub scenario: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub crowd: Option<DiversitySummary64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<DiversitySummary64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub combined: Option<DiversitySummary64>,
}

/// Distinct harm subcategories per stakeholder over completions whose
/// source passes `admit`. Every stakeholder in `stakeholders` is reported,
/// with zero when nothing matched.
pub fn unique_subcategories(
    corpus: &[CodedCompletion],
    taxonomy: &Taxonomy,
    stakeholders: &[String],
    admit: impl Fn(&str) -> bool,
) -> Result<DiversitySummary64> {
    let matched: Vec<&CodedCompletion> = corpus.iter().filter(|c| admit(&c.source)).collect();
    if matched.is_empty() {
        return Err(Error::stats("unique subcategories", StatsError::Empty));
    }
    let obs = matched.iter().flat_map(|c| {
        c.subcategories
            .iter()
            .filter(|s| taxonomy.parent_of(s).is_some_and(|p| p != crate::taxonomy::NOT_MEANINGFUL))
            .map(move |s| (c.stakeholder_id.as_str(), s.as_str()))
    });
    let counts = unique_per_unit(stakeholders, obs);
    DiversitySummary64::from_counts(counts).map_err(|e| Error::stats("unique subcategories", e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioMeaningfulness {
    pub scenario: String,
    pub report: MeaningfulnessReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BehaviorCell {
    pub factor: Factor,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub statistic: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_value: Option<f64>,
}

/// One scenario's line of the behavior table: N and df of the category
/// distribution, then χ² and p per factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BehaviorRow {
    pub scenario: String,
    pub n: u64,
    pub df: u32,
    pub tests: Vec<BehaviorCell>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema_version: u32,
    pub scenarios: Vec<String>,
    pub entries: Vec<AnalysisEntry>,
    #[serde(default)]
    pub behavior_table: Vec<BehaviorRow>,
    #[serde(default)]
    pub contrasts: Vec<ContrastSet>,
    #[serde(default)]
    pub diversity: Vec<DiversityReport>,
    #[serde(default)]
    pub meaningfulness: Vec<ScenarioMeaningfulness>,
}

impl AnalysisReport {
    /// Flat CSV of every test result, one row per entry.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["analysis", "scenario", "factors", "n", "statistic", "df", "p_value", "adjusted_p", "warnings", "error"])?;
        for e in &self.entries {
            let r = e.result.as_ref();
            w.write_record([
                enum_name(&e.analysis),
                e.scenario.clone().unwrap_or_default(),
                e.factors.join(";"),
                r.map(|r| r.n.to_string()).unwrap_or_default(),
                r.map(|r| r.statistic.to_string()).unwrap_or_default(),
                r.map(|r| r.df.to_string()).unwrap_or_default(),
                r.map(|r| r.p_value.to_string()).unwrap_or_default(),
                r.and_then(|r| r.adjusted_p).map(|p| p.to_string()).unwrap_or_default(),
                r.map(|r| r.warnings.join("; ")).unwrap_or_default(),
                e.error.clone().unwrap_or_default(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<analysis csv>", e))?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AnalyzeOptions {
    /// Restrict to a single factor; `None` runs everything.
    pub by: Option<Factor>,
}

/// Runs the analyses over one or more projects (one scenario each).
pub fn analyze(projects: &[&Project], taxonomy: &Taxonomy, options: AnalyzeOptions) -> Result<AnalysisReport> {
    let corpora: Vec<(String, Vec<String>, Vec<CodedCompletion>)> = projects
        .iter()
        .map(|p| {
            let stakeholders = match &p.matrix {
                Some(m) => m.rows.clone(),
                None => p.stakeholders.iter().map(|s| s.id.clone()).collect(),
            };
            (p.scenario.id.clone(), stakeholders, coded_corpus(p, taxonomy))
        })
        .collect();
    if corpora.iter().all(|(_, _, c)| c.is_empty()) {
        return Err(Error::NothingCoded);
    }
    let mut seen = std::collections::BTreeSet::new();
    for (id, _, _) in &corpora {
        if !seen.insert(id.as_str()) {
            return Err(Error::DuplicateId { kind: "scenario", id: id.clone() });
        }
    }

    let mut report = AnalysisReport {
        schema_version: ANALYSIS_SCHEMA_VERSION,
        scenarios: corpora.iter().map(|(id, _, _)| id.clone()).collect(),
        entries: Vec::new(),
        behavior_table: Vec::new(),
        contrasts: Vec::new(),
        diversity: Vec::new(),
        meaningfulness: Vec::new(),
    };
    let within: Vec<Factor> = match options.by {
        Some(Factor::Scenario) => Vec::new(),
        Some(f) => vec![f],
        None => Factor::WITHIN_SCENARIO.to_vec(),
    };

    for (scenario, stakeholders, corpus) in &corpora {
        for &f in &within {
            report.entries.push(AnalysisEntry::chi(
                AnalysisKind::ChiSquare,
                Some(scenario.clone()),
                vec![f.name(), "harm_category".into()],
                contingency(corpus, taxonomy, f),
            ));
        }
        if let Some(row) = behavior_row(&report.entries, scenario) {
            report.behavior_table.push(row);
        }
        if options.by.is_some() {
            continue;
        }
        for f in Factor::WITHIN_SCENARIO {
            let [first, second] = [f.canonical_levels()[0], f.canonical_levels()[1]];
            let (points, error) = match contrast(corpus, taxonomy, f, first, second) {
                Ok(p) => (p, None),
                Err(e) => (Vec::new(), Some(e.to_string())),
            };
            report.contrasts.push(ContrastSet {
                scenario: scenario.clone(),
                factor: f,
                first: first.into(),
                second: second.into(),
                points,
                error,
            });
        }
        report.entries.extend(diversity_entries(&mut report.diversity, scenario, stakeholders, corpus, taxonomy));
        report.meaningfulness.push(ScenarioMeaningfulness {
            scenario: scenario.clone(),
            report: meaningfulness_report(corpus, taxonomy),
        });
    }

    if corpora.len() >= 2 && matches!(options.by, None | Some(Factor::Scenario)) {
        let all: Vec<CodedCompletion> = corpora.iter().flat_map(|(_, _, c)| c.iter().cloned()).collect();
        report.entries.push(AnalysisEntry::chi(
            AnalysisKind::ChiSquareScenarios,
            None,
            vec!["scenario".into(), "harm_category".into()],
            contingency(&all, taxonomy, Factor::Scenario),
        ));
        report.entries.extend(pairwise_scenarios(&corpora.iter().map(|(s, _, c)| (s.clone(), c.clone())).collect::<Vec<_>>(), taxonomy));
    }
    Ok(report)
}

/// One χ² per unordered pair of scenarios (category drops recomputed per
/// pair), Holm-adjusted across the pairs that produced a result.
pub fn pairwise_scenarios(corpora: &[(String, Vec<CodedCompletion>)], taxonomy: &Taxonomy) -> Vec<AnalysisEntry> {
    let mut entries = Vec::new();
    for i in 0..corpora.len() {
        for j in i + 1..corpora.len() {
            let pair: Vec<CodedCompletion> = corpora[i].1.iter().chain(&corpora[j].1).cloned().collect();
            entries.push(AnalysisEntry::chi(
                AnalysisKind::PairwiseScenarios,
                None,
                vec![corpora[i].0.clone(), corpora[j].0.clone()],
                contingency(&pair, taxonomy, Factor::Scenario),
            ));
        }
    }
    let raw: Vec<f64> = entries.iter().filter_map(|e| e.result.as_ref().map(|r| r.p_value)).collect();
    let mut adjusted = holm_adjust(&raw).into_iter();
    for e in &mut entries {
        if let Some(r) = e.result.as_mut() {
            r.adjusted_p = adjusted.next();
        }
    }
    entries
}

fn diversity_entries(
    out: &mut Vec<DiversityReport>,
    scenario: &str,
    stakeholders: &[String],
    corpus: &[CodedCompletion],
    taxonomy: &Taxonomy,
) -> Vec<AnalysisEntry> {
    let crowd = unique_subcategories(corpus, taxonomy, stakeholders, |s| s == "crowd");
    let model = unique_subcategories(corpus, taxonomy, stakeholders, |s| s == "model");
    let combined = unique_subcategories(corpus, taxonomy, stakeholders, |_| true);
    let pairs = [("crowd", &crowd, "model", &model), ("crowd", &crowd, "combined", &combined), ("model", &model, "combined", &combined)];
    let entries = pairs
        .iter()
        .map(|(an, a, bn, b)| {
            let outcome = match (a, b) {
                (Ok(a), Ok(b)) => paired_t_test_keyed(&a.keyed(), &b.keyed()).map_err(|e| Error::stats(format!("{an} vs {bn}"), e)),
                (Err(e), _) | (_, Err(e)) => Err(Error::Precondition(format!("{an} vs {bn}: {e}"))),
            };
            let (result, error) = match outcome {
                Ok(r) => (Some(r), None),
                Err(e) => (None, Some(e.to_string())),
            };
            AnalysisEntry {
                analysis: AnalysisKind::PairedTDiversity,
                scenario: Some(scenario.to_string()),
                factors: vec![an.to_string(), bn.to_string()],
                table: None,
                dropped: None,
                result,
                error,
            }
        })
        .collect();
    out.push(DiversityReport { scenario: scenario.to_string(), crowd: crowd.ok(), model: model.ok(), combined: combined.ok() });
    entries
}

fn behavior_row(entries: &[AnalysisEntry], scenario: &str) -> Option<BehaviorRow> {
    let mine: Vec<&AnalysisEntry> = entries
        .iter()
        .filter(|e| e.analysis == AnalysisKind::ChiSquare && e.scenario.as_deref() == Some(scenario))
        .collect();
    let first = mine.iter().find_map(|e| e.result.as_ref())?;
    let tests = mine
        .iter()
        .filter_map(|e| {
            let factor: Factor = e.factors.first()?.parse().ok()?;
            let r = e.result.as_ref();
            Some(BehaviorCell { factor, statistic: r.map(|r| r.statistic), p_value: r.map(|r| r.p_value) })
        })
        .collect();
    Some(BehaviorRow { scenario: scenario.to_string(), n: first.n, df: first.df, tests })
}

/// Tab-separated rendering of the behavior table.
pub fn behavior_table(report: &AnalysisReport) -> String {
    let mut out = String::from("scenario\tN\tdf");
    let factors: Vec<Factor> = report.behavior_table.first().map(|r| r.tests.iter().map(|t| t.factor).collect()).unwrap_or_default();
    for f in &factors {
        out.push_str(&format!("\t{f} χ²\t{f} p"));
    }
    out.push('\n');
    for row in &report.behavior_table {
        out.push_str(&format!("{}\t{}\t{}", row.scenario, row.n, row.df));
        for t in &row.tests {
            match (t.statistic, t.p_value) {
                (Some(x), Some(p)) => out.push_str(&format!("\t{x:.2}\t{p:.4}")),
                _ => out.push_str("\t-\t-"),
            }
        }
        out.push('\n');
    }
    out
}
