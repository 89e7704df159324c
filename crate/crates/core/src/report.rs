//! Repetition summaries and the strategy hypothesis tests on coverage.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{Metric, MetricsReport};
use crate::stats::{aggregate, significance_stars, welch_t_test};
use crate::strategies::StrategyKind;

/// Strategy pairs `(a, b)` compared on per-repetition coverage.
pub const HYPOTHESIS_PAIRS: [(StrategyKind, StrategyKind); 4] = [
    (StrategyKind::UIM, StrategyKind::MM),
    (StrategyKind::UIM, StrategyKind::UDM),
    (StrategyKind::UDM, StrategyKind::MM),
    (StrategyKind::UCM, StrategyKind::UIM),
];

/// Whether the summary table prints a metric in percent.
pub fn shown_as_percent(metric: Metric) -> bool {
    metric.is_nonconformal() || matches!(metric, Metric::Coverage | Metric::PctEmpty)
}

/// `mean±std` with two decimals, in percent where [`shown_as_percent`].
pub fn format_cell(metric: Metric, mean: f64, std: f64) -> String {
    let k = if shown_as_percent(metric) { 100.0 } else { 1.0 };
    format!("{:.2}±{:.2}", mean * k, std * k)
}

pub fn metric_values(reports: &[MetricsReport], metric: Metric) -> Vec<f64> {
    reports.iter().map(|r| r.get(metric)).collect()
}

/// Rows in [`Metric::TABLE`] order, one column per classifier.
pub fn summary_table_csv(columns: &[(String, Vec<MetricsReport>)]) -> Result<String> {
    if columns.is_empty() {
        return Err(Error::Empty("summary columns"));
    }
    let mut out = String::from("metric");
    for (name, _) in columns {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for metric in Metric::TABLE {
        out.push_str(metric.name());
        for (_, reports) in columns {
            let (mean, std) = aggregate(&metric_values(reports, metric))?;
            out.push(',');
            out.push_str(&format_cell(metric, mean, std));
        }
        out.push('\n');
    }
    Ok(out)
}

/// One row per repetition with all metrics as raw fractions.
pub fn repetition_csv(reports: &[MetricsReport]) -> String {
    let mut out = String::from("repetition");
    for m in Metric::ALL {
        out.push(',');
        out.push_str(m.name());
    }
    out.push('\n');
    for (r, rep) in reports.iter().enumerate() {
        out.push_str(&r.to_string());
        for m in Metric::ALL {
            out.push(',');
            out.push_str(&rep.get(m).to_string());
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisResult {
    pub dataset: String,
    pub classifier: String,
    pub a: StrategyKind,
    pub b: StrategyKind,
    pub t: f64,
    pub df: f64,
    pub p: f64,
    pub stars: String,
    pub mean_a: f64,
    pub mean_b: f64,
}

/// Welch tests for every pair in [`HYPOTHESIS_PAIRS`] whose strategies both
/// have coverage samples.
pub fn test_hypotheses(
    dataset: &str,
    classifier: &str,
    coverage: &[(StrategyKind, Vec<f64>)],
) -> Result<Vec<HypothesisResult>> {
    let lookup = |k: StrategyKind| coverage.iter().find(|(s, _)| *s == k).map(|(_, v)| v.as_slice());
    let mut out = Vec::new();
    for (a, b) in HYPOTHESIS_PAIRS {
        let (Some(va), Some(vb)) = (lookup(a), lookup(b)) else {
            continue;
        };
        let test = welch_t_test(va, vb)?;
        out.push(HypothesisResult {
            dataset: dataset.to_string(),
            classifier: classifier.to_string(),
            a,
            b,
            t: test.t,
            df: test.df,
            p: test.p,
            stars: significance_stars(test.p).to_string(),
            mean_a: aggregate(va)?.0,
            mean_b: aggregate(vb)?.0,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(acc: f64, cov: f64, size: f64) -> MetricsReport {
        let mut r = MetricsReport::default();
        r.set(Metric::Accuracy, acc);
        r.set(Metric::Coverage, cov);
        r.set(Metric::SetSize, size);
        r
    }

    #[test]
    fn cells() {
        assert_eq!(format_cell(Metric::Accuracy, 0.9267, 0.0096), "92.67±0.96");
        assert_eq!(format_cell(Metric::Coverage, 0.9543, 0.0128), "95.43±1.28");
        assert_eq!(format_cell(Metric::SetSize, 1.22, 0.05), "1.22±0.05");
        assert_eq!(format_cell(Metric::Jaccard, 0.79, 0.06), "0.79±0.06");
    }

    #[test]
    fn table_layout() {
        let cols = vec![
            ("gnb".to_string(), vec![report(0.9, 0.95, 1.0), report(0.8, 0.97, 2.0)]),
            ("rf".to_string(), vec![report(1.0, 1.0, 1.0), report(1.0, 1.0, 1.0)]),
        ];
        let csv = summary_table_csv(&cols).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "metric,gnb,rf");
        assert_eq!(lines.len(), 1 + Metric::TABLE.len());
        assert_eq!(lines[1], "accuracy,85.00±7.07,100.00±0.00");
        assert_eq!(lines[5], "coverage,96.00±1.41,100.00±0.00");
        assert_eq!(lines[7], "setsize,1.50±0.71,1.00±0.00");
        assert!(lines.last().unwrap().starts_with("OE,"));
        assert!(summary_table_csv(&[("x".into(), vec![report(1.0, 1.0, 1.0)])]).is_err());
    }

    #[test]
    fn hypotheses_skip_missing_strategies() {
        let cov = vec![
            (StrategyKind::MM, vec![0.95, 0.96, 0.94, 0.95]),
            (StrategyKind::UIM, vec![0.6, 0.7, 0.65, 0.62]),
        ];
        let h = test_hypotheses("d", "gnb", &cov).unwrap();
        assert_eq!(h.len(), 1);
        assert_eq!((h[0].a, h[0].b), (StrategyKind::UIM, StrategyKind::MM));
        assert!(h[0].t < 0.0);
        assert!(h[0].p < 0.01);
        assert_eq!(h[0].stars, significance_stars(h[0].p));
        assert!((h[0].mean_b - 0.95).abs() < 1e-12);
    }

    #[test]
    fn repetition_rows() {
        let csv = repetition_csv(&[report(0.5, 0.25, 1.5)]);
        let lines: Vec<&str> = csv.lines().collect();
        assert!(lines[0].starts_with("repetition,accuracy,"));
        assert_eq!(lines[1].split(',').count(), 17);
        assert!(lines[1].starts_with("0,0.5,"));
    }
}
