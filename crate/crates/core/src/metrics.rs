//! Point-prediction and prediction-set performance measures.
//!
//! Non-conformal measures use the arg-max prediction of each record and are
//! macro-averaged one-vs-rest over all classes; a ratio with a zero
//! denominator counts as 0. Conformal measures average per-record quantities
//! over the `k` records of a batch.

use serde::{Deserialize, Serialize};

use crate::conformal::PredictionRecord;
use crate::error::{Error, Result};

/// Metric identifiers. Table order follows the report layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Metric {
    Accuracy,
    Sensitivity,
    Specificity,
    Precision,
    Recall,
    F1,
    Coverage,
    Jaccard,
    SetSize,
    PctEmpty,
    MCriterion,
    FCriterion,
    OM,
    OF,
    OU,
    OE,
}

impl Metric {
    pub const ALL: [Metric; 16] = [
        Metric::Accuracy,
        Metric::Sensitivity,
        Metric::Specificity,
        Metric::Precision,
        Metric::Recall,
        Metric::F1,
        Metric::Coverage,
        Metric::Jaccard,
        Metric::SetSize,
        Metric::PctEmpty,
        Metric::MCriterion,
        Metric::FCriterion,
        Metric::OM,
        Metric::OF,
        Metric::OU,
        Metric::OE,
    ];

    /// Rows of the summary table.
    pub const TABLE: [Metric; 14] = [
        Metric::Accuracy,
        Metric::Sensitivity,
        Metric::Specificity,
        Metric::F1,
        Metric::Coverage,
        Metric::Jaccard,
        Metric::SetSize,
        Metric::PctEmpty,
        Metric::MCriterion,
        Metric::FCriterion,
        Metric::OM,
        Metric::OF,
        Metric::OU,
        Metric::OE,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Accuracy => "accuracy",
            Metric::Sensitivity => "sensitivity",
            Metric::Specificity => "specificity",
            Metric::Precision => "precision",
            Metric::Recall => "recall",
            Metric::F1 => "F1",
            Metric::Coverage => "coverage",
            Metric::Jaccard => "jaccard",
            Metric::SetSize => "setsize",
            Metric::PctEmpty => "pctempty",
            Metric::MCriterion => "MCriterion",
            Metric::FCriterion => "FCriterion",
            Metric::OM => "OM",
            Metric::OF => "OF",
            Metric::OU => "OU",
            Metric::OE => "OE",
        }
    }

    pub fn from_name(name: &str) -> Option<Metric> {
        Metric::ALL.into_iter().find(|m| m.name() == name)
    }

    /// Point-prediction measures, reported as percentages in tables.
    pub fn is_nonconformal(self) -> bool {
        matches!(
            self,
            Metric::Accuracy
                | Metric::Sensitivity
                | Metric::Specificity
                | Metric::Precision
                | Metric::Recall
                | Metric::F1
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NonConformalMetrics {
    pub accuracy: f64,
    pub sensitivity: f64,
    pub specificity: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ConformalMetrics {
    pub coverage: f64,
    pub jaccard: f64,
    pub setsize: f64,
    pub pctempty: f64,
    pub m_criterion: f64,
    pub f_criterion: f64,
    pub om: f64,
    pub of: f64,
    pub ou: f64,
    pub oe: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricsReport {
    pub nonconformal: NonConformalMetrics,
    pub conformal: ConformalMetrics,
}

impl MetricsReport {
    pub fn compute(records: &[PredictionRecord], n_classes: usize) -> Result<Self> {
        Ok(Self {
            nonconformal: nonconformal_metrics(records, n_classes)?,
            conformal: conformal_metrics(records)?,
        })
    }

    pub fn get(&self, metric: Metric) -> f64 {
        let (n, c) = (&self.nonconformal, &self.conformal);
        match metric {
            Metric::Accuracy => n.accuracy,
            Metric::Sensitivity => n.sensitivity,
            Metric::Specificity => n.specificity,
            Metric::Precision => n.precision,
            Metric::Recall => n.recall,
            Metric::F1 => n.f1,
            Metric::Coverage => c.coverage,
            Metric::Jaccard => c.jaccard,
            Metric::SetSize => c.setsize,
            Metric::PctEmpty => c.pctempty,
            Metric::MCriterion => c.m_criterion,
            Metric::FCriterion => c.f_criterion,
            Metric::OM => c.om,
            Metric::OF => c.of,
            Metric::OU => c.ou,
            Metric::OE => c.oe,
        }
    }

    pub fn set(&mut self, metric: Metric, value: f64) {
        let (n, c) = (&mut self.nonconformal, &mut self.conformal);
        let slot = match metric {
            Metric::Accuracy => &mut n.accuracy,
            Metric::Sensitivity => &mut n.sensitivity,
            Metric::Specificity => &mut n.specificity,
            Metric::Precision => &mut n.precision,
            Metric::Recall => &mut n.recall,
            Metric::F1 => &mut n.f1,
            Metric::Coverage => &mut c.coverage,
            Metric::Jaccard => &mut c.jaccard,
            Metric::SetSize => &mut c.setsize,
            Metric::PctEmpty => &mut c.pctempty,
            Metric::MCriterion => &mut c.m_criterion,
            Metric::FCriterion => &mut c.f_criterion,
            Metric::OM => &mut c.om,
            Metric::OF => &mut c.of,
            Metric::OU => &mut c.ou,
            Metric::OE => &mut c.oe,
        };
        *slot = value;
    }
}

/// `counts[predicted][true]`.
pub fn confusion_matrix(records: &[PredictionRecord], n_classes: usize) -> Vec<Vec<usize>> {
    let mut m = vec![vec![0; n_classes]; n_classes];
    for r in records {
        m[r.point][r.truth] += 1;
    }
    m
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn ratio_f(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

pub fn nonconformal_metrics(records: &[PredictionRecord], n_classes: usize) -> Result<NonConformalMetrics> {
    if records.is_empty() {
        return Err(Error::Empty("prediction records"));
    }
    if n_classes == 0 {
        return Err(Error::InvalidParameter("n_classes must be positive".into()));
    }
    let cm = confusion_matrix(records, n_classes);
    let total = records.len();
    let correct: usize = (0..n_classes).map(|c| cm[c][c]).sum();
    let mut out = NonConformalMetrics {
        accuracy: ratio(correct, total),
        ..Default::default()
    };
    for c in 0..n_classes {
        let tp = cm[c][c];
        let predicted: usize = cm[c].iter().sum();
        let actual: usize = cm.iter().map(|row| row[c]).sum();
        let fp = predicted - tp;
        let fn_ = actual - tp;
        let tn = total - tp - fp - fn_;
        let recall = ratio(tp, tp + fn_);
        let precision = ratio(tp, tp + fp);
        out.sensitivity += recall;
        out.recall += recall;
        out.specificity += ratio(tn, tn + fp);
        out.precision += precision;
        out.f1 += ratio_f(2.0 * precision * recall, precision + recall);
    }
    let k = n_classes as f64;
    out.sensitivity /= k;
    out.recall /= k;
    out.specificity /= k;
    out.precision /= k;
    out.f1 /= k;
    Ok(out)
}

pub fn conformal_metrics(records: &[PredictionRecord]) -> Result<ConformalMetrics> {
    if records.is_empty() {
        return Err(Error::Empty("prediction records"));
    }
    let mut m = ConformalMetrics::default();
    for r in records {
        let size = r.set.len();
        let covered = r.contains(r.truth);
        let false_in_set = size - usize::from(covered);
        m.pctempty += f64::from(u8::from(size == 0));
        m.m_criterion += f64::from(u8::from(size > 1));
        let p_sum: f64 = r.p_values.iter().sum();
        let p_max = r.p_values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        m.f_criterion += p_sum - p_max;
        m.coverage += f64::from(u8::from(covered));
        // |Γ ∩ {y}| / |Γ ∪ {y}|
        m.jaccard += if covered { 1.0 / size as f64 } else { 0.0 };
        m.om += f64::from(u8::from(false_in_set > 0));
        let false_p = r
            .p_values
            .iter()
            .enumerate()
            .filter(|&(y, _)| y != r.truth)
            .map(|(_, &p)| p);
        m.of += false_p.clone().sum::<f64>();
        m.ou += false_p.fold(0.0, f64::max);
        m.oe += false_in_set as f64;
    }
    let k = records.len() as f64;
    for v in [
        &mut m.coverage,
        &mut m.jaccard,
        &mut m.pctempty,
        &mut m.m_criterion,
        &mut m.f_criterion,
        &mut m.om,
        &mut m.of,
        &mut m.ou,
        &mut m.oe,
    ] {
        *v /= k;
    }
    // every member of a set is either the true class or a false one
    m.setsize = m.coverage + m.oe;
    Ok(m)
}

/// Coverage of each user's records, in user-index order; users without
/// records are skipped.
pub fn coverage_by_user(records: &[PredictionRecord]) -> Vec<(usize, usize, f64)> {
    let n_users = records.iter().map(|r| r.user + 1).max().unwrap_or(0);
    let mut hits = vec![0usize; n_users];
    let mut counts = vec![0usize; n_users];
    for r in records {
        counts[r.user] += 1;
        hits[r.user] += usize::from(r.contains(r.truth));
    }
    (0..n_users)
        .filter(|&u| counts[u] > 0)
        .map(|u| (u, counts[u], hits[u] as f64 / counts[u] as f64))
        .collect()
}
