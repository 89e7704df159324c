//! Split (inductive) conformal classification with the LAC nonconformity
//! score `1 - score(true label)`.
//!
//! Calibration sorts the nonconformity scores of a held-out calibration set
//! and picks the threshold `q_hat` as the `m`-th smallest, where
//! `m = ceil((n + 1)(1 - epsilon))`. When `m > n` no finite threshold keeps the
//! guarantee and `q_hat = 1`, so every class enters every set.
//!
//! The prediction set for `x` is `{y : 1 - score(x, y) <= q_hat}` and the
//! p-value of a candidate label is `(#{j : alpha_j >= alpha(x, y)} + 1) / (n + 1)`.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::classifiers::{argmax, ScoreModel};
use crate::data::Matrix;
use crate::error::{Error, Result};

// Absorbs rounding in (n + 1)(1 - epsilon) when the exact product is integral.
const RANK_SLACK: f64 = 1e-9;

pub fn nonconformity(score: f64) -> f64 {
    1.0 - score
}

/// One-based rank `m = ceil((n + 1)(1 - epsilon))` of the threshold score.
pub fn quantile_rank(n_cal: usize, epsilon: f64) -> usize {
    (((n_cal + 1) as f64) * (1.0 - epsilon) - RANK_SLACK).ceil().max(1.0) as usize
}

/// Threshold over ascending calibration scores; 1 when the rank exceeds `n`.
pub fn threshold(sorted_scores: &[f64], epsilon: f64) -> f64 {
    let m = quantile_rank(sorted_scores.len(), epsilon);
    if m > sorted_scores.len() {
        1.0
    } else {
        sorted_scores[m - 1]
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("epsilon {epsilon} not in (0, 1)")))
    }
}

/// Output of the conformal predictor for one test instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    /// Class indices in the prediction set, ascending.
    pub set: Vec<usize>,
    pub p_values: Vec<f64>,
    pub point: usize,
    pub truth: usize,
    pub user: usize,
}

impl PredictionRecord {
    pub fn contains(&self, class: usize) -> bool {
        self.set.binary_search(&class).is_ok()
    }

    pub fn n_classes(&self) -> usize {
        self.p_values.len()
    }
}

#[derive(Debug, Clone)]
pub struct ConformalModel<M> {
    base: M,
    cal_scores: Vec<f64>,
    epsilon: f64,
    q_hat: f64,
}

impl<M: ScoreModel> ConformalModel<M> {
    pub fn calibrate(base: M, x_cal: &Matrix, y_cal: &[usize], epsilon: f64) -> Result<Self> {
        if y_cal.is_empty() {
            return Err(Error::Empty("calibration set"));
        }
        if x_cal.n_rows() != y_cal.len() {
            return Err(Error::DimensionMismatch {
                expected: x_cal.n_rows(),
                got: y_cal.len(),
            });
        }
        let mut scores = Vec::with_capacity(y_cal.len());
        for (row, &y) in x_cal.rows().zip(y_cal) {
            let s = base.predict_scores(row)?;
            let score = *s
                .get(y)
                .ok_or_else(|| Error::InvalidParameter(format!("label {y} out of range")))?;
            scores.push(nonconformity(score));
        }
        Self::from_scores(base, scores, epsilon)
    }

    /// Builds the model from precomputed nonconformity scores.
    pub fn from_scores(base: M, mut cal_scores: Vec<f64>, epsilon: f64) -> Result<Self> {
        check_epsilon(epsilon)?;
        if cal_scores.is_empty() {
            return Err(Error::Empty("calibration set"));
        }
        cal_scores.sort_by(f64::total_cmp);
        let q_hat = threshold(&cal_scores, epsilon);
        Ok(Self {
            base,
            cal_scores,
            epsilon,
            q_hat,
        })
    }

    /// Re-thresholds the same calibration scores at another error level.
    pub fn set_epsilon(&mut self, epsilon: f64) -> Result<()> {
        check_epsilon(epsilon)?;
        self.epsilon = epsilon;
        self.q_hat = threshold(&self.cal_scores, epsilon);
        Ok(())
    }

    pub fn base(&self) -> &M {
        &self.base
    }

    pub fn cal_scores(&self) -> &[f64] {
        &self.cal_scores
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn q_hat(&self) -> f64 {
        self.q_hat
    }

    pub fn set_from_scores(&self, scores: &[f64]) -> Vec<usize> {
        (0..scores.len())
            .filter(|&y| nonconformity(scores[y]) <= self.q_hat)
            .collect()
    }

    /// p-value of a nonconformity value against the calibration scores.
    pub fn p_value_of(&self, alpha: f64) -> f64 {
        let below = self.cal_scores.partition_point(|&a| a < alpha);
        let n = self.cal_scores.len();
        (n - below + 1) as f64 / (n + 1) as f64
    }

    pub fn predict_set(&self, x: &[f64]) -> Result<Vec<usize>> {
        Ok(self.set_from_scores(&self.base.predict_scores(x)?))
    }

    pub fn p_value(&self, x: &[f64], y: usize) -> Result<f64> {
        let scores = self.base.predict_scores(x)?;
        let score = *scores
            .get(y)
            .ok_or_else(|| Error::InvalidParameter(format!("class {y} out of range")))?;
        Ok(self.p_value_of(nonconformity(score)))
    }

    /// Full record for one test row: set, p-values and arg-max prediction.
    pub fn predict(&self, x: &[f64], truth: usize, user: usize) -> Result<PredictionRecord> {
        let scores = self.base.predict_scores(x)?;
        Ok(PredictionRecord {
            set: self.set_from_scores(&scores),
            p_values: scores.iter().map(|&s| self.p_value_of(nonconformity(s))).collect(),
            point: argmax(&scores),
            truth,
            user,
        })
    }
}

/// Prediction records together with the vocabularies needed to print them.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordLog {
    pub class_names: Vec<String>,
    pub user_names: Vec<String>,
    pub records: Vec<PredictionRecord>,
}

impl RecordLog {
    /// CSV with columns `user,truth,point,set,p_<class>...`; the set column
    /// joins class names with `;`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["user".to_string(), "truth".into(), "point".into(), "set".into()];
        header.extend(self.class_names.iter().map(|c| format!("p_{c}")));
        w.write_record(&header)?;
        for r in &self.records {
            let set = r
                .set
                .iter()
                .map(|&c| self.class_names[c].as_str())
                .collect::<Vec<_>>()
                .join(";");
            let mut row = vec![
                self.user_names[r.user].clone(),
                self.class_names[r.truth].clone(),
                self.class_names[r.point].clone(),
                set,
            ];
            row.extend(r.p_values.iter().map(|p| p.to_string()));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let header = rdr.headers()?.clone();
        let expected = ["user", "truth", "point", "set"];
        if header.len() < 5 || header.iter().take(4).ne(expected) {
            return Err(Error::Parse(
                "record log header must start with user,truth,point,set,p_*".into(),
            ));
        }
        let class_names: Vec<String> = header
            .iter()
            .skip(4)
            .map(|h| {
                h.strip_prefix("p_")
                    .map(str::to_string)
                    .ok_or_else(|| Error::Parse(format!("unexpected column {h}")))
            })
            .collect::<Result<_>>()?;
        let class_of = |name: &str| {
            class_names
                .iter()
                .position(|c| c == name)
                .ok_or_else(|| Error::Parse(format!("unknown class {name}")))
        };
        let mut user_names: Vec<String> = Vec::new();
        let mut records = Vec::new();
        for row in rdr.records() {
            let row = row?;
            let user = match user_names.iter().position(|u| u == &row[0]) {
                Some(u) => u,
                None => {
                    user_names.push(row[0].to_string());
                    user_names.len() - 1
                }
            };
            let mut set = if row[3].is_empty() {
                Vec::new()
            } else {
                row[3].split(';').map(class_of).collect::<Result<Vec<_>>>()?
            };
            set.sort_unstable();
            let p_values = row
                .iter()
                .skip(4)
                .map(|v| v.parse::<f64>().map_err(|e| Error::Parse(format!("p-value {v}: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            records.push(PredictionRecord {
                set,
                p_values,
                point: class_of(&row[2])?,
                truth: class_of(&row[1])?,
                user,
            });
        }
        Ok(Self {
            class_names,
            user_names,
            records,
        })
    }
}
