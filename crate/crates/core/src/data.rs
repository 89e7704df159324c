//! Dataset representation, min-max scaling, split indices and seeding.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense row-major matrix of `f64`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Matrix {
    data: Vec<f64>,
    n_cols: usize,
}

impl Matrix {
    pub fn new(data: Vec<f64>, n_cols: usize) -> Result<Self> {
        if n_cols == 0 {
            if !data.is_empty() {
                return Err(Error::InvalidParameter("zero columns with non-empty data".into()));
            }
        } else if !data.len().is_multiple_of(n_cols) {
            return Err(Error::DimensionMismatch {
                expected: n_cols * (data.len() / n_cols + 1),
                got: data.len(),
            });
        }
        Ok(Self { data, n_cols })
    }

    pub fn with_cols(n_cols: usize) -> Self {
        Self {
            data: Vec::new(),
            n_cols,
        }
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n_cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut m = Self::with_cols(n_cols);
        for r in rows {
            m.push_row(r.as_ref())?;
        }
        Ok(m)
    }

    pub fn push_row(&mut self, row: &[f64]) -> Result<()> {
        if row.len() != self.n_cols {
            return Err(Error::DimensionMismatch {
                expected: self.n_cols,
                got: row.len(),
            });
        }
        self.data.extend_from_slice(row);
        Ok(())
    }

    pub fn n_rows(&self) -> usize {
        if self.n_cols == 0 {
            0
        } else {
            self.data.len() / self.n_cols
        }
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.n_cols.max(1))
    }

    /// Copies the given rows, in order, into a new matrix.
    pub fn select(&self, rows: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(rows.len() * self.n_cols);
        for &r in rows {
            data.extend_from_slice(self.row(r));
        }
        Matrix {
            data,
            n_cols: self.n_cols,
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

/// Feature matrix plus class labels and user identifiers.
///
/// Class and user indices are dense: every label is `< class_names.len()` and
/// every user is `< user_names.len()`. All feature values are finite.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiUserDataset {
    features: Matrix,
    labels: Vec<usize>,
    users: Vec<usize>,
    class_names: Vec<String>,
    user_names: Vec<String>,
    feature_names: Vec<String>,
}

impl MultiUserDataset {
    pub fn new(
        features: Matrix,
        labels: Vec<usize>,
        users: Vec<usize>,
        class_names: Vec<String>,
        user_names: Vec<String>,
        feature_names: Vec<String>,
    ) -> Result<Self> {
        let n = features.n_rows();
        if labels.len() != n || users.len() != n {
            return Err(Error::InvalidDataset(format!(
                "{} feature rows but {} labels and {} users",
                n,
                labels.len(),
                users.len()
            )));
        }
        if feature_names.len() != features.n_cols() {
            return Err(Error::DimensionMismatch {
                expected: features.n_cols(),
                got: feature_names.len(),
            });
        }
        if let Some(&bad) = labels.iter().find(|&&c| c >= class_names.len()) {
            return Err(Error::InvalidDataset(format!("class index {bad} out of range")));
        }
        if let Some(&bad) = users.iter().find(|&&u| u >= user_names.len()) {
            return Err(Error::InvalidDataset(format!("user index {bad} out of range")));
        }
        if features.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidDataset("non-finite feature value".into()));
        }
        Ok(Self {
            features,
            labels,
            users,
            class_names,
            user_names,
            feature_names,
        })
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn users(&self) -> &[usize] {
        &self.users
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn user_names(&self) -> &[String] {
        &self.user_names
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn n_users(&self) -> usize {
        self.user_names.len()
    }

    pub fn n_features(&self) -> usize {
        self.features.n_cols()
    }

    /// Row indices belonging to `user`, in dataset order.
    pub fn rows_of_user(&self, user: usize) -> Vec<usize> {
        (0..self.n_rows()).filter(|&i| self.users[i] == user).collect()
    }

    /// Row indices not belonging to `user`, in dataset order.
    pub fn rows_except_user(&self, user: usize) -> Vec<usize> {
        (0..self.n_rows()).filter(|&i| self.users[i] != user).collect()
    }

    /// Sorted list of classes that occur among `rows`.
    pub fn classes_in(&self, rows: &[usize]) -> Vec<usize> {
        let mut seen = vec![false; self.n_classes()];
        for &r in rows {
            seen[self.labels[r]] = true;
        }
        (0..self.n_classes()).filter(|&c| seen[c]).collect()
    }

    /// Per-user, per-class instance counts (`counts[user][class]`).
    pub fn user_class_counts(&self) -> Vec<Vec<usize>> {
        let mut counts = vec![vec![0; self.n_classes()]; self.n_users()];
        for (&u, &c) in self.users.iter().zip(&self.labels) {
            counts[u][c] += 1;
        }
        counts
    }

    /// Keeps only the given rows, re-indexing users and classes so that
    /// vocabularies contain only values still present (original order kept).
    pub fn retain_rows(&self, rows: &[usize]) -> Result<Self> {
        let mut user_map = vec![usize::MAX; self.n_users()];
        let mut class_map = vec![usize::MAX; self.n_classes()];
        for &r in rows {
            user_map[self.users[r]] = 0;
            class_map[self.labels[r]] = 0;
        }
        let remap = |map: &mut Vec<usize>, names: &[String]| {
            let mut kept = Vec::new();
            for (i, slot) in map.iter_mut().enumerate() {
                if *slot != usize::MAX {
                    *slot = kept.len();
                    kept.push(names[i].clone());
                }
            }
            kept
        };
        let user_names = remap(&mut user_map, &self.user_names);
        let class_names = remap(&mut class_map, &self.class_names);
        Self::new(
            self.features.select(rows),
            rows.iter().map(|&r| class_map[self.labels[r]]).collect(),
            rows.iter().map(|&r| user_map[self.users[r]]).collect(),
            class_names,
            user_names,
            self.feature_names.clone(),
        )
    }

    /// Drops every user that has fewer than `min` instances of any class they
    /// performed.
    pub fn filter_min_per_user_class(&self, min: usize) -> Result<Self> {
        let counts = self.user_class_counts();
        let keep_user: Vec<bool> = counts
            .iter()
            .map(|per_class| per_class.iter().all(|&c| c == 0 || c >= min))
            .collect();
        let rows: Vec<usize> = (0..self.n_rows()).filter(|&i| keep_user[self.users[i]]).collect();
        if rows.is_empty() {
            return Err(Error::InvalidDataset(format!(
                "no user has at least {min} instances for every class they performed"
            )));
        }
        self.retain_rows(&rows)
    }
}

/// Per-feature minimum and maximum learned from training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleParams {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl ScaleParams {
    pub fn fit(features: &Matrix, rows: &[usize]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Empty("scaler rows"));
        }
        let d = features.n_cols();
        let mut min = vec![f64::INFINITY; d];
        let mut max = vec![f64::NEG_INFINITY; d];
        for &r in rows {
            for (j, &v) in features.row(r).iter().enumerate() {
                min[j] = min[j].min(v);
                max[j] = max[j].max(v);
            }
        }
        Ok(Self { min, max })
    }

    /// `(x - min) / (max - min)`, or 0 for a constant feature. Not clamped.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.min.len() {
            return Err(Error::DimensionMismatch {
                expected: self.min.len(),
                got: x.len(),
            });
        }
        Ok(x.iter()
            .zip(self.min.iter().zip(&self.max))
            .map(|(&v, (&lo, &hi))| if hi > lo { (v - lo) / (hi - lo) } else { 0.0 })
            .collect())
    }

    /// Scales the selected rows of `features` into a new matrix.
    pub fn transform(&self, features: &Matrix, rows: &[usize]) -> Result<Matrix> {
        let mut out = Matrix::with_cols(features.n_cols());
        for &r in rows {
            out.push_row(&self.apply(features.row(r))?)?;
        }
        Ok(out)
    }
}

/// Convenience wrapper matching the free-function form used by the strategies.
pub fn fit_scaler(data: &MultiUserDataset, rows: &[usize]) -> Result<ScaleParams> {
    ScaleParams::fit(data.features(), rows)
}

pub fn apply_scaler(params: &ScaleParams, x: &[f64]) -> Result<Vec<f64>> {
    params.apply(x)
}

/// Train / calibration / test row indices of one split.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub calibration: Vec<usize>,
    pub test: Vec<usize>,
}

impl SplitIndices {
    /// Checks disjointness, bounds and non-emptiness of train and test.
    pub fn validate(&self, n_rows: usize) -> Result<()> {
        if self.train.is_empty() {
            return Err(Error::Split("empty training part".into()));
        }
        if self.test.is_empty() {
            return Err(Error::Split("empty test part".into()));
        }
        let mut seen = vec![false; n_rows];
        for &i in self.train.iter().chain(&self.calibration).chain(&self.test) {
            if i >= n_rows {
                return Err(Error::Split(format!("row {i} out of range")));
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::Split(format!("row {i} appears in more than one part")));
            }
        }
        Ok(())
    }
}

/// Mixes `salt` into `base` with the splitmix64 finalizer.
pub fn derive_seed(base: u64, salt: u64) -> u64 {
    let mut z = base
        ^ salt
            .wrapping_add(0x9E37_79B9_7F4A_7C15)
            .wrapping_mul(0xD6E8_FEB8_6659_FD93);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
