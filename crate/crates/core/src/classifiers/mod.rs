//! Score-producing classifiers.
//!
//! Every model returns, for an input row, a vector of per-class scores in
//! `[0, 1]` that sums to one. The conformal layer only relies on that contract,
//! so further algorithms can be added by implementing [`ScoreModel`].

mod forest;
mod gnb;
mod knn;

pub use forest::{ForestConfig, RandomForest};
pub use gnb::GaussianNb;
pub use knn::Knn;

use serde::{Deserialize, Serialize};

use crate::data::Matrix;
use crate::error::{Error, Result};

pub trait ScoreModel: Send + Sync {
    fn n_classes(&self) -> usize;

    fn n_features(&self) -> usize;

    fn predict_scores(&self, x: &[f64]) -> Result<Vec<f64>>;

    /// Arg-max of the scores, lowest class index on ties.
    fn predict(&self, x: &[f64]) -> Result<usize> {
        Ok(argmax(&self.predict_scores(x)?))
    }
}

impl<T: ScoreModel + ?Sized> ScoreModel for &T {
    fn n_classes(&self) -> usize {
        (**self).n_classes()
    }

    fn n_features(&self) -> usize {
        (**self).n_features()
    }

    fn predict_scores(&self, x: &[f64]) -> Result<Vec<f64>> {
        (**self).predict_scores(x)
    }
}

pub(crate) fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

pub(crate) fn check_dim(expected: usize, x: &[f64]) -> Result<()> {
    if x.len() == expected {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got: x.len() })
    }
}

pub const DEFAULT_K: usize = 5;

fn default_k() -> usize {
    DEFAULT_K
}

/// Algorithm choice plus its hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ClassifierConfig {
    Gnb,
    Knn {
        #[serde(default = "default_k")]
        k: usize,
    },
    Rf(ForestConfig),
}

impl ClassifierConfig {
    pub fn knn() -> Self {
        Self::Knn { k: DEFAULT_K }
    }

    pub fn rf() -> Self {
        Self::Rf(ForestConfig::default())
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Gnb => "gnb",
            Self::Knn { .. } => "knn",
            Self::Rf(_) => "rf",
        }
    }
}

/// A trained model of any supported algorithm.
#[derive(Debug, Clone)]
pub enum Model {
    Gnb(GaussianNb),
    Knn(Knn),
    Forest(RandomForest),
}

impl ScoreModel for Model {
    fn n_classes(&self) -> usize {
        match self {
            Model::Gnb(m) => m.n_classes(),
            Model::Knn(m) => m.n_classes(),
            Model::Forest(m) => m.n_classes(),
        }
    }

    fn n_features(&self) -> usize {
        match self {
            Model::Gnb(m) => m.n_features(),
            Model::Knn(m) => m.n_features(),
            Model::Forest(m) => m.n_features(),
        }
    }

    fn predict_scores(&self, x: &[f64]) -> Result<Vec<f64>> {
        match self {
            Model::Gnb(m) => m.predict_scores(x),
            Model::Knn(m) => m.predict_scores(x),
            Model::Forest(m) => m.predict_scores(x),
        }
    }
}

/// Trains `config` on `(x, y)`. Every class in `0..n_classes` must occur in `y`.
pub fn fit(config: &ClassifierConfig, x: &Matrix, y: &[usize], n_classes: usize, seed: u64) -> Result<Model> {
    validate_training(x, y, n_classes)?;
    Ok(match config {
        ClassifierConfig::Gnb => Model::Gnb(GaussianNb::fit(x, y, n_classes)?),
        ClassifierConfig::Knn { k } => Model::Knn(Knn::fit(x, y, n_classes, *k)?),
        ClassifierConfig::Rf(cfg) => Model::Forest(RandomForest::fit(cfg, x, y, n_classes, seed)?),
    })
}

fn validate_training(x: &Matrix, y: &[usize], n_classes: usize) -> Result<()> {
    if y.is_empty() {
        return Err(Error::Empty("training set"));
    }
    if x.n_rows() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.n_rows(),
            got: y.len(),
        });
    }
    let mut counts = vec![0usize; n_classes];
    for &c in y {
        if c >= n_classes {
            return Err(Error::InvalidParameter(format!("label {c} >= n_classes {n_classes}")));
        }
        counts[c] += 1;
    }
    if let Some(class) = counts.iter().position(|&c| c == 0) {
        return Err(Error::MissingClass { class });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn blobs(seed: u64, n_per: usize, n_classes: usize, dims: usize) -> (Matrix, Vec<usize>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = Matrix::with_cols(dims);
        let mut y = Vec::new();
        for c in 0..n_classes {
            for _ in 0..n_per {
                let row: Vec<f64> = (0..dims)
                    .map(|j| (c * (j + 1)) as f64 + rng.random_range(-1.0..1.0))
                    .collect();
                x.push_row(&row).unwrap();
                y.push(c);
            }
        }
        (x, y)
    }

    #[test]
    fn missing_class_is_rejected() {
        let x = Matrix::new(vec![0.0, 1.0], 1).unwrap();
        for cfg in [ClassifierConfig::Gnb, ClassifierConfig::knn(), ClassifierConfig::rf()] {
            assert!(matches!(
                fit(&cfg, &x, &[0, 0], 2, 0),
                Err(Error::MissingClass { class: 1 })
            ));
        }
    }

    #[test]
    fn scores_normalize_for_random_inputs() {
        let (x, y) = blobs(3, 20, 3, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for cfg in [ClassifierConfig::Gnb, ClassifierConfig::knn(), ClassifierConfig::rf()] {
            let model = fit(&cfg, &x, &y, 3, 7).unwrap();
            for _ in 0..1000 {
                let q: Vec<f64> = (0..4).map(|_| rng.random_range(-5.0..10.0)).collect();
                let s = model.predict_scores(&q).unwrap();
                assert_eq!(s.len(), 3);
                assert!(s.iter().all(|&v| (0.0..=1.0).contains(&v)), "{cfg:?} {s:?}");
                assert!((s.iter().sum::<f64>() - 1.0).abs() <= 1e-9, "{cfg:?} {s:?}");
            }
        }
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let (x, y) = blobs(1, 5, 2, 3);
        for cfg in [ClassifierConfig::Gnb, ClassifierConfig::knn(), ClassifierConfig::rf()] {
            let model = fit(&cfg, &x, &y, 2, 0).unwrap();
            assert!(matches!(
                model.predict_scores(&[0.0]),
                Err(Error::DimensionMismatch { expected: 3, got: 1 })
            ));
        }
    }

    #[test]
    fn argmax_prefers_lowest_index() {
        assert_eq!(argmax(&[0.5, 0.5]), 0);
        assert_eq!(argmax(&[0.2, 0.4, 0.4]), 1);
    }

    #[test]
    fn config_round_trips_through_json() {
        let cfgs = vec![
            ClassifierConfig::Gnb,
            ClassifierConfig::Knn { k: 3 },
            ClassifierConfig::rf(),
        ];
        let text = serde_json::to_string(&cfgs).unwrap();
        let back: Vec<ClassifierConfig> = serde_json::from_str(&text).unwrap();
        assert_eq!(cfgs, back);
        let parsed: ClassifierConfig = serde_json::from_str(r#"{"kind":"knn"}"#).unwrap();
        assert_eq!(parsed, ClassifierConfig::Knn { k: 5 });
    }
}
