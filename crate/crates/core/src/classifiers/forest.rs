use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifiers::{check_dim, ScoreModel};
use crate::data::Matrix;
use crate::error::{Error, Result};

fn default_trees() -> usize {
    100
}

fn default_min_split() -> usize {
    2
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestConfig {
    #[serde(default = "default_trees")]
    pub n_trees: usize,
    /// `None` grows trees until leaves are pure.
    #[serde(default)]
    pub max_depth: Option<usize>,
    #[serde(default = "default_min_split")]
    pub min_samples_split: usize,
    /// Candidate features per split; `None` means `ceil(sqrt(d))`.
    #[serde(default)]
    pub features_per_split: Option<usize>,
    #[serde(default = "default_true")]
    pub bootstrap: bool,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            n_trees: default_trees(),
            max_depth: None,
            min_samples_split: default_min_split(),
            features_per_split: None,
            bootstrap: true,
        }
    }
}

#[derive(Debug, Clone)]
enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf(Vec<f64>),
}

/// CART tree with Gini impurity.
#[derive(Debug, Clone)]
pub struct DecisionTree {
    nodes: Vec<Node>,
}

impl DecisionTree {
    pub fn leaf_scores(&self, x: &[f64]) -> &[f64] {
        let mut id = 0;
        loop {
            match &self.nodes[id] {
                Node::Leaf(scores) => return scores,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => id = if x[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], id: usize) -> usize {
            match &nodes[id] {
                Node::Leaf(_) => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

struct Grower<'a> {
    x: &'a Matrix,
    y: &'a [usize],
    n_classes: usize,
    max_features: usize,
    max_depth: usize,
    min_samples_split: usize,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    // sum over children of Σ count² / n_child; larger is purer
    purity: f64,
}

impl Grower<'_> {
    fn counts(&self, rows: &[usize]) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes];
        for &r in rows {
            counts[self.y[r]] += 1;
        }
        counts
    }

    fn grow(&self, rows: Vec<usize>, rng: &mut ChaCha8Rng) -> DecisionTree {
        let mut nodes = vec![Node::Leaf(Vec::new())];
        let mut stack = vec![(0usize, rows, 0usize)];
        let mut features: Vec<usize> = (0..self.x.n_cols()).collect();
        while let Some((id, rows, depth)) = stack.pop() {
            let counts = self.counts(&rows);
            let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
            let split = if pure || depth >= self.max_depth || rows.len() < self.min_samples_split {
                None
            } else {
                features.shuffle(rng);
                self.best_split(&rows, &features)
            };
            match split {
                None => {
                    let n = rows.len() as f64;
                    nodes[id] = Node::Leaf(counts.iter().map(|&c| c as f64 / n).collect());
                }
                Some(s) => {
                    let (left_rows, right_rows): (Vec<usize>, Vec<usize>) =
                        rows.iter().partition(|&&r| self.x.row(r)[s.feature] <= s.threshold);
                    let left = nodes.len();
                    nodes.push(Node::Leaf(Vec::new()));
                    let right = nodes.len();
                    nodes.push(Node::Leaf(Vec::new()));
                    nodes[id] = Node::Split {
                        feature: s.feature,
                        threshold: s.threshold,
                        left,
                        right,
                    };
                    stack.push((right, right_rows, depth + 1));
                    stack.push((left, left_rows, depth + 1));
                }
            }
        }
        DecisionTree { nodes }
    }

    /// Evaluates `max_features` candidates in the given order, continuing past
    /// that budget only while no valid threshold has been found.
    fn best_split(&self, rows: &[usize], features: &[usize]) -> Option<BestSplit> {
        let mut best: Option<BestSplit> = None;
        let mut pairs: Vec<(f64, usize)> = Vec::with_capacity(rows.len());
        let total = self.counts(rows);
        let n = rows.len();
        for (visited, &f) in features.iter().enumerate() {
            if visited >= self.max_features && best.is_some() {
                break;
            }
            pairs.clear();
            pairs.extend(rows.iter().map(|&r| (self.x.row(r)[f], self.y[r])));
            pairs.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
            let mut left = vec![0usize; self.n_classes];
            let mut right = total.clone();
            let mut sq_left = 0.0f64;
            let mut sq_right: f64 = total.iter().map(|&c| (c * c) as f64).sum();
            for i in 0..n - 1 {
                let c = pairs[i].1;
                sq_left += (2 * left[c] + 1) as f64;
                left[c] += 1;
                sq_right -= (2 * right[c] - 1) as f64;
                right[c] -= 1;
                let (a, b) = (pairs[i].0, pairs[i + 1].0);
                if a >= b {
                    continue;
                }
                let n_left = (i + 1) as f64;
                let purity = sq_left / n_left + sq_right / (n as f64 - n_left);
                if best.as_ref().is_none_or(|s| purity > s.purity) {
                    let mid = a + (b - a) / 2.0;
                    let threshold = if mid < b { mid } else { a };
                    best = Some(BestSplit {
                        feature: f,
                        threshold,
                        purity,
                    });
                }
            }
        }
        best
    }
}

/// Bagged ensemble of Gini trees; scores are the mean of leaf class frequencies.
#[derive(Debug, Clone)]
pub struct RandomForest {
    trees: Vec<DecisionTree>,
    n_classes: usize,
    n_features: usize,
}

impl RandomForest {
    pub(crate) fn fit(config: &ForestConfig, x: &Matrix, y: &[usize], n_classes: usize, seed: u64) -> Result<Self> {
        if config.n_trees == 0 {
            return Err(Error::InvalidParameter("n_trees must be at least 1".into()));
        }
        if config.max_depth == Some(0) {
            return Err(Error::InvalidParameter("max_depth must be positive".into()));
        }
        let d = x.n_cols();
        let max_features = config
            .features_per_split
            .unwrap_or_else(|| (d as f64).sqrt().ceil() as usize)
            .clamp(1, d.max(1));
        let grower = Grower {
            x,
            y,
            n_classes,
            max_features,
            max_depth: config.max_depth.unwrap_or(usize::MAX),
            min_samples_split: config.min_samples_split.max(2),
        };
        let n = y.len();
        // One ChaCha stream per tree keeps the forest independent of scheduling.
        let trees = (0..config.n_trees)
            .into_par_iter()
            .map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(t as u64);
                let rows: Vec<usize> = if config.bootstrap {
                    (0..n).map(|_| rng.random_range(0..n)).collect()
                } else {
                    (0..n).collect()
                };
                grower.grow(rows, &mut rng)
            })
            .collect();
        Ok(Self {
            trees,
            n_classes,
            n_features: d,
        })
    }

    pub fn trees(&self) -> &[DecisionTree] {
        &self.trees
    }
}

impl ScoreModel for RandomForest {
    fn n_classes(&self) -> usize {
        self.n_classes
    }

    fn n_features(&self) -> usize {
        self.n_features
    }

    fn predict_scores(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.n_features, x)?;
        let mut scores = vec![0.0; self.n_classes];
        for tree in &self.trees {
            for (s, v) in scores.iter_mut().zip(tree.leaf_scores(x)) {
                *s += v;
            }
        }
        let t = self.trees.len() as f64;
        scores.iter_mut().for_each(|s| *s /= t);
        Ok(scores)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stump() -> ForestConfig {
        ForestConfig {
            n_trees: 1,
            max_depth: Some(1),
            bootstrap: false,
            ..ForestConfig::default()
        }
    }

    #[test]
    fn single_stump_separates_two_points() {
        // Only one threshold exists between 0 and 1: the midpoint.
        let x = Matrix::new(vec![0.0, 1.0], 1).unwrap();
        let f = RandomForest::fit(&stump(), &x, &[0, 1], 2, 0).unwrap();
        assert_eq!(f.trees()[0].depth(), 1);
        assert_eq!(f.predict(&[0.0]).unwrap(), 0);
        assert_eq!(f.predict(&[1.0]).unwrap(), 1);
        assert_eq!(f.predict_scores(&[0.49]).unwrap(), vec![1.0, 0.0]);
        assert_eq!(f.predict_scores(&[0.51]).unwrap(), vec![0.0, 1.0]);
    }

    #[test]
    fn unanimous_leaves_give_full_score() {
        let x = Matrix::new(vec![0.0, 0.1, 0.2, 5.0, 5.1, 5.2], 1).unwrap();
        let cfg = ForestConfig {
            n_trees: 25,
            ..ForestConfig::default()
        };
        let f = RandomForest::fit(&cfg, &x, &[0, 0, 0, 1, 1, 1], 2, 3).unwrap();
        // any bootstrap containing both classes splits between 0.2 and 5.0;
        // one with a single class is a pure leaf of that class
        let s = f.predict_scores(&[-10.0]).unwrap();
        assert!(s[0] > 0.5);
        assert_eq!(s[0] + s[1], 1.0);
    }

    #[test]
    fn same_seed_same_forest() {
        let x = Matrix::new((0..60).map(|i| ((i * 37) % 17) as f64).collect(), 3).unwrap();
        let y: Vec<usize> = (0..20).map(|i| i % 3).collect();
        let cfg = ForestConfig {
            n_trees: 15,
            ..ForestConfig::default()
        };
        let a = RandomForest::fit(&cfg, &x, &y, 3, 42).unwrap();
        let b = RandomForest::fit(&cfg, &x, &y, 3, 42).unwrap();
        let c = RandomForest::fit(&cfg, &x, &y, 3, 43).unwrap();
        let mut differs = false;
        for row in x.rows() {
            assert_eq!(a.predict_scores(row).unwrap(), b.predict_scores(row).unwrap());
            differs |= a.predict_scores(row).unwrap() != c.predict_scores(row).unwrap();
        }
        assert!(differs);
    }

    #[test]
    fn xor_needs_zero_gain_root_split() {
        let x = Matrix::new(vec![0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 1.0, 1.0], 2).unwrap();
        let y = [0, 1, 1, 0];
        let cfg = ForestConfig {
            n_trees: 1,
            bootstrap: false,
            features_per_split: Some(2),
            ..ForestConfig::default()
        };
        let f = RandomForest::fit(&cfg, &x, &y, 2, 0).unwrap();
        for (row, &label) in x.rows().zip(&y) {
            assert_eq!(f.predict(row).unwrap(), label);
        }
    }

    #[test]
    fn constant_features_make_a_leaf() {
        let x = Matrix::new(vec![1.0, 1.0, 1.0, 1.0], 1).unwrap();
        let f = RandomForest::fit(&stump(), &x, &[0, 1, 0, 1], 2, 0).unwrap();
        assert_eq!(f.predict_scores(&[1.0]).unwrap(), vec![0.5, 0.5]);
    }
}
