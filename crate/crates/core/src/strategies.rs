//! Multi-user evaluation strategies.
//!
//! * `MM` mixes all users: one shuffled 60/20/20 train/test/calibration split.
//! * `UDM` repeats that split inside each user's own rows.
//! * `UIM` trains (60%) and calibrates (40%) on every user except the target,
//!   and tests on half of the target's rows.
//! * `UCM` trains exactly like `UIM` but calibrates on the other half of the
//!   target's rows.
//!
//! UIM and UCM draw their shuffles from the same stream, so under the same seed
//! they share training rows, test rows and the trained model.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifiers::{self, ClassifierConfig, Model, ScoreModel};
use crate::conformal::{ConformalModel, PredictionRecord};
use crate::data::{derive_seed, rng_from_seed, MultiUserDataset, ScaleParams, SplitIndices};
use crate::error::{Error, Result};

/// Extra attempts when a training part misses a class.
pub const MAX_RETRIES: u64 = 5;

const MODEL_SALT: u64 = 0x006d_6f64_656c;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StrategyKind {
    MM,
    UDM,
    UIM,
    UCM,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 4] = [
        StrategyKind::MM,
        StrategyKind::UDM,
        StrategyKind::UIM,
        StrategyKind::UCM,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::MM => "MM",
            StrategyKind::UDM => "UDM",
            StrategyKind::UIM => "UIM",
            StrategyKind::UCM => "UCM",
        }
    }

    pub fn is_per_user(self) -> bool {
        self != StrategyKind::MM
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        StrategyKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Parse(format!("unknown strategy {s}")))
    }
}

/// Shuffles `rows` and cuts them into floor(60%) train, floor(20%) test and the
/// remainder as calibration.
fn split_60_20_20(mut rows: Vec<usize>, seed: u64) -> Result<SplitIndices> {
    let n = rows.len();
    if n < 5 {
        return Err(Error::Split(format!("need at least 5 rows, got {n}")));
    }
    rows.shuffle(&mut rng_from_seed(seed));
    let n_train = n * 3 / 5;
    let n_test = n / 5;
    let calibration = rows.split_off(n_train + n_test);
    let test = rows.split_off(n_train);
    let split = SplitIndices {
        train: rows,
        calibration,
        test,
    };
    if split.calibration.is_empty() {
        return Err(Error::Split("empty calibration part".into()));
    }
    Ok(split)
}

pub fn split_mixed(data: &MultiUserDataset, seed: u64) -> Result<SplitIndices> {
    split_60_20_20((0..data.n_rows()).collect(), seed)
}

pub fn split_user_dependent(data: &MultiUserDataset, user: usize, seed: u64) -> Result<SplitIndices> {
    let rows = data.rows_of_user(user);
    if rows.is_empty() {
        return Err(Error::Split(format!("user {user} has no rows")));
    }
    split_60_20_20(rows, seed)
}

/// Shared shuffles of UIM and UCM: (shuffled non-target rows, shuffled target rows).
fn shuffled_pools(data: &MultiUserDataset, target: usize, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if data.n_users() < 2 {
        return Err(Error::Split("user-independent splits need at least 2 users".into()));
    }
    let mut target_rows = data.rows_of_user(target);
    if target_rows.is_empty() {
        return Err(Error::Split(format!("user {target} has no rows")));
    }
    let mut others = data.rows_except_user(target);
    if others.is_empty() {
        return Err(Error::Split("no rows outside the target user".into()));
    }
    let mut rng = rng_from_seed(seed);
    others.shuffle(&mut rng);
    target_rows.shuffle(&mut rng);
    Ok((others, target_rows))
}

pub fn split_user_independent(data: &MultiUserDataset, target: usize, seed: u64) -> Result<SplitIndices> {
    let (mut others, mut target_rows) = shuffled_pools(data, target, seed)?;
    let calibration = others.split_off(others.len() * 3 / 5);
    target_rows.truncate(target_rows.len() / 2);
    let split = SplitIndices {
        train: others,
        calibration,
        test: target_rows,
    };
    split.validate(data.n_rows())?;
    if split.calibration.is_empty() {
        return Err(Error::Split("empty calibration part".into()));
    }
    Ok(split)
}

pub fn split_user_calibrated(data: &MultiUserDataset, target: usize, seed: u64) -> Result<SplitIndices> {
    let (mut others, mut target_rows) = shuffled_pools(data, target, seed)?;
    others.truncate(others.len() * 3 / 5);
    let calibration = target_rows.split_off(target_rows.len() / 2);
    let split = SplitIndices {
        train: others,
        calibration,
        test: target_rows,
    };
    split.validate(data.n_rows())?;
    if split.calibration.is_empty() {
        return Err(Error::Split("empty calibration part".into()));
    }
    Ok(split)
}

pub fn split(data: &MultiUserDataset, kind: StrategyKind, target: usize, seed: u64) -> Result<SplitIndices> {
    match kind {
        StrategyKind::MM => split_mixed(data, seed),
        StrategyKind::UDM => split_user_dependent(data, target, seed),
        StrategyKind::UIM => split_user_independent(data, target, seed),
        StrategyKind::UCM => split_user_calibrated(data, target, seed),
    }
}

/// Classes a split's training part is expected to contain: those present in
/// the pool it is drawn from.
fn required_classes(data: &MultiUserDataset, kind: StrategyKind, target: usize) -> Vec<usize> {
    match kind {
        StrategyKind::MM => data.classes_in(&(0..data.n_rows()).collect::<Vec<_>>()),
        StrategyKind::UDM => data.classes_in(&data.rows_of_user(target)),
        StrategyKind::UIM | StrategyKind::UCM => data.classes_in(&data.rows_except_user(target)),
    }
}

/// A model trained on a subset of the classes, reporting zero score for the
/// rest.
#[derive(Debug, Clone)]
pub struct EmbeddedModel {
    inner: Model,
    classes: Vec<usize>,
    n_classes: usize,
}

impl EmbeddedModel {
    pub fn inner(&self) -> &Model {
        &self.inner
    }

    pub fn classes(&self) -> &[usize] {
        &self.classes
    }
}

impl ScoreModel for EmbeddedModel {
    fn n_classes(&self) -> usize {
        self.n_classes
    }

    fn n_features(&self) -> usize {
        self.inner.n_features()
    }

    fn predict_scores(&self, x: &[f64]) -> Result<Vec<f64>> {
        let local = self.inner.predict_scores(x)?;
        if self.classes.len() == self.n_classes {
            return Ok(local);
        }
        let mut scores = vec![0.0; self.n_classes];
        for (&c, s) in self.classes.iter().zip(local) {
            scores[c] = s;
        }
        Ok(scores)
    }
}

/// One trained and calibrated split, with the scaled test rows it applies to.
pub struct FittedSplit {
    pub split: SplitIndices,
    pub seed: u64,
    pub model: ConformalModel<EmbeddedModel>,
    pub scaler: ScaleParams,
}

/// Draws the split for `target` (retrying on missing classes), scales with
/// training statistics, trains and calibrates.
pub fn fit_split(
    data: &MultiUserDataset,
    kind: StrategyKind,
    target: usize,
    classifier: &ClassifierConfig,
    epsilon: f64,
    seed: u64,
) -> Result<FittedSplit> {
    let required = required_classes(data, kind, target);
    let mut chosen = None;
    for attempt in 0..=MAX_RETRIES {
        let s = seed.wrapping_add(attempt);
        let split = split(data, kind, target, s)?;
        if data.classes_in(&split.train) == required {
            chosen = Some((split, s));
            break;
        }
        log::debug!("{kind} target {target}: training part misses a class (attempt {attempt})");
    }
    let (split, split_seed) = chosen.ok_or_else(|| {
        Error::Split(format!(
            "{kind} target {target}: training part missed a class after {MAX_RETRIES} retries"
        ))
    })?;

    let scaler = ScaleParams::fit(data.features(), &split.train)?;
    let x_train = scaler.transform(data.features(), &split.train)?;
    let mut local = vec![usize::MAX; data.n_classes()];
    for (i, &c) in required.iter().enumerate() {
        local[c] = i;
    }
    let y_train: Vec<usize> = split.train.iter().map(|&r| local[data.labels()[r]]).collect();
    let inner = classifiers::fit(
        classifier,
        &x_train,
        &y_train,
        required.len(),
        derive_seed(split_seed, MODEL_SALT),
    )?;
    let model = EmbeddedModel {
        inner,
        classes: required,
        n_classes: data.n_classes(),
    };
    let x_cal = scaler.transform(data.features(), &split.calibration)?;
    let y_cal: Vec<usize> = split.calibration.iter().map(|&r| data.labels()[r]).collect();
    let model = ConformalModel::calibrate(model, &x_cal, &y_cal, epsilon)?;
    Ok(FittedSplit {
        split,
        seed: split_seed,
        model,
        scaler,
    })
}

impl FittedSplit {
    /// Records for the test rows at the model's current error level.
    pub fn records(&self, data: &MultiUserDataset) -> Result<Vec<PredictionRecord>> {
        self.split
            .test
            .iter()
            .map(|&r| {
                let x = self.scaler.apply(data.features().row(r))?;
                self.model.predict(&x, data.labels()[r], data.users()[r])
            })
            .collect()
    }
}

/// Targets visited by a strategy: `[0]` for MM, every user otherwise.
pub fn targets(data: &MultiUserDataset, kind: StrategyKind) -> Vec<usize> {
    if kind.is_per_user() {
        (0..data.n_users()).collect()
    } else {
        vec![0]
    }
}

/// Seed used for `target` within one repetition.
pub fn target_seed(kind: StrategyKind, seed: u64, target: usize) -> u64 {
    if kind.is_per_user() {
        derive_seed(seed, target as u64 + 1)
    } else {
        seed
    }
}

/// Runs one repetition and returns the pooled records of every target, one
/// list per requested error level (models are shared across levels).
pub fn run_strategy_multi(
    data: &MultiUserDataset,
    kind: StrategyKind,
    classifier: &ClassifierConfig,
    epsilons: &[f64],
    seed: u64,
) -> Result<Vec<Vec<PredictionRecord>>> {
    let first = *epsilons
        .first()
        .ok_or_else(|| Error::InvalidParameter("no error level given".into()))?;
    let per_target: Vec<Vec<Vec<PredictionRecord>>> = targets(data, kind)
        .into_par_iter()
        .map(|t| {
            let mut fitted = fit_split(data, kind, t, classifier, first, target_seed(kind, seed, t))?;
            epsilons
                .iter()
                .map(|&eps| {
                    fitted.model.set_epsilon(eps)?;
                    fitted.records(data)
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let mut pooled = vec![Vec::new(); epsilons.len()];
    for lists in per_target {
        for (dst, src) in pooled.iter_mut().zip(lists) {
            dst.extend(src);
        }
    }
    Ok(pooled)
}

pub fn run_strategy(
    data: &MultiUserDataset,
    kind: StrategyKind,
    classifier: &ClassifierConfig,
    epsilon: f64,
    seed: u64,
) -> Result<Vec<PredictionRecord>> {
    Ok(run_strategy_multi(data, kind, classifier, &[epsilon], seed)?.remove(0))
}
