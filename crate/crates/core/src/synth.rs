//! Seeded multi-user Gaussian cluster generator.
//!
//! Every class has a global center; every user shifts all of their clusters by
//! a private offset vector of fixed norm. With a zero shift all users draw from
//! the same distribution, so rows are exchangeable across users.

use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::{rng_from_seed, Matrix, MultiUserDataset};
use crate::error::{Error, Result};

const MAX_REJECTIONS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub n_users: usize,
    pub n_classes: usize,
    pub per_user_per_class: usize,
    pub dims: usize,
    /// Norm of each user's offset vector.
    pub user_shift: f64,
    /// Standard deviation of the isotropic within-cluster noise.
    pub noise: f64,
    /// Class centers are drawn uniformly from `[-spread, spread]^dims`;
    /// `None` uses `2 * noise * n_classes^(1/dims)`.
    pub spread: Option<f64>,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_users: 3,
            n_classes: 4,
            per_user_per_class: 40,
            dims: 2,
            user_shift: 0.0,
            noise: 0.5,
            spread: None,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn spread(&self) -> f64 {
        self.spread
            .unwrap_or_else(|| 2.0 * self.noise * (self.n_classes as f64).powf(1.0 / self.dims as f64))
    }
}

pub fn generate(config: &SynthConfig) -> Result<MultiUserDataset> {
    let SynthConfig {
        n_users,
        n_classes,
        per_user_per_class,
        dims,
        user_shift,
        noise,
        ..
    } = *config;
    if n_users == 0 || n_classes == 0 || per_user_per_class == 0 || dims == 0 {
        return Err(Error::InvalidParameter(
            "synthetic counts must all be at least 1".into(),
        ));
    }
    if !(noise > 0.0) || !(user_shift >= 0.0) {
        return Err(Error::InvalidParameter("noise must be > 0 and user_shift >= 0".into()));
    }
    let spread = config.spread();
    let mut rng = rng_from_seed(config.seed);

    let min_dist = 4.0 * noise;
    let mut centers: Vec<Vec<f64>> = Vec::with_capacity(n_classes);
    let mut rejections = 0;
    while centers.len() < n_classes {
        let c: Vec<f64> = (0..dims).map(|_| rng.random_range(-spread..=spread)).collect();
        let far = centers.iter().all(|o| dist(o, &c) >= min_dist);
        if far {
            centers.push(c);
        } else {
            rejections += 1;
            if rejections >= MAX_REJECTIONS {
                return Err(Error::InvalidParameter(format!(
                    "could not place {n_classes} centers {min_dist} apart within ±{spread}"
                )));
            }
        }
    }

    let offsets: Vec<Vec<f64>> = (0..n_users)
        .map(|_| {
            let dir: Vec<f64> = (0..dims).map(|_| StandardNormal.sample(&mut rng)).collect();
            let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
            if user_shift == 0.0 || norm == 0.0 {
                vec![0.0; dims]
            } else {
                dir.iter().map(|v| v / norm * user_shift).collect()
            }
        })
        .collect();

    let gauss = Normal::new(0.0, noise).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let n = n_users * n_classes * per_user_per_class;
    let mut features = Matrix::with_cols(dims);
    let mut labels = Vec::with_capacity(n);
    let mut users = Vec::with_capacity(n);
    let mut row = vec![0.0; dims];
    for (u, offset) in offsets.iter().enumerate() {
        for (c, center) in centers.iter().enumerate() {
            for _ in 0..per_user_per_class {
                for j in 0..dims {
                    row[j] = center[j] + offset[j] + gauss.sample(&mut rng);
                }
                features.push_row(&row)?;
                labels.push(c);
                users.push(u);
            }
        }
    }
    MultiUserDataset::new(
        features,
        labels,
        users,
        (0..n_classes).map(|c| format!("c{c}")).collect(),
        (0..n_users).map(|u| format!("u{u}")).collect(),
        (0..dims).map(|j| format!("x{j}")).collect(),
    )
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}
