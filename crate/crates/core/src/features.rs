//! Tri-axial accelerometer windows and their 16 summary features.

use crate::error::{Error, Result};

pub const N_FEATURES: usize = 16;

pub const FEATURE_NAMES: [&str; N_FEATURES] = [
    "mean_x",
    "mean_y",
    "mean_z",
    "std_x",
    "std_y",
    "std_z",
    "max_x",
    "max_y",
    "max_z",
    "corr_xy",
    "corr_xz",
    "corr_yz",
    "mean_mag",
    "std_mag",
    "auc",
    "mean_diff",
];

/// One timestamped tri-axial reading.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamSample {
    pub timestamp: f64,
    pub user: String,
    pub class: String,
    pub acc: [f64; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensorWindow {
    pub samples: Vec<[f64; 3]>,
    pub user: String,
    pub class: String,
}

impl SensorWindow {
    fn axis(&self, a: usize) -> Vec<f64> {
        self.samples.iter().map(|s| s[a]).collect()
    }

    /// Applies [`moving_average`] to every axis independently.
    pub fn smoothed(&self, width: usize) -> Result<SensorWindow> {
        let axes = [
            moving_average(&self.axis(0), width)?,
            moving_average(&self.axis(1), width)?,
            moving_average(&self.axis(2), width)?,
        ];
        Ok(SensorWindow {
            samples: (0..self.samples.len())
                .map(|i| [axes[0][i], axes[1][i], axes[2][i]])
                .collect(),
            user: self.user.clone(),
            class: self.class.clone(),
        })
    }
}

/// Trailing moving average: `out[i]` is the mean of the last `width` values up
/// to and including `i` (fewer at the start).
pub fn moving_average(series: &[f64], width: usize) -> Result<Vec<f64>> {
    if series.is_empty() {
        return Err(Error::Empty("series"));
    }
    if width == 0 {
        return Err(Error::InvalidParameter("moving average width must be positive".into()));
    }
    let out = (0..series.len())
        .map(|i| {
            let lo = (i + 1).saturating_sub(width);
            mean(&series[lo..=i])
        })
        .collect();
    Ok(out)
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn sample_std(v: &[f64], m: f64) -> f64 {
    (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() as f64 - 1.0)).sqrt()
}

fn pearson(a: &[f64], b: &[f64], ma: f64, mb: f64) -> f64 {
    let mut sab = 0.0;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        0.0
    } else {
        (sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0)
    }
}

/// Features in [`FEATURE_NAMES`] order: per-axis mean, sample std and max;
/// pairwise Pearson correlations (0 for a constant axis); mean and sample std
/// of the magnitude; the magnitude summed over samples; and the mean absolute
/// consecutive difference averaged over the three axes.
pub fn extract_features(window: &SensorWindow) -> Result<[f64; N_FEATURES]> {
    let n = window.samples.len();
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "window needs at least 2 samples, got {n}"
        )));
    }
    let axes = [window.axis(0), window.axis(1), window.axis(2)];
    let means = [mean(&axes[0]), mean(&axes[1]), mean(&axes[2])];
    let mag: Vec<f64> = window
        .samples
        .iter()
        .map(|s| (s[0] * s[0] + s[1] * s[1] + s[2] * s[2]).sqrt())
        .collect();
    let mean_mag = mean(&mag);

    let mut f = [0.0; N_FEATURES];
    for a in 0..3 {
        f[a] = means[a];
        f[3 + a] = sample_std(&axes[a], means[a]);
        f[6 + a] = axes[a].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    }
    f[9] = pearson(&axes[0], &axes[1], means[0], means[1]);
    f[10] = pearson(&axes[0], &axes[2], means[0], means[2]);
    f[11] = pearson(&axes[1], &axes[2], means[1], means[2]);
    f[12] = mean_mag;
    f[13] = sample_std(&mag, mean_mag);
    f[14] = mag.iter().sum();
    f[15] = axes
        .iter()
        .map(|ax| ax.windows(2).map(|w| (w[1] - w[0]).abs()).sum::<f64>() / (n - 1) as f64)
        .sum::<f64>()
        / 3.0;
    Ok(f)
}

/// Cuts a time-ordered stream into consecutive non-overlapping windows of
/// `window_len` samples. Windows whose samples disagree on class or user are
/// dropped, as is a trailing partial window.
pub fn windowize(stream: &[StreamSample], window_len: usize) -> Vec<SensorWindow> {
    if window_len == 0 {
        return Vec::new();
    }
    stream
        .chunks_exact(window_len)
        .filter(|chunk| {
            chunk
                .iter()
                .all(|s| s.class == chunk[0].class && s.user == chunk[0].user)
        })
        .map(|chunk| SensorWindow {
            samples: chunk.iter().map(|s| s.acc).collect(),
            user: chunk[0].user.clone(),
            class: chunk[0].class.clone(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn window(samples: Vec<[f64; 3]>) -> SensorWindow {
        SensorWindow {
            samples,
            user: "u".into(),
            class: "c".into(),
        }
    }

    fn sample(class: &str) -> StreamSample {
        StreamSample {
            timestamp: 0.0,
            user: "u".into(),
            class: class.into(),
            acc: [0.0; 3],
        }
    }

    #[test]
    fn moving_average_rules() {
        let s = [3.0, -1.0, 4.0, 1.5];
        assert_eq!(moving_average(&s, 1).unwrap(), s.to_vec());
        assert_eq!(moving_average(&[2.5; 6], 4).unwrap(), vec![2.5; 6]);
        assert_eq!(moving_average(&[0.0, 10.0], 2).unwrap(), vec![0.0, 5.0]);
        assert!(moving_average(&[], 3).is_err());
        assert!(moving_average(&[1.0], 0).is_err());
    }

    #[test]
    fn constant_window() {
        let f = extract_features(&window(vec![[1.0, 2.0, 2.0]; 7])).unwrap();
        assert_eq!(&f[0..3], &[1.0, 2.0, 2.0]);
        assert_eq!(&f[3..6], &[0.0, 0.0, 0.0]);
        assert_eq!(&f[6..9], &[1.0, 2.0, 2.0]);
        assert_eq!(&f[9..12], &[0.0, 0.0, 0.0]);
        assert_eq!(f[12], 3.0);
        assert_eq!(f[13], 0.0);
        assert_eq!(f[14], 21.0);
        assert_eq!(f[15], 0.0);
    }

    #[test]
    fn identical_axes_correlate_fully() {
        let f = extract_features(&window((0..10).map(|i| [i as f64, i as f64, (i * i) as f64]).collect())).unwrap();
        assert_abs_diff_eq!(f[9], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn short_window_rejected() {
        assert!(extract_features(&window(vec![[0.0; 3]])).is_err());
    }

    /// Straight-loop recomputation of every feature.
    fn oracle(w: &[[f64; 3]]) -> Vec<f64> {
        let n = w.len() as f64;
        let mut out = Vec::new();
        let mut m = [0.0; 3];
        for a in 0..3 {
            let mut s = 0.0;
            for r in w {
                s += r[a];
            }
            m[a] = s / n;
        }
        out.extend(m);
        let mut sd = [0.0; 3];
        for a in 0..3 {
            let mut s = 0.0;
            for r in w {
                s += (r[a] - m[a]).powi(2);
            }
            sd[a] = (s / (n - 1.0)).sqrt();
        }
        out.extend(sd);
        for a in 0..3 {
            let mut mx = w[0][a];
            for r in w {
                if r[a] > mx {
                    mx = r[a];
                }
            }
            out.push(mx);
        }
        for (a, b) in [(0, 1), (0, 2), (1, 2)] {
            let mut cov = 0.0;
            for r in w {
                cov += (r[a] - m[a]) * (r[b] - m[b]);
            }
            cov /= n - 1.0;
            out.push(cov / (sd[a] * sd[b]));
        }
        let mags: Vec<f64> = w
            .iter()
            .map(|r| (r[0].powi(2) + r[1].powi(2) + r[2].powi(2)).sqrt())
            .collect();
        let mm = mags.iter().sum::<f64>() / n;
        out.push(mm);
        out.push((mags.iter().map(|v| (v - mm).powi(2)).sum::<f64>() / (n - 1.0)).sqrt());
        out.push(mags.iter().sum());
        let mut d = 0.0;
        for a in 0..3 {
            let mut s = 0.0;
            for i in 1..w.len() {
                s += (w[i][a] - w[i - 1][a]).abs();
            }
            d += s / (n - 1.0);
        }
        out.push(d / 3.0);
        out
    }

    #[test]
    fn random_window_matches_loop_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(150);
        for _ in 0..20 {
            let w: Vec<[f64; 3]> = (0..150)
                .map(|_| {
                    [
                        rng.random_range(-2.0..2.0),
                        rng.random_range(-1.0..3.0),
                        rng.random_range(8.0..11.0),
                    ]
                })
                .collect();
            let got = extract_features(&window(w.clone())).unwrap();
            for (g, e) in got.iter().zip(oracle(&w)) {
                assert_abs_diff_eq!(*g, e, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn translation_covariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let w: Vec<[f64; 3]> = (0..40).map(|_| [rng.random(), rng.random(), rng.random()]).collect();
        let shifted: Vec<[f64; 3]> = w.iter().map(|s| [s[0], s[1] + 5.0, s[2]]).collect();
        let a = extract_features(&window(w)).unwrap();
        let b = extract_features(&window(shifted)).unwrap();
        assert_abs_diff_eq!(b[1], a[1] + 5.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b[7], a[7] + 5.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b[4], a[4], epsilon = 1e-12);
        for i in [9, 10, 11, 15] {
            assert_abs_diff_eq!(b[i], a[i], epsilon = 1e-12);
        }
    }

    #[test]
    fn windowing() {
        let stream: Vec<StreamSample> = (0..300).map(|_| sample("walk")).collect();
        assert_eq!(windowize(&stream, 150).len(), 2);
        assert_eq!(windowize(&stream[..299], 150).len(), 1);
        let mut mixed = stream.clone();
        mixed[200].class = "sit".into();
        let w = windowize(&mixed, 150);
        assert_eq!(w.len(), 1);
        assert_eq!(w[0].class, "walk");
    }
}
