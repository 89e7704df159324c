use crate::classifiers::{check_dim, ScoreModel};
use crate::data::Matrix;
use crate::error::Result;

/// Relative variance smoothing, scaled by the largest feature variance.
const VAR_SMOOTHING: f64 = 1e-9;

/// Gaussian naive Bayes with per-class, per-feature variances.
#[derive(Debug, Clone)]
pub struct GaussianNb {
    means: Vec<Vec<f64>>,
    variances: Vec<Vec<f64>>,
    log_priors: Vec<f64>,
    // log prior minus the normalizing term of each class density
    offsets: Vec<f64>,
}

impl GaussianNb {
    pub(crate) fn fit(x: &Matrix, y: &[usize], n_classes: usize) -> Result<Self> {
        let d = x.n_cols();
        let n = y.len() as f64;
        let mut counts = vec![0usize; n_classes];
        let mut means = vec![vec![0.0; d]; n_classes];
        for (row, &c) in x.rows().zip(y) {
            counts[c] += 1;
            for (m, &v) in means[c].iter_mut().zip(row) {
                *m += v;
            }
        }
        for (m, &cnt) in means.iter_mut().zip(&counts) {
            m.iter_mut().for_each(|v| *v /= cnt as f64);
        }
        let mut variances = vec![vec![0.0; d]; n_classes];
        for (row, &c) in x.rows().zip(y) {
            for j in 0..d {
                let diff = row[j] - means[c][j];
                variances[c][j] += diff * diff;
            }
        }
        for (v, &cnt) in variances.iter_mut().zip(&counts) {
            v.iter_mut().for_each(|s| *s /= cnt as f64);
        }

        // Smoothing relative to the widest feature over the whole training set.
        let mut overall_mean = vec![0.0; d];
        for row in x.rows() {
            for (m, &v) in overall_mean.iter_mut().zip(row) {
                *m += v / n;
            }
        }
        let mut overall_var = vec![0.0; d];
        for row in x.rows() {
            for j in 0..d {
                let diff = row[j] - overall_mean[j];
                overall_var[j] += diff * diff / n;
            }
        }
        let max_var = overall_var.iter().cloned().fold(0.0, f64::max);
        let epsilon = if max_var > 0.0 {
            VAR_SMOOTHING * max_var
        } else {
            VAR_SMOOTHING
        };
        for v in variances.iter_mut().flatten() {
            *v += epsilon;
        }

        let log_priors: Vec<f64> = counts.iter().map(|&c| (c as f64 / n).ln()).collect();
        let offsets = variances
            .iter()
            .zip(&log_priors)
            .map(|(vars, lp)| lp - 0.5 * vars.iter().map(|v| (2.0 * std::f64::consts::PI * v).ln()).sum::<f64>())
            .collect();
        Ok(Self {
            means,
            variances,
            log_priors,
            offsets,
        })
    }

    pub fn means(&self) -> &[Vec<f64>] {
        &self.means
    }

    pub fn variances(&self) -> &[Vec<f64>] {
        &self.variances
    }

    pub fn priors(&self) -> Vec<f64> {
        self.log_priors.iter().map(|lp| lp.exp()).collect()
    }

    fn joint_log_likelihood(&self, x: &[f64]) -> Vec<f64> {
        self.means
            .iter()
            .zip(&self.variances)
            .zip(&self.offsets)
            .map(|((mu, var), off)| {
                off - 0.5
                    * x.iter()
                        .zip(mu.iter().zip(var))
                        .map(|(&v, (&m, &s))| (v - m) * (v - m) / s)
                        .sum::<f64>()
            })
            .collect()
    }
}

impl ScoreModel for GaussianNb {
    fn n_classes(&self) -> usize {
        self.means.len()
    }

    fn n_features(&self) -> usize {
        self.means.first().map_or(0, Vec::len)
    }

    fn predict_scores(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.n_features(), x)?;
        let jll = self.joint_log_likelihood(x);
        let max = jll.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut scores: Vec<f64> = jll.iter().map(|l| (l - max).exp()).collect();
        let total: f64 = scores.iter().sum();
        scores.iter_mut().for_each(|s| *s /= total);
        Ok(scores)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn symmetric() -> (Matrix, Vec<usize>) {
        (Matrix::new(vec![-1.1, -0.9, 0.9, 1.1], 1).unwrap(), vec![0, 0, 1, 1])
    }

    #[test]
    fn fitted_means_and_priors() {
        let (x, y) = symmetric();
        let m = GaussianNb::fit(&x, &y, 2).unwrap();
        assert_abs_diff_eq!(m.means()[0][0], -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m.means()[1][0], 1.0, epsilon = 1e-12);
        let p = m.priors();
        assert_abs_diff_eq!(p[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(p[1], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn midpoint_is_even() {
        let (x, y) = symmetric();
        let m = GaussianNb::fit(&x, &y, 2).unwrap();
        let s = m.predict_scores(&[0.0]).unwrap();
        assert_abs_diff_eq!(s[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(s[1], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn duplicated_training_set_gives_same_scores() {
        let x = Matrix::new(vec![0.1, 2.0, 0.4, 1.5, 0.3, 2.2, 3.0, -1.0, 2.5, -0.5, 3.3, -0.8], 2).unwrap();
        let y = vec![0, 0, 0, 1, 1, 1];
        let mut doubled = x.as_slice().to_vec();
        doubled.extend_from_slice(x.as_slice());
        let x2 = Matrix::new(doubled, 2).unwrap();
        let y2: Vec<usize> = y.iter().chain(&y).copied().collect();
        let a = GaussianNb::fit(&x, &y, 2).unwrap();
        let b = GaussianNb::fit(&x2, &y2, 2).unwrap();
        for q in [[0.0, 0.0], [1.5, 0.5], [3.0, -1.0], [-4.0, 9.0]] {
            let sa = a.predict_scores(&q).unwrap();
            let sb = b.predict_scores(&q).unwrap();
            for (u, v) in sa.iter().zip(&sb) {
                assert_abs_diff_eq!(u, v, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn constant_feature_does_not_break_likelihood() {
        let x = Matrix::new(vec![1.0, 0.0, 1.0, 0.2, 1.0, 5.0, 1.0, 5.3], 2).unwrap();
        let m = GaussianNb::fit(&x, &[0, 0, 1, 1], 2).unwrap();
        let s = m.predict_scores(&[1.0, 0.1]).unwrap();
        assert!(s.iter().all(|v| v.is_finite()));
        assert!(s[0] > 0.99);
    }

    #[test]
    fn far_query_does_not_underflow() {
        let (x, y) = symmetric();
        let m = GaussianNb::fit(&x, &y, 2).unwrap();
        let s = m.predict_scores(&[1e4]).unwrap();
        assert!(s.iter().all(|v| v.is_finite()));
        assert_abs_diff_eq!(s[1], 1.0, epsilon = 1e-12);
    }
}
