use crate::classifiers::{check_dim, ScoreModel};
use crate::data::Matrix;
use crate::error::{Error, Result};

/// Lazy k-nearest-neighbours classifier with Euclidean distance.
///
/// The score of a class is the fraction of the `k` nearest training rows that
/// carry it, so every score is a multiple of `1/k`. Distance ties are broken by
/// training-row order.
#[derive(Debug, Clone)]
pub struct Knn {
    points: Matrix,
    labels: Vec<usize>,
    n_classes: usize,
    k: usize,
}

impl Knn {
    pub(crate) fn fit(x: &Matrix, y: &[usize], n_classes: usize, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("k must be positive".into()));
        }
        Ok(Self {
            points: x.clone(),
            labels: y.to_vec(),
            n_classes,
            k,
        })
    }

    /// Neighbour count actually used: `k` capped by the training size.
    pub fn effective_k(&self) -> usize {
        self.k.min(self.labels.len())
    }

    pub fn points(&self) -> &Matrix {
        &self.points
    }

    /// Indices of the nearest training rows, closest first.
    pub fn neighbors(&self, x: &[f64]) -> Result<Vec<usize>> {
        check_dim(self.points.n_cols(), x)?;
        let mut dist: Vec<(f64, usize)> = self
            .points
            .rows()
            .enumerate()
            .map(|(i, row)| (row.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>(), i))
            .collect();
        let k = self.effective_k();
        let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if k < dist.len() {
            dist.select_nth_unstable_by(k - 1, cmp);
            dist.truncate(k);
        }
        dist.sort_unstable_by(cmp);
        Ok(dist.into_iter().map(|(_, i)| i).collect())
    }
}

impl ScoreModel for Knn {
    fn n_classes(&self) -> usize {
        self.n_classes
    }

    fn n_features(&self) -> usize {
        self.points.n_cols()
    }

    fn predict_scores(&self, x: &[f64]) -> Result<Vec<f64>> {
        let neighbors = self.neighbors(x)?;
        let mut scores = vec![0.0; self.n_classes];
        for i in &neighbors {
            scores[self.labels[*i]] += 1.0;
        }
        let k = neighbors.len() as f64;
        scores.iter_mut().for_each(|s| *s /= k);
        Ok(scores)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stores_training_points_verbatim() {
        let x = Matrix::new(vec![0.5, 1.5, 2.5], 1).unwrap();
        let m = Knn::fit(&x, &[0, 1, 0], 2, 5).unwrap();
        assert_eq!(m.points(), &x);
        assert_eq!(m.effective_k(), 3);
    }

    #[test]
    fn three_neighbor_vote() {
        // neighbours of 0.0 with k=3: rows at 0.1 (A), 0.2 (A), 0.3 (B)
        let x = Matrix::new(vec![0.1, 0.2, 0.3, 5.0, 6.0], 1).unwrap();
        let m = Knn::fit(&x, &[0, 0, 1, 1, 1], 2, 3).unwrap();
        let s = m.predict_scores(&[0.0]).unwrap();
        assert_eq!(s, vec![2.0 / 3.0, 1.0 / 3.0]);
    }

    #[test]
    fn distance_ties_use_row_order() {
        let x = Matrix::new(vec![1.0, -1.0, 1.0, -1.0], 1).unwrap();
        let m = Knn::fit(&x, &[1, 0, 0, 1], 2, 2).unwrap();
        assert_eq!(m.neighbors(&[0.0]).unwrap(), vec![0, 1]);
    }

    #[test]
    fn zero_k_is_invalid() {
        let x = Matrix::new(vec![1.0], 1).unwrap();
        assert!(Knn::fit(&x, &[0], 1, 0).is_err());
    }
}
