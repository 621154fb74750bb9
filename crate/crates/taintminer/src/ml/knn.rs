//! k-nearest-neighbor classification over standardized features.

use serde::{Deserialize, Serialize};

use super::Standardizer;

pub const DEFAULT_K: usize = 5;

/// Stores the standardized training rows; scoring is a linear scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    k: usize,
    rows: Vec<Vec<f64>>,
    labels: Vec<bool>,
    scaler: Standardizer,
}

pub fn fit(x: &[Vec<f64>], y: &[bool], k: usize) -> KnnModel {
    assert_eq!(x.len(), y.len());
    assert!(!x.is_empty());
    assert!(k > 0);
    let scaler = Standardizer::fit(x);
    KnnModel {
        k,
        rows: x.iter().map(|r| scaler.apply(r)).collect(),
        labels: y.to_vec(),
        scaler,
    }
}

impl KnnModel {
    /// Fraction of positive labels among the k nearest training rows.
    /// Distance ties break toward the earlier training row.
    pub fn score(&self, row: &[f64]) -> f64 {
        let q = self.scaler.apply(row);
        let mut by_distance: Vec<(f64, usize)> = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| (squared_distance(r, &q), i))
            .collect();
        by_distance.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let take = self.k.min(by_distance.len());
        let positive = by_distance[..take]
            .iter()
            .filter(|&&(_, i)| self.labels[i])
            .count();
        positive as f64 / take as f64
    }
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
