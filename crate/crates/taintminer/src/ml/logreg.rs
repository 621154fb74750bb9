//! Logistic regression trained by full-batch gradient descent.

use serde::{Deserialize, Serialize};

use super::Standardizer;

#[derive(Debug, Clone, PartialEq)]
pub struct LogRegParams {
    pub learning_rate: f64,
    pub iterations: usize,
    /// Ridge penalty on the weights; the bias is left unpenalized.
    pub l2: f64,
}

impl Default for LogRegParams {
    fn default() -> Self {
        LogRegParams {
            learning_rate: 0.1,
            iterations: 500,
            l2: 1e-3,
        }
    }
}

/// Weights live in standardized feature space; scoring standardizes the
/// incoming row with the training statistics first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRegModel {
    weights: Vec<f64>,
    bias: f64,
    scaler: Standardizer,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

pub fn fit(x: &[Vec<f64>], y: &[bool], params: &LogRegParams) -> LogRegModel {
    assert_eq!(x.len(), y.len());
    assert!(!x.is_empty());
    let scaler = Standardizer::fit(x);
    let rows: Vec<Vec<f64>> = x.iter().map(|r| scaler.apply(r)).collect();
    let n = rows.len() as f64;
    let dim = rows[0].len();

    let mut weights = vec![0.0; dim];
    let mut bias = 0.0;
    for _ in 0..params.iterations {
        let mut grad_w = vec![0.0; dim];
        let mut grad_b = 0.0;
        for (row, &label) in rows.iter().zip(y) {
            let z = dot(&weights, row) + bias;
            let err = sigmoid(z) - if label { 1.0 } else { 0.0 };
            for (g, v) in grad_w.iter_mut().zip(row) {
                *g += err * v;
            }
            grad_b += err;
        }
        for (w, g) in weights.iter_mut().zip(&grad_w) {
            *w -= params.learning_rate * (g / n + params.l2 * *w);
        }
        bias -= params.learning_rate * grad_b / n;
    }

    LogRegModel {
        weights,
        bias,
        scaler,
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl LogRegModel {
    /// Probability of the positive class.
    pub fn score(&self, row: &[f64]) -> f64 {
        let std = self.scaler.apply(row);
        sigmoid(dot(&self.weights, &std) + self.bias)
    }
}
