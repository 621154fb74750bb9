//! Multinomial naive Bayes over count features with add-one smoothing.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveBayesModel {
    log_prior_pos: f64,
    log_prior_neg: f64,
    log_theta_pos: Vec<f64>,
    log_theta_neg: Vec<f64>,
}

/// Fits per-class token probabilities. Features are treated as counts;
/// negative values are clamped to zero.
pub fn fit(x: &[Vec<f64>], y: &[bool]) -> NaiveBayesModel {
    assert_eq!(x.len(), y.len());
    assert!(!x.is_empty());
    let dim = x[0].len();

    let mut count_pos = vec![0.0; dim];
    let mut count_neg = vec![0.0; dim];
    let mut n_pos = 0usize;
    for (row, &label) in x.iter().zip(y) {
        let bucket = if label {
            n_pos += 1;
            &mut count_pos
        } else {
            &mut count_neg
        };
        for (acc, &v) in bucket.iter_mut().zip(row) {
            *acc += v.max(0.0);
        }
    }
    let n = x.len() as f64;
    let n_neg = x.len() - n_pos;

    let log_theta = |counts: &[f64]| {
        let total: f64 = counts.iter().sum();
        counts
            .iter()
            .map(|&c| ((c + 1.0) / (total + dim as f64)).ln())
            .collect::<Vec<f64>>()
    };

    NaiveBayesModel {
        log_prior_pos: (n_pos as f64 / n).ln(),
        log_prior_neg: (n_neg as f64 / n).ln(),
        log_theta_pos: log_theta(&count_pos),
        log_theta_neg: log_theta(&count_neg),
    }
}

impl NaiveBayesModel {
    /// Posterior probability of the positive class.
    pub fn score(&self, row: &[f64]) -> f64 {
        let joint = |prior: f64, theta: &[f64]| {
            prior
                + theta
                    .iter()
                    .zip(row)
                    .map(|(lt, &v)| v.max(0.0) * lt)
                    .sum::<f64>()
        };
        let lp = joint(self.log_prior_pos, &self.log_theta_pos);
        let ln = joint(self.log_prior_neg, &self.log_theta_neg);
        1.0 / (1.0 + (ln - lp).exp())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) {
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }

    fn toy() -> NaiveBayesModel {
        let x = vec![vec![2.0, 0.0], vec![1.0, 1.0], vec![0.0, 2.0]];
        let y = [true, true, false];
        fit(&x, &y)
    }

    #[test]
    fn hand_computed_posterior_matches() {
        // positive counts [3, 1] over 4, smoothed [4/6, 2/6]
        // negative counts [0, 2] over 2, smoothed [1/4, 3/4]
        // priors 2/3 and 1/3; for x = [1, 0]:
        //   positive mass (2/3)(2/3) = 4/9, negative (1/3)(1/4) = 1/12
        //   posterior = (4/9) / (4/9 + 1/12) = 16/19
        close(toy().score(&[1.0, 0.0]), 16.0 / 19.0);
    }

    #[test]
    fn second_feature_pulls_negative() {
        // for x = [0, 3]: positive (2/3)(1/3)^3, negative (1/3)(3/4)^3
        // posterior = (2/81) / (2/81 + 9/64) = 128/857
        close(toy().score(&[0.0, 3.0]), 128.0 / 857.0);
    }

    #[test]
    fn empty_row_falls_back_to_priors() {
        close(toy().score(&[0.0, 0.0]), 2.0 / 3.0);
    }

    #[test]
    fn unseen_token_is_smoothed_not_fatal() {
        let x = vec![vec![3.0, 0.0], vec![2.0, 0.0], vec![0.0, 1.0], vec![0.0, 2.0]];
        let y = [true, true, false, false];
        let model = fit(&x, &y);
        let s = model.score(&[0.0, 10.0]);
        assert!(s.is_finite());
        assert!(s < 0.5);
    }

    #[test]
    fn negative_values_are_clamped() {
        let model = toy();
        close(model.score(&[-5.0, -5.0]), model.score(&[0.0, 0.0]));
    }

    #[test]
    fn model_round_trips_through_json() {
        let model = toy();
        let json = serde_json::to_string(&model).unwrap();
        let back: NaiveBayesModel = serde_json::from_str(&json).unwrap();
        assert_eq!(back, model);
    }
}
