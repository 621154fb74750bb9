//! Binary decision tree split on information gain.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq)]
pub struct TreeParams {
    pub max_depth: usize,
    /// Smallest number of training rows allowed on either side of a split.
    pub min_leaf: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_depth: 12,
            min_leaf: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TreeNode {
    Leaf {
        /// Fraction of positive training rows that reached this leaf.
        p: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeModel {
    root: TreeNode,
}

pub fn fit(x: &[Vec<f64>], y: &[bool], params: &TreeParams) -> TreeModel {
    assert_eq!(x.len(), y.len());
    assert!(!x.is_empty());
    let idx: Vec<usize> = (0..x.len()).collect();
    TreeModel {
        root: grow(x, y, &idx, params, 0),
    }
}

fn grow(x: &[Vec<f64>], y: &[bool], idx: &[usize], params: &TreeParams, depth: usize) -> TreeNode {
    let pos = idx.iter().filter(|&&i| y[i]).count();
    let p = pos as f64 / idx.len() as f64;
    if depth >= params.max_depth || pos == 0 || pos == idx.len() || idx.len() < 2 * params.min_leaf
    {
        return TreeNode::Leaf { p };
    }
    let Some((feature, threshold)) = best_split(x, y, idx, params.min_leaf) else {
        return TreeNode::Leaf { p };
    };
    let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = idx
        .iter()
        .copied()
        .partition(|&i| x[i][feature] <= threshold);
    TreeNode::Split {
        feature,
        threshold,
        left: Box::new(grow(x, y, &left_idx, params, depth + 1)),
        right: Box::new(grow(x, y, &right_idx, params, depth + 1)),
    }
}

/// Scans features in order and midpoint thresholds in ascending order,
/// keeping the first split with the strictly best information gain.
fn best_split(x: &[Vec<f64>], y: &[bool], idx: &[usize], min_leaf: usize) -> Option<(usize, f64)> {
    let n = idx.len() as f64;
    let pos = idx.iter().filter(|&&i| y[i]).count() as f64;
    let parent = entropy(pos / n);

    let width = x[idx[0]].len();
    let mut best: Option<(f64, usize, f64)> = None;
    // `feature` walks the column dimension while rows come from `idx`, so
    // iterating x itself would loop over the wrong axis.
    #[allow(clippy::needless_range_loop)]
    for feature in 0..width {
        let mut ordered: Vec<usize> = idx.to_vec();
        ordered.sort_by(|&a, &b| x[a][feature].total_cmp(&x[b][feature]));

        let mut left_n = 0.0;
        let mut left_pos = 0.0;
        for w in 0..ordered.len() - 1 {
            left_n += 1.0;
            if y[ordered[w]] {
                left_pos += 1.0;
            }
            let here = x[ordered[w]][feature];
            let next = x[ordered[w + 1]][feature];
            if here == next {
                continue;
            }
            if (left_n as usize) < min_leaf || (idx.len() - left_n as usize) < min_leaf {
                continue;
            }
            let right_n = n - left_n;
            let right_pos = pos - left_pos;
            let children = (left_n / n) * entropy(left_pos / left_n)
                + (right_n / n) * entropy(right_pos / right_n);
            let gain = parent - children;
            debug_assert!(gain > -1e-9, "information gain went negative: {gain}");
            if gain <= 0.0 {
                continue;
            }
            let threshold = here + (next - here) / 2.0;
            if best.is_none_or(|(g, _, _)| gain > g) {
                best = Some((gain, feature, threshold));
            }
        }
    }
    best.map(|(_, f, t)| (f, t))
}

fn entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    let q = 1.0 - p;
    -(p * p.log2() + q * q.log2())
}

impl TreeModel {
    /// Positive fraction of the leaf the row lands in.
    pub fn score(&self, row: &[f64]) -> f64 {
        let mut node = &self.root;
        loop {
            match node {
                TreeNode::Leaf { p } => return *p,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if row[*feature] <= *threshold {
                        left
                    } else {
                        right
                    };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(node: &TreeNode) -> usize {
            match node {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => 1 + walk(left).max(walk(right)),
            }
        }
        walk(&self.root)
    }
}
