use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::ForestParams;
use crate::error::{Error, Result};

/// One node of a flattened tree. Children are indices into the node array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        value: f64,
        samples: usize,
    },
}

/// Binary regression tree; node 0 is the root. Rows with
/// `x[feature] <= threshold` go left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    pub nodes: Vec<Node>,
}

impl RegressionTree {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if row[feature] <= threshold { left } else { right },
                Node::Leaf { value, .. } => return value,
            }
        }
    }

    /// Length of the longest root-to-leaf path, in edges.
    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match nodes[at] {
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
                Node::Leaf { .. } => 0,
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .count()
    }
}

/// A candidate partition of a node's samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split {
    pub feature: usize,
    pub threshold: f64,
    /// Reduction in the sum of squared errors.
    pub gain: f64,
}

/// Best squared-error split of the samples `indices` over `features`.
///
/// Thresholds are midpoints between consecutive distinct values. Among
/// equal gains the lowest feature index, then the lowest threshold, wins.
/// Returns `None` when no feature takes two distinct values on the node.
pub fn best_split(
    rows: &[Vec<f64>],
    targets: &[f64],
    indices: &[usize],
    features: &[usize],
) -> Option<Split> {
    let n = indices.len();
    let total: f64 = indices.iter().map(|&i| targets[i]).sum();
    let mean = total / n as f64;
    // gains closer than this are ties (same partition, different rounding)
    let tie = 1e-12 * indices.iter().map(|&i| (targets[i] - mean).powi(2)).sum::<f64>();
    let mut best: Option<Split> = None;
    let mut order = indices.to_vec();
    for &f in features {
        order.sort_by(|&a, &b| rows[a][f].total_cmp(&rows[b][f]));
        let mut left_sum = 0.0;
        for k in 0..n - 1 {
            left_sum += targets[order[k]];
            let (lo, hi) = (rows[order[k]][f], rows[order[k + 1]][f]);
            if lo == hi {
                continue;
            }
            let (nl, nr) = ((k + 1) as f64, (n - k - 1) as f64);
            let diff = left_sum / nl - (total - left_sum) / nr;
            let gain = nl * nr / n as f64 * diff * diff;
            if best.is_none_or(|b| gain > b.gain + tie) {
                // adjacent floats can round the midpoint up to `hi`
                let mid = lo + (hi - lo) / 2.0;
                best = Some(Split {
                    feature: f,
                    threshold: if mid < hi { mid } else { lo },
                    gain,
                });
            }
        }
    }
    best
}

fn features_per_split(width: usize, fraction: f64) -> usize {
    ((fraction * width as f64) as usize).clamp(1, width)
}

/// Grows one CART tree on `rows`/`targets` (bootstrap sampling is the
/// caller's concern). `rng` is only consumed when `max_features < 1`.
pub fn fit_tree<R: Rng>(
    rows: &[Vec<f64>],
    targets: &[f64],
    params: &ForestParams,
    rng: &mut R,
) -> Result<RegressionTree> {
    let indices: Vec<usize> = (0..rows.len()).collect();
    fit_tree_on(rows, targets, &indices, params, rng)
}

pub(crate) fn fit_tree_on<R: Rng>(
    rows: &[Vec<f64>],
    targets: &[f64],
    indices: &[usize],
    params: &ForestParams,
    rng: &mut R,
) -> Result<RegressionTree> {
    if rows.is_empty() || indices.is_empty() {
        return Err(Error::invalid("cannot fit a tree on zero rows"));
    }
    if rows.len() != targets.len() {
        return Err(Error::invalid(format!(
            "{} rows but {} targets",
            rows.len(),
            targets.len()
        )));
    }
    let width = rows[0].len();
    if let Some(r) = rows.iter().find(|r| r.len() != width) {
        return Err(Error::WidthMismatch {
            expected: width,
            actual: r.len(),
        });
    }
    if rows.iter().flatten().chain(targets).any(|v| !v.is_finite()) {
        return Err(Error::invalid("tree inputs must be finite"));
    }
    params.validate()?;
    let mut grower = Grower {
        rows,
        targets,
        params,
        per_split: features_per_split(width, params.max_features),
        width,
        nodes: Vec::new(),
        rng,
    };
    grower.grow(indices.to_vec(), 0);
    Ok(RegressionTree {
        nodes: grower.nodes,
    })
}

struct Grower<'a, R> {
    rows: &'a [Vec<f64>],
    targets: &'a [f64],
    params: &'a ForestParams,
    per_split: usize,
    width: usize,
    nodes: Vec<Node>,
    rng: &'a mut R,
}

impl<R: Rng> Grower<'_, R> {
    fn grow(&mut self, indices: Vec<usize>, depth: usize) -> usize {
        let at = self.nodes.len();
        let n = indices.len();
        let mean = indices.iter().map(|&i| self.targets[i]).sum::<f64>() / n as f64;
        let first = self.targets[indices[0]];
        let constant = indices.iter().all(|&i| self.targets[i] == first);
        self.nodes.push(Node::Leaf {
            value: if constant { first } else { mean },
            samples: n,
        });
        let depth_left = self.params.max_depth.is_none_or(|d| depth < d);
        if constant || !depth_left || n < self.params.min_samples_split {
            return at;
        }
        let features = self.candidate_features();
        let split = best_split(self.rows, self.targets, &indices, &features).or_else(|| {
            // sampled features were all constant here: widen to every feature
            let all: Vec<usize> = (0..self.width).collect();
            (features.len() < self.width)
                .then(|| best_split(self.rows, self.targets, &indices, &all))
                .flatten()
        });
        let Some(split) = split else {
            return at;
        };
        let (left, right): (Vec<usize>, Vec<usize>) = indices
            .into_iter()
            .partition(|&i| self.rows[i][split.feature] <= split.threshold);
        let left = self.grow(left, depth + 1);
        let right = self.grow(right, depth + 1);
        self.nodes[at] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
        };
        at
    }

    fn candidate_features(&mut self) -> Vec<usize> {
        if self.per_split >= self.width {
            return (0..self.width).collect();
        }
        let mut chosen = index::sample(self.rng, self.width, self.per_split).into_vec();
        chosen.sort_unstable();
        chosen
    }
}
