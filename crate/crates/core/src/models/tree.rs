//! Axis-aligned binary decision trees grown by variance reduction
//! (regression) or Gini impurity (classification).

use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::matrix::Matrix;

/// Tree node; children are indices into the owning tree's node vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Split { feature: usize, threshold: f64, left: usize, right: usize },
    LeafReal(f64),
    LeafVotes(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub(crate) nodes: Vec<Node>,
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum TreeTarget {
    Regression,
    Classification { n_classes: usize },
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct GrowParams {
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    pub feature_fraction: f64,
}

struct Grower<'a> {
    x: &'a Matrix,
    y: &'a [f64],
    target: TreeTarget,
    params: GrowParams,
    nodes: Vec<Node>,
}

/// Best split found for one node: lower score is better; ties are broken by
/// (feature, threshold) ascending so results are independent of candidate
/// feature order.
#[derive(Debug, Clone, Copy)]
struct Split {
    feature: usize,
    threshold: f64,
    score: f64,
}

impl Split {
    fn better_than(&self, other: &Option<Split>) -> bool {
        match other {
            None => true,
            Some(o) => {
                self.score < o.score
                    || (self.score == o.score
                        && (self.feature, self.threshold) < (o.feature, o.threshold))
            }
        }
    }
}

impl<'a> Grower<'a> {
    fn leaf(&mut self, indices: &[usize]) -> usize {
        let node = match self.target {
            TreeTarget::Regression => {
                let mean = indices.iter().map(|&i| self.y[i]).sum::<f64>() / indices.len() as f64;
                Node::LeafReal(mean)
            }
            TreeTarget::Classification { n_classes } => {
                let mut votes = vec![0.0; n_classes];
                for &i in indices {
                    votes[self.y[i] as usize] += 1.0;
                }
                Node::LeafVotes(votes)
            }
        };
        self.nodes.push(node);
        self.nodes.len() - 1
    }

    /// Candidate thresholds are midpoints between consecutive sorted unique
    /// feature values; both children must keep `min_samples_leaf` samples.
    fn best_split_on_feature(&self, indices: &[usize], feature: usize) -> Option<Split> {
        let mut pairs: Vec<(f64, f64)> =
            indices.iter().map(|&i| (self.x.get(i, feature), self.y[i])).collect();
        pairs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = pairs.len();
        let min_leaf = self.params.min_samples_leaf;

        let mut best: Option<Split> = None;
        match self.target {
            TreeTarget::Regression => {
                let total_sum: f64 = pairs.iter().map(|p| p.1).sum();
                let total_sq: f64 = pairs.iter().map(|p| p.1 * p.1).sum();
                let mut left_sum = 0.0;
                let mut left_sq = 0.0;
                for split_at in 1..n {
                    let (v_prev, yv) = pairs[split_at - 1];
                    left_sum += yv;
                    left_sq += yv * yv;
                    let v_next = pairs[split_at].0;
                    if v_prev == v_next {
                        continue;
                    }
                    if split_at < min_leaf || n - split_at < min_leaf {
                        continue;
                    }
                    let right_sum = total_sum - left_sum;
                    let right_sq = total_sq - left_sq;
                    let sse_left = left_sq - left_sum * left_sum / split_at as f64;
                    let sse_right = right_sq - right_sum * right_sum / (n - split_at) as f64;
                    let cand = Split {
                        feature,
                        threshold: (v_prev + v_next) / 2.0,
                        score: sse_left + sse_right,
                    };
                    if cand.better_than(&best) {
                        best = Some(cand);
                    }
                }
            }
            TreeTarget::Classification { n_classes } => {
                let mut total = vec![0.0f64; n_classes];
                for p in &pairs {
                    total[p.1 as usize] += 1.0;
                }
                let mut left = vec![0.0f64; n_classes];
                let gini = |counts: &[f64], n: f64| -> f64 {
                    if n == 0.0 {
                        return 0.0;
                    }
                    let sum_sq: f64 = counts.iter().map(|c| c * c).sum();
                    n * (1.0 - sum_sq / (n * n))
                };
                for split_at in 1..n {
                    let (v_prev, yv) = pairs[split_at - 1];
                    left[yv as usize] += 1.0;
                    let v_next = pairs[split_at].0;
                    if v_prev == v_next {
                        continue;
                    }
                    if split_at < min_leaf || n - split_at < min_leaf {
                        continue;
                    }
                    let right: Vec<f64> = total.iter().zip(&left).map(|(t, l)| t - l).collect();
                    let score = gini(&left, split_at as f64) + gini(&right, (n - split_at) as f64);
                    let cand = Split { feature, threshold: (v_prev + v_next) / 2.0, score };
                    if cand.better_than(&best) {
                        best = Some(cand);
                    }
                }
            }
        }
        best
    }

    fn candidate_features(&self, rng: &mut ChaCha8Rng) -> Vec<usize> {
        let d = self.x.n_cols();
        let m = ((self.params.feature_fraction * d as f64).ceil() as usize).clamp(1, d);
        if m == d {
            return (0..d).collect();
        }
        let mut all: Vec<usize> = (0..d).collect();
        all.shuffle(rng);
        let mut picked = all[..m].to_vec();
        // sorted order keeps tie-breaking independent of the draw order
        picked.sort_unstable();
        picked
    }

    fn is_pure(&self, indices: &[usize]) -> bool {
        indices.windows(2).all(|w| self.y[w[0]] == self.y[w[1]])
    }

    fn grow(&mut self, indices: &[usize], depth: usize, rng: &mut ChaCha8Rng) -> usize {
        let depth_ok = self.params.max_depth.is_none_or(|limit| depth < limit);
        if !depth_ok || indices.len() < 2 * self.params.min_samples_leaf || self.is_pure(indices) {
            return self.leaf(indices);
        }
        let mut best: Option<Split> = None;
        for feature in self.candidate_features(rng) {
            if let Some(cand) = self.best_split_on_feature(indices, feature) {
                if cand.better_than(&best) {
                    best = Some(cand);
                }
            }
        }
        let Some(split) = best else {
            return self.leaf(indices);
        };
        let (left_idx, right_idx): (Vec<usize>, Vec<usize>) =
            indices.iter().partition(|&&i| self.x.get(i, split.feature) <= split.threshold);
        // placeholder is patched once both subtrees exist
        let node_id = self.nodes.len();
        self.nodes.push(Node::LeafReal(f64::NAN));
        let left = self.grow(&left_idx, depth + 1, rng);
        let right = self.grow(&right_idx, depth + 1, rng);
        self.nodes[node_id] =
            Node::Split { feature: split.feature, threshold: split.threshold, left, right };
        node_id
    }
}

/// Grow one tree on the given sample indices.
pub(crate) fn grow_tree(
    x: &Matrix,
    y: &[f64],
    indices: &[usize],
    target: TreeTarget,
    params: GrowParams,
    rng: &mut ChaCha8Rng,
) -> DecisionTree {
    let mut grower = Grower { x, y, target, params, nodes: Vec::new() };
    let root = grower.grow(indices, 0, rng);
    debug_assert_eq!(root, 0);
    DecisionTree { nodes: grower.nodes }
}

/// Fit one regression tree on every row, with no bootstrap and no feature
/// subsampling. This is the tree forests and boosting grow internally.
pub fn fit_regression_tree(
    x: &Matrix,
    y: &[f64],
    max_depth: Option<usize>,
    min_samples_leaf: usize,
) -> crate::error::Result<DecisionTree> {
    if x.n_rows() == 0 || x.n_rows() != y.len() {
        return Err(crate::error::Error::Invalid(format!(
            "tree fit needs rows(X) = len(y) >= 1, got {} rows and {} targets",
            x.n_rows(),
            y.len()
        )));
    }
    let indices: Vec<usize> = (0..x.n_rows()).collect();
    let params = GrowParams { max_depth, min_samples_leaf, feature_fraction: 1.0 };
    // the full feature set is used, so the rng is never consulted
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    Ok(grow_tree(x, y, &indices, TreeTarget::Regression, params, &mut rng))
}

impl DecisionTree {
    /// Nodes in construction order; node 0 is the root.
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    /// Route one sample to its leaf.
    pub(crate) fn leaf_for(&self, row: &[f64]) -> &Node {
        let mut node = &self.nodes[0];
        loop {
            match node {
                Node::Split { feature, threshold, left, right } => {
                    node = if row[*feature] <= *threshold {
                        &self.nodes[*left]
                    } else {
                        &self.nodes[*right]
                    };
                }
                leaf => return leaf,
            }
        }
    }

    pub(crate) fn predict_real(&self, row: &[f64]) -> f64 {
        match self.leaf_for(row) {
            Node::LeafReal(v) => *v,
            Node::LeafVotes(votes) => {
                // majority class; used only when a vote tree is read as real
                argmax_lowest(votes) as f64
            }
            Node::Split { .. } => unreachable!(),
        }
    }

    pub(crate) fn add_votes(&self, row: &[f64], acc: &mut [f64]) {
        if let Node::LeafVotes(votes) = self.leaf_for(row) {
            for (a, v) in acc.iter_mut().zip(votes) {
                *a += v;
            }
        }
    }

    #[cfg(test)]
    pub(crate) fn max_depth(&self) -> usize {
        fn depth_of(nodes: &[Node], id: usize) -> usize {
            match &nodes[id] {
                Node::Split { left, right, .. } => {
                    1 + depth_of(nodes, *left).max(depth_of(nodes, *right))
                }
                _ => 0,
            }
        }
        depth_of(&self.nodes, 0)
    }
}

/// Index of the maximum value; ties resolve to the lowest index.
pub(crate) fn argmax_lowest(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}
