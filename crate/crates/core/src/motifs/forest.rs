//! Bagged CART trees (Gini impurity) with per-split feature subsampling.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub trees: usize,
    pub max_depth: usize,
    pub min_samples_split: usize,
    /// Features tried per split; `None` means round(sqrt(d)).
    pub max_features: Option<usize>,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            trees: 100,
            max_depth: 16,
            min_samples_split: 2,
            max_features: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    /// Sparse `(class, count)` pairs.
    Leaf { counts: Vec<(usize, u32)> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    nodes: Vec<TreeNode>,
}

fn gini(counts: &[u32], total: u32) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let t = f64::from(total);
    1.0 - counts.iter().map(|&c| (f64::from(c) / t).powi(2)).sum::<f64>()
}

struct Builder<'a> {
    x: &'a [Vec<f64>],
    y: &'a [usize],
    classes: usize,
    params: ForestParams,
    max_features: usize,
    nodes: Vec<TreeNode>,
}

impl Builder<'_> {
    fn leaf(&mut self, idx: &[usize]) -> usize {
        let mut counts = vec![0u32; self.classes];
        for &i in idx {
            counts[self.y[i]] += 1;
        }
        let counts = counts
            .into_iter()
            .enumerate()
            .filter(|(_, c)| *c > 0)
            .collect();
        self.nodes.push(TreeNode::Leaf { counts });
        self.nodes.len() - 1
    }

    fn best_split(&self, idx: &[usize], rng: &mut ChaCha8Rng) -> Option<(usize, f64)> {
        let dim = self.x[0].len();
        let mut parent = vec![0u32; self.classes];
        for &i in idx {
            parent[self.y[i]] += 1;
        }
        let n = idx.len() as u32;
        let parent_impurity = gini(&parent, n);
        let mut best: Option<(usize, f64, f64)> = None;
        let mut order: Vec<usize> = idx.to_vec();
        for feature in sample(rng, dim, self.max_features.min(dim)).into_iter() {
            order.sort_by(|&a, &b| self.x[a][feature].total_cmp(&self.x[b][feature]).then(a.cmp(&b)));
            let mut left = vec![0u32; self.classes];
            let mut right = parent.clone();
            for pos in 0..order.len() - 1 {
                let c = self.y[order[pos]];
                left[c] += 1;
                right[c] -= 1;
                let (a, b) = (self.x[order[pos]][feature], self.x[order[pos + 1]][feature]);
                if a == b {
                    continue;
                }
                let nl = pos as u32 + 1;
                let nr = n - nl;
                let weighted = (f64::from(nl) * gini(&left, nl) + f64::from(nr) * gini(&right, nr))
                    / f64::from(n);
                let gain = parent_impurity - weighted;
                if gain > 1e-12 && best.is_none_or(|(_, _, g)| gain > g) {
                    best = Some((feature, a + (b - a) / 2.0, gain));
                }
            }
        }
        best.map(|(f, t, _)| (f, t))
    }

    fn grow(&mut self, idx: &[usize], depth: usize, rng: &mut ChaCha8Rng) -> usize {
        let first = self.y[idx[0]];
        let pure = idx.iter().all(|&i| self.y[i] == first);
        if pure || depth >= self.params.max_depth || idx.len() < self.params.min_samples_split {
            return self.leaf(idx);
        }
        let Some((feature, threshold)) = self.best_split(idx, rng) else {
            return self.leaf(idx);
        };
        let (l, r): (Vec<usize>, Vec<usize>) =
            idx.iter().partition(|&&i| self.x[i][feature] <= threshold);
        let slot = self.nodes.len();
        self.nodes.push(TreeNode::Leaf { counts: vec![] });
        let left = self.grow(&l, depth + 1, rng);
        let right = self.grow(&r, depth + 1, rng);
        self.nodes[slot] = TreeNode::Split {
            feature,
            threshold,
            left,
            right,
        };
        slot
    }
}

impl DecisionTree {
    pub fn fit(
        x: &[Vec<f64>],
        y: &[usize],
        sample_idx: &[usize],
        classes: usize,
        params: ForestParams,
        rng: &mut ChaCha8Rng,
    ) -> Self {
        assert!(!sample_idx.is_empty(), "cannot fit a tree on zero samples");
        let dim = x[0].len();
        let max_features = params
            .max_features
            .unwrap_or_else(|| ((dim as f64).sqrt().round() as usize).max(1));
        let mut b = Builder {
            x,
            y,
            classes,
            params,
            max_features,
            nodes: Vec::new(),
        };
        b.grow(sample_idx, 0, rng);
        Self { nodes: b.nodes }
    }

    fn leaf_for(&self, row: &[f64]) -> &[(usize, u32)] {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if row[*feature] <= *threshold { *left } else { *right },
                TreeNode::Leaf { counts } => return counts,
            }
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub classes: usize,
    pub params: ForestParams,
    trees: Vec<DecisionTree>,
}

impl RandomForest {
    /// Each tree sees a bootstrap resample drawn from its own seeded stream.
    pub fn fit(x: &[Vec<f64>], y: &[usize], classes: usize, params: ForestParams, seed: u64) -> Self {
        assert_eq!(x.len(), y.len());
        assert!(!x.is_empty(), "cannot fit a forest on zero samples");
        let n = x.len();
        let trees = (0..params.trees)
            .map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add((t as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)));
                let boot: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
                DecisionTree::fit(x, y, &boot, classes, params, &mut rng)
            })
            .collect();
        Self {
            classes,
            params,
            trees,
        }
    }

    /// Mean of the trees' leaf class distributions.
    pub fn predict_proba(&self, row: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.classes];
        for tree in &self.trees {
            let counts = tree.leaf_for(row);
            let total: u32 = counts.iter().map(|(_, c)| c).sum();
            for &(c, k) in counts {
                out[c] += f64::from(k) / f64::from(total);
            }
        }
        let n = self.trees.len() as f64;
        for v in &mut out {
            *v /= n;
        }
        out
    }

    pub fn predict(&self, row: &[f64]) -> usize {
        argmax(&self.predict_proba(row))
    }

    pub fn tree_count(&self) -> usize {
        self.trees.len()
    }
}

/// First index of the maximum.
pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}
