//! CART decision tree with Gini impurity.

use serde::{Deserialize, Serialize};

use super::dataset::Dataset;
use crate::error::{Error, Result};
use crate::features::Label;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum TreeNode {
    /// `x[feature] <= threshold` goes left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf { class: Label },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeKind {
    Tree,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeModel {
    pub kind: TreeKind,
    pub nodes: Vec<TreeNode>,
    pub max_depth: usize,
    pub n_features: usize,
}

fn gini(pos: usize, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let p = pos as f64 / n as f64;
    2.0 * p * (1.0 - p)
}

fn majority(pos: usize, n: usize) -> Label {
    if 2 * pos >= n {
        Label::Rumble
    } else {
        Label::Background
    }
}

struct Builder<'a> {
    x: &'a [Vec<f64>],
    y: &'a [Label],
    max_depth: usize,
    nodes: Vec<TreeNode>,
}

impl Builder<'_> {
    /// Lowest weighted child impurity over all features and midpoints. Only a
    /// strictly better candidate replaces the incumbent, so ties keep the
    /// lowest feature and then the lowest threshold.
    fn best_split(&self, idx: &[usize]) -> Option<(usize, f64)> {
        let n = idx.len();
        let total_pos = idx.iter().filter(|&&i| self.y[i] == Label::Rumble).count();
        let mut best: Option<(f64, usize, f64)> = None;
        for f in 0..self.x[0].len() {
            let mut sorted: Vec<usize> = idx.to_vec();
            sorted.sort_by(|&a, &b| self.x[a][f].total_cmp(&self.x[b][f]));
            let mut left_pos = 0;
            for k in 1..n {
                if self.y[sorted[k - 1]] == Label::Rumble {
                    left_pos += 1;
                }
                let (lo, hi) = (self.x[sorted[k - 1]][f], self.x[sorted[k]][f]);
                if lo == hi {
                    continue;
                }
                let impurity = (k as f64 * gini(left_pos, k)
                    + (n - k) as f64 * gini(total_pos - left_pos, n - k))
                    / n as f64;
                if best.is_none_or(|(b, _, _)| impurity < b) {
                    best = Some((impurity, f, lo + (hi - lo) / 2.0));
                }
            }
        }
        best.map(|(_, f, t)| (f, t))
    }

    fn grow(&mut self, idx: Vec<usize>, depth: usize) -> usize {
        let pos = idx.iter().filter(|&&i| self.y[i] == Label::Rumble).count();
        let id = self.nodes.len();
        self.nodes.push(TreeNode::Leaf {
            class: majority(pos, idx.len()),
        });
        if depth >= self.max_depth || pos == 0 || pos == idx.len() {
            return id;
        }
        let Some((feature, threshold)) = self.best_split(&idx) else {
            return id;
        };
        let (l, r): (Vec<usize>, Vec<usize>) =
            idx.into_iter().partition(|&i| self.x[i][feature] <= threshold);
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[id] = TreeNode::Split {
            feature,
            threshold,
            left,
            right,
        };
        id
    }
}

pub fn train_tree(train: &Dataset, max_depth: usize) -> Result<TreeModel> {
    train.require_both_classes()?;
    let x: Vec<Vec<f64>> = train.rows().iter().map(|r| r.values.clone()).collect();
    let y = train.labels();
    let mut b = Builder {
        x: &x,
        y: &y,
        max_depth,
        nodes: Vec::new(),
    };
    b.grow((0..x.len()).collect(), 0);
    Ok(TreeModel {
        kind: TreeKind::Tree,
        nodes: b.nodes,
        max_depth,
        n_features: train.dim(),
    })
}

impl TreeModel {
    pub fn predict(&self, x: &[f64]) -> Result<Label> {
        if x.len() != self.n_features {
            return Err(Error::Size(format!(
                "tree expects {} features, got {}",
                self.n_features,
                x.len()
            )));
        }
        let mut id = 0;
        loop {
            match self.nodes.get(id) {
                Some(TreeNode::Leaf { class }) => return Ok(*class),
                Some(&TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                }) => id = if x[feature] <= threshold { left } else { right },
                None => return Err(Error::Format(format!("tree has no node {id}"))),
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[TreeNode], id: usize) -> usize {
            match nodes[id] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => {
                    1 + walk(nodes, left).max(walk(nodes, right))
                }
            }
        }
        walk(&self.nodes, 0)
    }
}
