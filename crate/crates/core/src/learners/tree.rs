//! CART trees shared by the decision tree, the forest and boosting.
//!
//! Classification trees minimize weighted Gini impurity, regression trees
//! minimize the summed squared error. Candidate thresholds are midpoints
//! between consecutive distinct values; ties go to the lowest feature index,
//! then the lowest threshold. Rows with `x[feature] <= threshold` go left.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        value: f64,
    },
}

/// Flat node array; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { value } => return *value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn go(t: &Tree, i: usize) -> usize {
            match &t.nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(t, *left).max(go(t, *right)),
            }
        }
        go(self, 0)
    }
}

#[derive(Clone, Copy)]
pub(super) enum Criterion {
    Gini,
    SquaredError,
}

pub(super) struct Limits {
    /// 0 = unlimited
    pub max_depth: usize,
    pub min_samples: usize,
}

struct Split {
    feature: usize,
    threshold: f64,
    cost: f64,
}

/// Node cost: `n - (c0² + c1²)/n` for Gini, `Σ t² - (Σ t)²/n` for squared error.
fn cost(criterion: Criterion, n: f64, sum: f64, sum_sq: f64) -> f64 {
    match criterion {
        // targets are 0/1, so sum = c1 and n - sum = c0
        Criterion::Gini => n - (sum * sum + (n - sum) * (n - sum)) / n,
        Criterion::SquaredError => sum_sq - sum * sum / n,
    }
}

pub(super) struct Builder<'a> {
    pub xs: &'a [&'a [f64]],
    pub targets: &'a [f64],
    pub criterion: Criterion,
    pub limits: Limits,
    /// Features considered at every node, ascending.
    pub features: Vec<usize>,
}

impl Builder<'_> {
    /// Grows a tree over `rows` (indices may repeat). `leaf` maps the rows
    /// reaching a leaf to its value.
    pub fn build(&self, rows: Vec<usize>, leaf: &dyn Fn(&[usize]) -> f64) -> Tree {
        let mut nodes = Vec::new();
        self.grow(rows, 0, &mut nodes, leaf);
        Tree { nodes }
    }

    fn grow(&self, rows: Vec<usize>, depth: usize, nodes: &mut Vec<Node>, leaf: &dyn Fn(&[usize]) -> f64) -> usize {
        let id = nodes.len();
        nodes.push(Node::Leaf { value: 0.0 });
        let n = rows.len() as f64;
        let sum: f64 = rows.iter().map(|&i| self.targets[i]).sum();
        let sum_sq: f64 = rows.iter().map(|&i| self.targets[i] * self.targets[i]).sum();
        let parent = cost(self.criterion, n, sum, sum_sq);
        let depth_ok = self.limits.max_depth == 0 || depth < self.limits.max_depth;
        let impure = match self.criterion {
            Criterion::Gini => sum > 0.0 && sum < n,
            Criterion::SquaredError => parent > 1e-12 * n.max(1.0),
        };
        let split = if depth_ok && rows.len() >= self.limits.min_samples.max(2) && impure {
            self.best_split(&rows)
        } else {
            None
        };
        let split = split.filter(|s| match self.criterion {
            // zero-gain splits are allowed so impure nodes keep separating
            Criterion::Gini => true,
            Criterion::SquaredError => s.cost < parent,
        });
        match split {
            None => nodes[id] = Node::Leaf { value: leaf(&rows) },
            Some(s) => {
                let (l, r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| self.xs[i][s.feature] <= s.threshold);
                let left = self.grow(l, depth + 1, nodes, leaf);
                let right = self.grow(r, depth + 1, nodes, leaf);
                nodes[id] = Node::Split {
                    feature: s.feature,
                    threshold: s.threshold,
                    left,
                    right,
                };
            }
        }
        id
    }

    fn best_split(&self, rows: &[usize]) -> Option<Split> {
        let n = rows.len();
        let total: f64 = rows.iter().map(|&i| self.targets[i]).sum();
        let total_sq: f64 = rows.iter().map(|&i| self.targets[i] * self.targets[i]).sum();
        let mut best: Option<Split> = None;
        let mut sorted: Vec<(f64, f64)> = Vec::with_capacity(n);
        for &f in &self.features {
            sorted.clear();
            sorted.extend(rows.iter().map(|&i| (self.xs[i][f], self.targets[i])));
            sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
            let (mut ls, mut lsq) = (0.0, 0.0);
            for k in 0..n - 1 {
                let (v, t) = sorted[k];
                ls += t;
                lsq += t * t;
                let next = sorted[k + 1].0;
                if v == next {
                    continue;
                }
                let nl = (k + 1) as f64;
                let nr = (n - k - 1) as f64;
                let c = cost(self.criterion, nl, ls, lsq) + cost(self.criterion, nr, total - ls, total_sq - lsq);
                if best.as_ref().is_none_or(|b| c < b.cost) {
                    let mut threshold = v + (next - v) / 2.0;
                    if threshold >= next {
                        threshold = v;
                    }
                    best = Some(Split {
                        feature: f,
                        threshold,
                        cost: c,
                    });
                }
            }
        }
        best
    }
}

/// Classification tree whose leaves hold the fraction of class-1 rows.
pub(super) fn train_classifier(
    xs: &[&[f64]],
    ys: &[u8],
    max_depth: usize,
    min_samples: usize,
    features: Option<Vec<usize>>,
) -> Tree {
    let targets: Vec<f64> = ys.iter().map(|&y| f64::from(y)).collect();
    let dim = xs.first().map_or(0, |x| x.len());
    let builder = Builder {
        xs,
        targets: &targets,
        criterion: Criterion::Gini,
        limits: Limits { max_depth, min_samples },
        features: features.unwrap_or_else(|| (0..dim).collect()),
    };
    let fraction = |rows: &[usize]| rows.iter().map(|&i| targets[i]).sum::<f64>() / rows.len() as f64;
    builder.build((0..xs.len()).collect(), &fraction)
}

pub(super) fn train_classifier_on(
    xs: &[&[f64]],
    ys: &[u8],
    rows: Vec<usize>,
    limits: Limits,
    features: Vec<usize>,
) -> Tree {
    let targets: Vec<f64> = ys.iter().map(|&y| f64::from(y)).collect();
    let builder = Builder {
        xs,
        targets: &targets,
        criterion: Criterion::Gini,
        limits,
        features,
    };
    let fraction = |rows: &[usize]| rows.iter().map(|&i| targets[i]).sum::<f64>() / rows.len() as f64;
    builder.build(rows, &fraction)
}
