//! Downstream models for the efficacy harness. Features are dense row-major
//! `n × f` slices; class labels are indices.

use nalgebra::{DMatrix, DVector};

pub const TREE_MAX_DEPTH: usize = 10;
pub const LOGISTIC_EPOCHS: usize = 200;
pub const LOGISTIC_LR: f64 = 0.5;
pub const OLS_RIDGE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Criterion {
    Gini { classes: usize },
    Variance,
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Leaf(f64),
    Split {
        feature: usize,
        threshold: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
}

/// Binary decision tree grown greedily to a fixed depth. Classification uses
/// Gini impurity and predicts the majority class; regression minimizes the
/// within-node sum of squares and predicts the mean.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    root: Node,
    n_features: usize,
}

struct Grower<'a> {
    x: &'a [f64],
    f: usize,
    y: &'a [f64],
    criterion: Criterion,
    max_depth: usize,
}

impl Grower<'_> {
    fn leaf_value(&self, idx: &[usize]) -> f64 {
        match self.criterion {
            Criterion::Gini { classes } => {
                let mut counts = vec![0usize; classes];
                idx.iter().for_each(|&i| counts[self.y[i] as usize] += 1);
                // Lowest class index wins ties.
                let mut best = 0;
                for (c, &k) in counts.iter().enumerate() {
                    if k > counts[best] {
                        best = c;
                    }
                }
                best as f64
            }
            Criterion::Variance => idx.iter().map(|&i| self.y[i]).sum::<f64>() / idx.len() as f64,
        }
    }

    fn is_pure(&self, idx: &[usize]) -> bool {
        let first = self.y[idx[0]];
        idx.iter().all(|&i| self.y[i] == first)
    }

    /// Best `(feature, threshold, impurity)` over all midpoints, or `None`
    /// if no split separates the node.
    fn best_split(&self, idx: &[usize]) -> Option<(usize, f64, f64)> {
        let n = idx.len();
        let mut best: Option<(usize, f64, f64)> = None;
        let mut sorted = idx.to_vec();
        for feat in 0..self.f {
            let value = |i: usize| self.x[i * self.f + feat];
            sorted.sort_by(|&a, &b| value(a).total_cmp(&value(b)));
            match self.criterion {
                Criterion::Gini { classes } => {
                    let mut right = vec![0usize; classes];
                    sorted.iter().for_each(|&i| right[self.y[i] as usize] += 1);
                    let mut left = vec![0usize; classes];
                    let (mut sl, mut sr) = (0.0, right.iter().map(|&c| (c * c) as f64).sum::<f64>());
                    for k in 0..n - 1 {
                        let c = self.y[sorted[k]] as usize;
                        sl += (2 * left[c] + 1) as f64;
                        sr -= (2 * right[c] - 1) as f64;
                        left[c] += 1;
                        right[c] -= 1;
                        let (a, b) = (value(sorted[k]), value(sorted[k + 1]));
                        if a == b {
                            continue;
                        }
                        let (nl, nr) = ((k + 1) as f64, (n - k - 1) as f64);
                        // Weighted Gini: nl·(1 - Σp²) + nr·(1 - Σq²)
                        let impurity = nl - sl / nl + nr - sr / nr;
                        if best.is_none_or(|(_, _, s)| impurity < s - 1e-12) {
                            best = Some((feat, 0.5 * (a + b), impurity));
                        }
                    }
                }
                Criterion::Variance => {
                    let total: f64 = sorted.iter().map(|&i| self.y[i]).sum();
                    let total_sq: f64 = sorted.iter().map(|&i| self.y[i] * self.y[i]).sum();
                    let (mut sum_l, mut sq_l) = (0.0, 0.0);
                    for k in 0..n - 1 {
                        let v = self.y[sorted[k]];
                        sum_l += v;
                        sq_l += v * v;
                        let (a, b) = (value(sorted[k]), value(sorted[k + 1]));
                        if a == b {
                            continue;
                        }
                        let (nl, nr) = ((k + 1) as f64, (n - k - 1) as f64);
                        let sum_r = total - sum_l;
                        let sse = (sq_l - sum_l * sum_l / nl) + (total_sq - sq_l - sum_r * sum_r / nr);
                        if best.is_none_or(|(_, _, s)| sse < s - 1e-12) {
                            best = Some((feat, 0.5 * (a + b), sse));
                        }
                    }
                }
            }
        }
        best
    }

    fn grow(&self, idx: Vec<usize>, depth: usize) -> Node {
        if depth >= self.max_depth || idx.len() < 2 || self.is_pure(&idx) {
            return Node::Leaf(self.leaf_value(&idx));
        }
        let Some((feature, threshold, _)) = self.best_split(&idx) else {
            return Node::Leaf(self.leaf_value(&idx));
        };
        let (l, r): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| self.x[i * self.f + feature] <= threshold);
        Node::Split {
            feature,
            threshold,
            left: Box::new(self.grow(l, depth + 1)),
            right: Box::new(self.grow(r, depth + 1)),
        }
    }
}

impl DecisionTree {
    fn fit(x: &[f64], n_features: usize, y: &[f64], criterion: Criterion, max_depth: usize) -> Self {
        assert_eq!(x.len(), y.len() * n_features, "feature matrix shape");
        assert!(!y.is_empty(), "empty training set");
        let grower = Grower {
            x,
            f: n_features,
            y,
            criterion,
            max_depth,
        };
        DecisionTree {
            root: grower.grow((0..y.len()).collect(), 0),
            n_features,
        }
    }

    pub fn fit_classifier(x: &[f64], n_features: usize, y: &[usize], classes: usize, max_depth: usize) -> Self {
        let y: Vec<f64> = y.iter().map(|&c| c as f64).collect();
        Self::fit(x, n_features, &y, Criterion::Gini { classes }, max_depth)
    }

    pub fn fit_regressor(x: &[f64], n_features: usize, y: &[f64], max_depth: usize) -> Self {
        Self::fit(x, n_features, y, Criterion::Variance, max_depth)
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut node = &self.root;
        loop {
            match node {
                Node::Leaf(v) => return *v,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => node = if row[*feature] <= *threshold { left } else { right },
            }
        }
    }

    pub fn predict(&self, x: &[f64]) -> Vec<f64> {
        x.chunks(self.n_features).map(|r| self.predict_row(r)).collect()
    }

    pub fn predict_classes(&self, x: &[f64]) -> Vec<usize> {
        self.predict(x).into_iter().map(|v| v as usize).collect()
    }

    pub fn depth(&self) -> usize {
        fn depth(n: &Node) -> usize {
            match n {
                Node::Leaf(_) => 0,
                Node::Split { left, right, .. } => 1 + depth(left).max(depth(right)),
            }
        }
        depth(&self.root)
    }
}

/// Multinomial logistic regression fitted by full-batch gradient descent on
/// the mean cross-entropy.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticRegression {
    /// `(f + 1) × classes`; the last row is the intercept.
    weights: Vec<f64>,
    n_features: usize,
    classes: usize,
}

impl LogisticRegression {
    pub fn fit(x: &[f64], n_features: usize, y: &[usize], classes: usize, epochs: usize, lr: f64) -> Self {
        let n = y.len();
        let f = n_features;
        let mut w = vec![0.0; (f + 1) * classes];
        let mut grad = vec![0.0; w.len()];
        let mut p = vec![0.0; classes];
        for _ in 0..epochs {
            grad.iter_mut().for_each(|g| *g = 0.0);
            for (i, &yi) in y.iter().enumerate() {
                let row = &x[i * f..(i + 1) * f];
                Self::probs(&w, row, classes, &mut p);
                p[yi] -= 1.0;
                for (j, &xj) in row.iter().chain(std::iter::once(&1.0)).enumerate() {
                    for c in 0..classes {
                        grad[j * classes + c] += xj * p[c];
                    }
                }
            }
            for (wv, g) in w.iter_mut().zip(&grad) {
                *wv -= lr * g / n as f64;
            }
        }
        LogisticRegression {
            weights: w,
            n_features,
            classes,
        }
    }

    fn probs(w: &[f64], row: &[f64], classes: usize, out: &mut [f64]) {
        let f = row.len();
        for (c, o) in out.iter_mut().enumerate() {
            *o = w[f * classes + c] + row.iter().enumerate().map(|(j, &x)| x * w[j * classes + c]).sum::<f64>();
        }
        let max = out.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        out.iter_mut().for_each(|o| {
            *o = (*o - max).exp();
            sum += *o;
        });
        out.iter_mut().for_each(|o| *o /= sum);
    }

    pub fn predict_classes(&self, x: &[f64]) -> Vec<usize> {
        let mut p = vec![0.0; self.classes];
        x.chunks(self.n_features)
            .map(|row| {
                Self::probs(&self.weights, row, self.classes, &mut p);
                crate::nn::argmax(&p)
            })
            .collect()
    }
}

/// Least squares with intercept via `(XᵀX + λI)β = Xᵀy`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearRegression {
    /// Feature coefficients followed by the intercept.
    pub coefficients: Vec<f64>,
}

impl LinearRegression {
    pub fn fit(x: &[f64], n_features: usize, y: &[f64], ridge: f64) -> Self {
        let n = y.len();
        let f = n_features;
        let design = DMatrix::from_fn(n, f + 1, |r, c| if c == f { 1.0 } else { x[r * f + c] });
        let mut gram = design.transpose() * &design;
        for i in 0..=f {
            gram[(i, i)] += ridge;
        }
        let rhs = design.transpose() * DVector::from_column_slice(y);
        let beta = match gram.clone().cholesky() {
            Some(ch) => ch.solve(&rhs),
            None => gram
                .pseudo_inverse(1e-12)
                .map(|pinv| pinv * &rhs)
                .unwrap_or_else(|_| DVector::zeros(f + 1)),
        };
        LinearRegression {
            coefficients: beta.iter().copied().collect(),
        }
    }

    pub fn predict(&self, x: &[f64]) -> Vec<f64> {
        let f = self.coefficients.len() - 1;
        x.chunks(f)
            .map(|row| self.coefficients[f] + row.iter().zip(&self.coefficients).map(|(a, b)| a * b).sum::<f64>())
            .collect()
    }
}

pub fn accuracy(pred: &[usize], truth: &[usize]) -> f64 {
    let hits = pred.iter().zip(truth).filter(|(a, b)| a == b).count();
    hits as f64 / truth.len() as f64
}

/// Coefficient of determination; `1 - SSE / SST`. A constant truth vector
/// gives `1` for a perfect prediction and `0` otherwise.
pub fn r_squared(pred: &[f64], truth: &[f64]) -> f64 {
    let mean = truth.iter().sum::<f64>() / truth.len() as f64;
    let sse: f64 = pred.iter().zip(truth).map(|(p, t)| (p - t).powi(2)).sum();
    let sst: f64 = truth.iter().map(|t| (t - mean).powi(2)).sum();
    if sst == 0.0 {
        return if sse == 0.0 { 1.0 } else { 0.0 };
    }
    1.0 - sse / sst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tree_splits_on_threshold() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [0, 0, 1, 1];
        let t = DecisionTree::fit_classifier(&x, 1, &y, 2, 10);
        assert_eq!(t.predict_classes(&[0.5, 1.6, 2.4]), vec![0, 1, 1]);
        assert_eq!(t.depth(), 1);
    }

    #[test]
    fn tree_depth_limit() {
        let x: Vec<f64> = (0..64).map(f64::from).collect();
        let y: Vec<usize> = (0..64).map(|i| i % 2).collect();
        let t = DecisionTree::fit_classifier(&x, 1, &y, 2, 3);
        assert!(t.depth() <= 3);
    }

    #[test]
    fn regression_tree_fits_step() {
        let x: Vec<f64> = (0..20).map(f64::from).collect();
        let y: Vec<f64> = (0..20).map(|i| if i < 10 { -1.0 } else { 4.0 }).collect();
        let t = DecisionTree::fit_regressor(&x, 1, &y, 10);
        assert_eq!(t.predict(&[3.0, 15.0]), vec![-1.0, 4.0]);
    }

    #[test]
    fn ols_recovers_plane() {
        let x: Vec<f64> = (0..30).flat_map(|i| [i as f64, ((i * 7) % 11) as f64]).collect();
        let y: Vec<f64> = x.chunks(2).map(|r| 2.0 * r[0] - 3.0 * r[1] + 0.5).collect();
        let m = LinearRegression::fit(&x, 2, &y, OLS_RIDGE);
        assert!((m.coefficients[0] - 2.0).abs() < 1e-6);
        assert!((m.coefficients[1] + 3.0).abs() < 1e-6);
        assert!((m.coefficients[2] - 0.5).abs() < 1e-5);
        assert!(r_squared(&m.predict(&x), &y) > 0.999_999);
    }

    #[test]
    fn logistic_separates_two_points() {
        let x = [-1.0, -2.0, 1.0, 2.0];
        let y = [0, 0, 1, 1];
        let m = LogisticRegression::fit(&x, 1, &y, 2, LOGISTIC_EPOCHS, LOGISTIC_LR);
        assert_eq!(m.predict_classes(&x), vec![0, 0, 1, 1]);
    }

    #[test]
    fn r_squared_constant_truth() {
        assert_eq!(r_squared(&[1.0, 1.0], &[1.0, 1.0]), 1.0);
        assert_eq!(r_squared(&[0.0, 1.0], &[1.0, 1.0]), 0.0);
    }
}
