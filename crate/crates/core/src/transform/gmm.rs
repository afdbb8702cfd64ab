use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::TransformError;

/// Components lighter than this are pruned after fitting.
pub const PRUNE_WEIGHT: f64 = 1e-3;
pub const MAX_EM_ITERATIONS: usize = 200;
/// EM stops once the mean log-likelihood improves by less than this.
pub const EM_TOLERANCE: f64 = 1e-6;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// One-dimensional Gaussian mixture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GmmModel {
    pub weights: Vec<f64>,
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

/// A fitted mixture together with the per-iteration mean log-likelihood.
#[derive(Debug, Clone)]
pub struct GmmFit {
    pub model: GmmModel,
    pub log_likelihood: Vec<f64>,
}

impl GmmModel {
    pub fn k(&self) -> usize {
        self.weights.len()
    }

    /// Single-component model, mostly for tests and degenerate fallbacks.
    pub fn single(mean: f64, std: f64) -> Self {
        GmmModel {
            weights: vec![1.0],
            means: vec![mean],
            stds: vec![std],
        }
    }

    /// Fits by EM from a k-means++ start; see [`GmmModel::fit_traced`].
    pub fn fit(values: &[f64], k_max: usize, seed: u64) -> Result<Self, TransformError> {
        Ok(Self::fit_traced(values, k_max, seed)?.model)
    }

    /// EM with up to `k_max` components, initialized by k-means++ seeding.
    /// Runs until the mean log-likelihood gain drops below [`EM_TOLERANCE`] or
    /// [`MAX_EM_ITERATIONS`] is reached, then prunes light components.
    pub fn fit_traced(values: &[f64], k_max: usize, seed: u64) -> Result<GmmFit, TransformError> {
        let n = values.len();
        if n < 2 || k_max == 0 {
            return Err(TransformError::DegenerateColumn(format!(
                "need at least 2 values and 1 component, got {n} values"
            )));
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
        if var <= 0.0 || !var.is_finite() {
            return Err(TransformError::DegenerateColumn("all values are equal".into()));
        }
        let min_std = 1e-3 * var.sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);

        let mut distinct = values.to_vec();
        distinct.sort_by(f64::total_cmp);
        distinct.dedup();
        let k = k_max.min(distinct.len());

        let centers = kmeans_pp(values, k, &mut rng);
        let mut model = init_from_centers(values, &centers, min_std);

        let mut resp = vec![0.0; n * k];
        let mut history = Vec::new();
        let mut prev = f64::NEG_INFINITY;
        for _ in 0..MAX_EM_ITERATIONS {
            let ll = model.responsibilities_into(values, &mut resp);
            history.push(ll);
            if ll - prev < EM_TOLERANCE {
                break;
            }
            prev = ll;
            model.m_step(values, &resp, min_std);
        }

        model.prune(PRUNE_WEIGHT);
        Ok(GmmFit {
            model,
            log_likelihood: history,
        })
    }

    fn m_step(&mut self, values: &[f64], resp: &[f64], min_std: f64) {
        let n = values.len();
        let k = self.k();
        for j in 0..k {
            let mut nk = 0.0;
            let mut sx = 0.0;
            for (i, &x) in values.iter().enumerate() {
                let r = resp[i * k + j];
                nk += r;
                sx += r * x;
            }
            if nk <= 0.0 {
                // Starved component: keep parameters, zero weight.
                self.weights[j] = 0.0;
                continue;
            }
            let mu = sx / nk;
            let sv: f64 = values
                .iter()
                .enumerate()
                .map(|(i, &x)| resp[i * k + j] * (x - mu).powi(2))
                .sum();
            self.weights[j] = nk / n as f64;
            self.means[j] = mu;
            self.stds[j] = (sv / nk).sqrt().max(min_std);
        }
    }

    /// Fills `resp` (row-major `n × k`) with `P(component | x)` and returns the
    /// mean log-likelihood of `values`.
    pub fn responsibilities_into(&self, values: &[f64], resp: &mut [f64]) -> f64 {
        let k = self.k();
        let mut total = 0.0;
        let mut logs = vec![0.0; k];
        for (i, &x) in values.iter().enumerate() {
            let lse = self.log_joint(x, &mut logs);
            total += lse;
            for j in 0..k {
                resp[i * k + j] = (logs[j] - lse).exp();
            }
        }
        total / values.len() as f64
    }

    /// `P(component | x)` for one value.
    pub fn responsibilities(&self, x: f64) -> Vec<f64> {
        let mut logs = vec![0.0; self.k()];
        let lse = self.log_joint(x, &mut logs);
        logs.iter().map(|l| (l - lse).exp()).collect()
    }

    /// Writes `ln w_j + ln N(x; μ_j, σ_j)` into `logs`, returns their log-sum-exp.
    fn log_joint(&self, x: f64, logs: &mut [f64]) -> f64 {
        let mut max = f64::NEG_INFINITY;
        for j in 0..self.k() {
            let z = (x - self.means[j]) / self.stds[j];
            let l = self.weights[j].ln() - self.stds[j].ln() - LN_SQRT_2PI - 0.5 * z * z;
            logs[j] = l;
            max = max.max(l);
        }
        if max == f64::NEG_INFINITY {
            return max;
        }
        max + logs.iter().map(|l| (l - max).exp()).sum::<f64>().ln()
    }

    pub fn mean_log_likelihood(&self, values: &[f64]) -> f64 {
        let mut logs = vec![0.0; self.k()];
        values.iter().map(|&x| self.log_joint(x, &mut logs)).sum::<f64>() / values.len() as f64
    }

    fn prune(&mut self, threshold: f64) {
        let keep: Vec<usize> = (0..self.k()).filter(|&j| self.weights[j] >= threshold).collect();
        let keep = if keep.is_empty() {
            vec![crate::nn::argmax(&self.weights)]
        } else {
            keep
        };
        let total: f64 = keep.iter().map(|&j| self.weights[j]).sum();
        self.weights = keep.iter().map(|&j| self.weights[j] / total).collect();
        self.means = keep.iter().map(|&j| self.means[j]).collect();
        self.stds = keep.iter().map(|&j| self.stds[j]).collect();
    }
}

fn kmeans_pp<R: Rng>(values: &[f64], k: usize, rng: &mut R) -> Vec<f64> {
    let mut centers = vec![values[rng.random_range(0..values.len())]];
    let mut d2: Vec<f64> = values.iter().map(|&x| (x - centers[0]).powi(2)).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        if total <= 0.0 {
            break;
        }
        let mut target = rng.random::<f64>() * total;
        let mut pick = values.len() - 1;
        for (i, &d) in d2.iter().enumerate() {
            if target < d {
                pick = i;
                break;
            }
            target -= d;
        }
        let c = values[pick];
        centers.push(c);
        for (d, &x) in d2.iter_mut().zip(values) {
            *d = d.min((x - c).powi(2));
        }
    }
    centers
}

fn init_from_centers(values: &[f64], centers: &[f64], min_std: f64) -> GmmModel {
    let k = centers.len();
    let mut count = vec![0usize; k];
    let mut sum = vec![0.0; k];
    let mut sq = vec![0.0; k];
    for &x in values {
        let j = (0..k)
            .min_by(|&a, &b| (x - centers[a]).abs().total_cmp(&(x - centers[b]).abs()))
            .expect("k >= 1");
        count[j] += 1;
        sum[j] += x;
        sq[j] += x * x;
    }
    let n = values.len() as f64;
    let mut model = GmmModel {
        weights: Vec::with_capacity(k),
        means: Vec::with_capacity(k),
        stds: Vec::with_capacity(k),
    };
    for j in 0..k {
        if count[j] == 0 {
            continue;
        }
        let c = count[j] as f64;
        let mu = sum[j] / c;
        let var = (sq[j] / c - mu * mu).max(0.0);
        model.weights.push(c / n);
        model.means.push(mu);
        model.stds.push(var.sqrt().max(min_std));
    }
    model
}
