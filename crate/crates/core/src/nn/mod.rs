//! Minimal differentiable layer stack: affine layers, pointwise activations,
//! a softmax relaxation for categorical blocks and Adam. All arithmetic is
//! `f64` and gradients are computed by hand in reverse mode.

mod matrix;

pub use matrix::Matrix;

use rand::Rng;
use rand_distr::{Distribution, Uniform};
use serde::{Deserialize, Serialize};

pub const LEAKY_SLOPE: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Activation {
    Identity,
    LeakyRelu,
    Tanh,
    Sigmoid,
}

impl Activation {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Identity => x,
            Activation::LeakyRelu => {
                if x > 0.0 {
                    x
                } else {
                    LEAKY_SLOPE * x
                }
            }
            Activation::Tanh => x.tanh(),
            Activation::Sigmoid => sigmoid(x),
        }
    }

    /// Derivative expressed through the pre-activation `x` and output `y`.
    pub fn derivative(self, x: f64, y: f64) -> f64 {
        match self {
            Activation::Identity => 1.0,
            Activation::LeakyRelu => {
                if x > 0.0 {
                    1.0
                } else {
                    LEAKY_SLOPE
                }
            }
            Activation::Tanh => 1.0 - y * y,
            Activation::Sigmoid => y * (1.0 - y),
        }
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^x)` without overflow.
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Affine layer `y = x·W + b` with `W` stored as `in × out`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Linear {
    pub weight: Matrix,
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearGrads {
    pub weight: Matrix,
    pub bias: Vec<f64>,
}

impl Linear {
    /// Glorot-uniform weights in `±sqrt(6 / (fan_in + fan_out))`, zero biases.
    pub fn glorot<R: Rng + ?Sized>(fan_in: usize, fan_out: usize, rng: &mut R) -> Self {
        let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
        let dist = Uniform::new_inclusive(-limit, limit).expect("finite bounds");
        Linear {
            weight: Matrix::from_fn(fan_in, fan_out, |_, _| dist.sample(rng)),
            bias: vec![0.0; fan_out],
        }
    }

    pub fn fan_in(&self) -> usize {
        self.weight.rows()
    }

    pub fn fan_out(&self) -> usize {
        self.weight.cols()
    }

    pub fn forward(&self, x: &Matrix) -> Matrix {
        let mut y = x.matmul(&self.weight);
        y.add_row_vector(&self.bias);
        y
    }

    /// Returns parameter gradients (when requested) and the input gradient.
    pub fn backward(&self, x: &Matrix, grad_out: &Matrix, want_params: bool) -> (Option<LinearGrads>, Matrix) {
        let params = want_params.then(|| LinearGrads {
            weight: x.t_matmul(grad_out),
            bias: grad_out.column_sums(),
        });
        (params, grad_out.matmul_t(&self.weight))
    }
}

/// Multi-layer perceptron: hidden layers share one activation, the output
/// layer has its own (often `Identity`, leaving heads to the caller).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub layers: Vec<Linear>,
    pub hidden: Activation,
    pub output: Activation,
}

/// Activations kept from a forward pass.
#[derive(Debug, Clone)]
pub struct MlpCache {
    /// Input to each layer; `inputs[0]` is the network input.
    inputs: Vec<Matrix>,
    /// Pre-activation of each layer.
    pre: Vec<Matrix>,
    /// Network output (post-activation of the last layer).
    pub output: Matrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpGrads {
    pub layers: Vec<LinearGrads>,
}

impl MlpGrads {
    pub fn zeros_like(mlp: &Mlp) -> Self {
        MlpGrads {
            layers: mlp
                .layers
                .iter()
                .map(|l| LinearGrads {
                    weight: Matrix::zeros(l.fan_in(), l.fan_out()),
                    bias: vec![0.0; l.fan_out()],
                })
                .collect(),
        }
    }

    /// Flat view in the same order as [`Mlp::param`].
    pub fn flat(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for l in &self.layers {
            out.extend_from_slice(l.weight.as_slice());
            out.extend_from_slice(&l.bias);
        }
        out
    }
}

impl Mlp {
    /// `sizes = [in, h1, ..., out]`.
    pub fn new<R: Rng + ?Sized>(sizes: &[usize], hidden: Activation, output: Activation, rng: &mut R) -> Self {
        assert!(sizes.len() >= 2, "an MLP needs input and output sizes");
        let layers = sizes.windows(2).map(|w| Linear::glorot(w[0], w[1], rng)).collect();
        Mlp {
            layers,
            hidden,
            output,
        }
    }

    pub fn input_width(&self) -> usize {
        self.layers[0].fan_in()
    }

    pub fn output_width(&self) -> usize {
        self.layers.last().expect("non-empty").fan_out()
    }

    fn activation(&self, layer: usize) -> Activation {
        if layer + 1 == self.layers.len() {
            self.output
        } else {
            self.hidden
        }
    }

    pub fn forward(&self, x: &Matrix) -> MlpCache {
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut h = x.clone();
        for (i, layer) in self.layers.iter().enumerate() {
            let z = layer.forward(&h);
            let act = self.activation(i);
            let next = z.map(|v| act.apply(v));
            inputs.push(std::mem::replace(&mut h, next));
            pre.push(z);
        }
        MlpCache {
            inputs,
            pre,
            output: h,
        }
    }

    /// Output only; skips the cache.
    pub fn predict(&self, x: &Matrix) -> Matrix {
        let mut h = x.clone();
        for (i, layer) in self.layers.iter().enumerate() {
            let act = self.activation(i);
            h = layer.forward(&h).map(|v| act.apply(v));
        }
        h
    }

    /// Reverse pass from `grad_output = ∂L/∂output`. Parameter gradients are
    /// skipped when `want_params` is false (input gradient only).
    pub fn backward(&self, cache: &MlpCache, grad_output: &Matrix, want_params: bool) -> (Option<MlpGrads>, Matrix) {
        assert_eq!(grad_output.shape(), cache.output.shape(), "upstream gradient shape");
        let mut grads = Vec::with_capacity(self.layers.len());
        let mut g = grad_output.clone();
        for i in (0..self.layers.len()).rev() {
            let act = self.activation(i);
            if act != Activation::Identity {
                let y = if i + 1 == self.layers.len() {
                    &cache.output
                } else {
                    &cache.inputs[i + 1]
                };
                let z = &cache.pre[i];
                for ((gv, &zv), &yv) in g.as_mut_slice().iter_mut().zip(z.as_slice()).zip(y.as_slice()) {
                    *gv *= act.derivative(zv, yv);
                }
            }
            let (pg, gin) = self.layers[i].backward(&cache.inputs[i], &g, want_params);
            if let Some(pg) = pg {
                grads.push(pg);
            }
            g = gin;
        }
        grads.reverse();
        (want_params.then_some(MlpGrads { layers: grads }), g)
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.weight.as_slice().len() + l.bias.len()).sum()
    }

    /// Mutable access to parameter `index` in flat order (per layer: weights
    /// row-major, then biases).
    pub fn param_mut(&mut self, mut index: usize) -> &mut f64 {
        for l in &mut self.layers {
            let w = l.weight.as_slice().len();
            if index < w {
                return &mut l.weight.as_mut_slice()[index];
            }
            index -= w;
            if index < l.bias.len() {
                return &mut l.bias[index];
            }
            index -= l.bias.len();
        }
        panic!("parameter index out of range");
    }
}

/// Adam optimizer state for one [`Mlp`].
#[derive(Debug, Clone, PartialEq)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    pub fn new(param_count: usize, lr: f64, beta1: f64, beta2: f64, eps: f64) -> Self {
        Adam {
            lr,
            beta1,
            beta2,
            eps,
            m: vec![0.0; param_count],
            v: vec![0.0; param_count],
            t: 0,
        }
    }

    pub fn step(&mut self, mlp: &mut Mlp, grads: &MlpGrads) {
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t);
        let c2 = 1.0 - self.beta2.powi(self.t);
        let mut k = 0;
        for (layer, g) in mlp.layers.iter_mut().zip(&grads.layers) {
            let pairs = layer
                .weight
                .as_mut_slice()
                .iter_mut()
                .zip(g.weight.as_slice())
                .chain(layer.bias.iter_mut().zip(&g.bias));
            for (p, &gv) in pairs {
                let m = &mut self.m[k];
                let v = &mut self.v[k];
                *m = self.beta1 * *m + (1.0 - self.beta1) * gv;
                *v = self.beta2 * *v + (1.0 - self.beta2) * gv * gv;
                *p -= self.lr * (*m / c1) / ((*v / c2).sqrt() + self.eps);
                k += 1;
            }
        }
        debug_assert_eq!(k, self.m.len());
    }
}

/// Row-wise softmax of `(logits + noise) / tau`.
pub fn gumbel_softmax(logits: &Matrix, gumbel: &Matrix, tau: f64) -> Matrix {
    let mut out = Matrix::zeros(logits.rows(), logits.cols());
    for r in 0..logits.rows() {
        let z: Vec<f64> = logits
            .row(r)
            .iter()
            .zip(gumbel.row(r))
            .map(|(l, g)| (l + g) / tau)
            .collect();
        let max = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let dst = out.row_mut(r);
        let mut sum = 0.0;
        for (d, v) in dst.iter_mut().zip(&z) {
            *d = (v - max).exp();
            sum += *d;
        }
        dst.iter_mut().for_each(|d| *d /= sum);
    }
    out
}

/// Gradient w.r.t. logits of [`gumbel_softmax`], given its output `y`.
pub fn gumbel_softmax_backward(y: &Matrix, grad_y: &Matrix, tau: f64) -> Matrix {
    let mut out = Matrix::zeros(y.rows(), y.cols());
    for r in 0..y.rows() {
        let yr = y.row(r);
        let gr = grad_y.row(r);
        let dot: f64 = yr.iter().zip(gr).map(|(a, b)| a * b).sum();
        for ((o, &yv), &gv) in out.row_mut(r).iter_mut().zip(yr).zip(gr) {
            *o = yv * (gv - dot) / tau;
        }
    }
    out
}

/// Standard Gumbel draws, `-ln(-ln u)`.
pub fn sample_gumbel<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| {
        let u: f64 = rng.random_range(f64::EPSILON..1.0);
        -(-u.ln()).ln()
    })
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_upstream_gives_zero_gradients() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mlp = Mlp::new(&[3, 4, 2], Activation::LeakyRelu, Activation::Tanh, &mut rng);
        let x = Matrix::from_fn(5, 3, |r, c| (r as f64 - c as f64) * 0.3);
        let cache = mlp.forward(&x);
        let (grads, gin) = mlp.backward(&cache, &Matrix::zeros(5, 2), true);
        assert!(grads.unwrap().flat().iter().all(|&g| g == 0.0));
        assert!(gin.as_slice().iter().all(|&g| g == 0.0));
    }

    #[test]
    fn affine_weight_gradient_is_outer_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let layer = Linear::glorot(3, 2, &mut rng);
        let x = Matrix::from_vec(1, 3, vec![1.0, -2.0, 0.5]);
        let g = Matrix::from_vec(1, 2, vec![0.25, -1.0]);
        let (grads, gin) = layer.backward(&x, &g, true);
        let grads = grads.unwrap();
        for i in 0..3 {
            for j in 0..2 {
                assert_eq!(grads.weight.get(i, j), x.get(0, i) * g.get(0, j));
            }
        }
        assert_eq!(grads.bias, vec![0.25, -1.0]);
        let expected: Vec<f64> = (0..3)
            .map(|i| layer.weight.get(i, 0) * 0.25 - layer.weight.get(i, 1))
            .collect();
        for (a, b) in gin.as_slice().iter().zip(&expected) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn glorot_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let l = Linear::glorot(10, 20, &mut rng);
        let limit = (6.0f64 / 30.0).sqrt();
        assert!(l.weight.as_slice().iter().all(|w| w.abs() <= limit));
        assert!(l.bias.iter().all(|&b| b == 0.0));
    }

    #[test]
    fn gumbel_softmax_rows_sum_to_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let logits = Matrix::from_fn(4, 3, |r, c| (r * c) as f64 - 1.0);
        let g = sample_gumbel(4, 3, &mut rng);
        let y = gumbel_softmax(&logits, &g, 0.2);
        for r in 0..4 {
            assert!((y.row(r).iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn stable_helpers() {
        assert_eq!(sigmoid(-1000.0), 0.0);
        assert_eq!(sigmoid(1000.0), 1.0);
        assert!((softplus(0.0) - 2f64.ln()).abs() < 1e-15);
        assert_eq!(softplus(1000.0), 1000.0);
        assert_eq!(argmax(&[0.0, 0.0, 0.0]), 0);
        assert_eq!(argmax(&[0.2, 0.5, 0.3]), 1);
    }

    #[test]
    fn adam_moves_against_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut mlp = Mlp::new(&[1, 1], Activation::Identity, Activation::Identity, &mut rng);
        let before = mlp.layers[0].weight.get(0, 0);
        let mut grads = MlpGrads::zeros_like(&mlp);
        grads.layers[0].weight.set(0, 0, 3.0);
        let mut adam = Adam::new(mlp.param_count(), 0.1, 0.5, 0.9, 1e-8);
        adam.step(&mut mlp, &grads);
        // first Adam step has magnitude lr regardless of gradient scale
        assert!((before - mlp.layers[0].weight.get(0, 0) - 0.1).abs() < 1e-9);
        assert_eq!(mlp.layers[0].bias[0], 0.0);
    }
}
