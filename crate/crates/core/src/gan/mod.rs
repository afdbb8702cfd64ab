//! Causal generator trained adversarially: one MLP mechanism per column,
//! evaluated in topological order over the causal graph, against an MLP
//! discriminator.

mod generator;
mod train;

pub use generator::{
    build_generator, GeneratorCache, GeneratorGrads, GeneratorNoise, MechanismNet, SampleMode, ScmGenerator,
};
pub use train::{discriminator_step, generator_loss, train, EpochStats, TrainHistory};

use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{Table, TableSchema};
use crate::graph::CausalGraph;
use crate::nn::{sigmoid, Activation, Matrix, Mlp};
use crate::transform::{TableCodec, TransformError};

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum GanError {
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("non-finite loss at epoch {epoch} (d_loss = {d_loss}, g_loss = {g_loss})")]
    NonFiniteLoss { epoch: usize, d_loss: f64, g_loss: f64 },
    #[error("model file: {0}")]
    ModelFormat(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Transform(#[from] TransformError),
}

/// Exogenous noise: `dim_per_node` independent standard normals per node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub dim_per_node: usize,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        NoiseSpec { dim_per_node: 5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    /// Gumbel-softmax temperature.
    pub tau: f64,
    pub noise_dim: usize,
    pub mechanism_hidden: Vec<usize>,
    pub discriminator_hidden: Vec<usize>,
    /// Mixture components per continuous column.
    pub k_max: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 300,
            batch_size: 500,
            lr: 2e-4,
            beta1: 0.5,
            beta2: 0.9,
            eps: 1e-8,
            tau: 0.2,
            noise_dim: 5,
            mechanism_hidden: vec![64, 64],
            discriminator_hidden: vec![256, 256],
            k_max: crate::transform::DEFAULT_K_MAX,
            seed: 0,
        }
    }
}

impl TrainConfig {
    /// Checks every field; `n` is the number of training rows.
    pub fn validate(&self, n: usize) -> Result<(), GanError> {
        let bad = |m: String| Err(GanError::InvalidConfig(m));
        if self.epochs == 0 {
            return bad("epochs must be at least 1".into());
        }
        if self.batch_size == 0 || self.batch_size > n {
            return bad(format!("batch size {} must be in 1..={n}", self.batch_size));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) || !(self.eps > 0.0) {
            return bad("learning rate and epsilon must be positive".into());
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return bad("Adam betas must lie in [0, 1)".into());
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return bad(format!("temperature must be positive, got {}", self.tau));
        }
        if self.noise_dim == 0 || self.k_max == 0 {
            return bad("noise dimension and k_max must be at least 1".into());
        }
        if self.mechanism_hidden.contains(&0) || self.discriminator_hidden.contains(&0) {
            return bad("hidden layer sizes must be positive".into());
        }
        Ok(())
    }
}

/// MLP critic over encoded rows. Outputs a logit; [`Discriminator::probabilities`]
/// applies the sigmoid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Discriminator {
    pub mlp: Mlp,
}

impl Discriminator {
    pub fn new(width: usize, hidden: &[usize], seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sizes = vec![width];
        sizes.extend_from_slice(hidden);
        sizes.push(1);
        Discriminator {
            mlp: Mlp::new(&sizes, Activation::LeakyRelu, Activation::Identity, &mut rng),
        }
    }

    pub fn input_width(&self) -> usize {
        self.mlp.input_width()
    }

    pub fn logits(&self, x: &Matrix) -> Vec<f64> {
        self.mlp.predict(x).into_vec()
    }

    pub fn probabilities(&self, x: &Matrix) -> Vec<f64> {
        self.logits(x).into_iter().map(sigmoid).collect()
    }
}

/// Everything needed to sample again: schema, codecs, graph, noise spec and
/// all parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub format_version: u32,
    pub schema: TableSchema,
    pub generator: ScmGenerator,
    pub discriminator: Discriminator,
    pub config: TrainConfig,
}

impl TrainedModel {
    pub fn graph(&self) -> &CausalGraph {
        &self.generator.graph
    }

    /// Hard-mode samples decoded back to a table.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Table, GanError> {
        if n == 0 {
            return Err(GanError::InvalidConfig("sample size must be at least 1".into()));
        }
        Ok(self.generator.generate(n, seed, SampleMode::Hard)?.decode()?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, GanError> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| GanError::ModelFormat(e.to_string()))?;
        match value.get("format_version").and_then(|v| v.as_u64()) {
            Some(v) if v == MODEL_FORMAT_VERSION as u64 => {}
            Some(v) => {
                return Err(GanError::ModelFormat(format!(
                    "format version {v} is not supported (expected {MODEL_FORMAT_VERSION})"
                )))
            }
            None => return Err(GanError::ModelFormat("missing format_version".into())),
        }
        let model: TrainedModel = serde_json::from_value(value).map_err(|e| GanError::ModelFormat(e.to_string()))?;
        if model.generator.codec.schema() != model.schema {
            return Err(GanError::ModelFormat("schema does not match the stored codecs".into()));
        }
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), GanError> {
        fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, GanError> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}

/// Fits codecs on `table`, builds a generator over `graph` and trains it.
pub fn fit(table: &Table, graph: &CausalGraph, cfg: &TrainConfig) -> Result<(TrainedModel, TrainHistory), GanError> {
    cfg.validate(table.n_rows())?;
    let codec = TableCodec::fit(table, cfg.k_max, cfg.seed)?;
    let real = codec.encode(table, cfg.seed.wrapping_add(1))?;
    let noise = NoiseSpec {
        dim_per_node: cfg.noise_dim,
    };
    let mut gen = build_generator(graph, &codec, noise, &cfg.mechanism_hidden, cfg.tau, cfg.seed.wrapping_add(2))?;
    let mut disc = Discriminator::new(codec.width(), &cfg.discriminator_hidden, cfg.seed.wrapping_add(3));
    let history = train(&mut gen, &mut disc, &real, cfg)?;
    let model = TrainedModel {
        format_version: MODEL_FORMAT_VERSION,
        schema: codec.schema(),
        generator: gen,
        discriminator: disc,
        config: cfg.clone(),
    };
    Ok((model, history))
}
