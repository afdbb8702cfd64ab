use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{GanError, NoiseSpec};
use crate::graph::CausalGraph;
use crate::nn::{
    argmax, gumbel_softmax, gumbel_softmax_backward, sample_gumbel, Activation, Matrix, Mlp, MlpCache, MlpGrads,
};
use crate::transform::{ColumnCodec, EncodedMatrix, TableCodec};

/// Relaxed outputs for training, exact one-hots for sampling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleMode {
    Soft,
    Hard,
}

/// Causal mechanism of one node: an MLP over its parents' encoded spans and
/// its own noise slice, followed by per-codec output heads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MechanismNet {
    pub node: usize,
    pub mlp: Mlp,
}

impl MechanismNet {
    pub fn input_width(&self) -> usize {
        self.mlp.input_width()
    }

    pub fn output_width(&self) -> usize {
        self.mlp.output_width()
    }
}

/// Exogenous inputs for one forward pass: Gaussian noise (`n × d·dim`, node
/// `i` owns columns `i·dim..(i+1)·dim`) and Gumbel noise aligned with the
/// encoded layout (`n × W`).
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorNoise {
    pub exo: Matrix,
    pub gumbel: Matrix,
}

/// Per-node state kept for the backward pass.
#[derive(Debug, Clone)]
struct NodeCache {
    mlp: MlpCache,
    /// Head outputs before any straight-through rounding.
    soft: Matrix,
    overridden: bool,
}

#[derive(Debug, Clone)]
pub struct GeneratorCache {
    nodes: Vec<NodeCache>,
    /// Encoded sample (`n × W`) as seen by the discriminator.
    pub output: Matrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorGrads {
    /// Indexed by node.
    pub mechanisms: Vec<MlpGrads>,
}

impl GeneratorGrads {
    pub fn flat(&self) -> Vec<f64> {
        self.mechanisms.iter().flat_map(|g| g.flat()).collect()
    }
}

/// The structural causal model: a DAG over the table's columns with one
/// neural mechanism per column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScmGenerator {
    pub graph: CausalGraph,
    pub codec: TableCodec,
    pub mechanisms: Vec<MechanismNet>,
    pub noise: NoiseSpec,
    pub tau: f64,
}

/// Wires one mechanism per node after binding the graph to the codec columns
/// by name.
pub fn build_generator(
    graph: &CausalGraph,
    codec: &TableCodec,
    noise: NoiseSpec,
    hidden: &[usize],
    tau: f64,
    seed: u64,
) -> Result<ScmGenerator, GanError> {
    if noise.dim_per_node == 0 {
        return Err(GanError::InvalidConfig("noise dimension must be at least 1".into()));
    }
    if !(tau > 0.0) {
        return Err(GanError::InvalidConfig(format!("temperature must be positive, got {tau}")));
    }
    let graph = graph
        .bind_to(&codec.names())
        .map_err(|e| GanError::SchemaMismatch(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mechanisms = (0..graph.len())
        .map(|node| {
            let in_width: usize =
                graph.parents(node).iter().map(|&p| codec.codecs()[p].width).sum::<usize>() + noise.dim_per_node;
            let mut sizes = vec![in_width];
            sizes.extend_from_slice(hidden);
            sizes.push(codec.codecs()[node].width);
            MechanismNet {
                node,
                mlp: Mlp::new(&sizes, Activation::LeakyRelu, Activation::Identity, &mut rng),
            }
        })
        .collect();
    Ok(ScmGenerator {
        graph,
        codec: codec.clone(),
        mechanisms,
        noise,
        tau,
    })
}

impl ScmGenerator {
    pub fn width(&self) -> usize {
        self.codec.width()
    }

    pub fn param_count(&self) -> usize {
        self.mechanisms.iter().map(|m| m.mlp.param_count()).sum()
    }

    pub fn sample_noise<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> GeneratorNoise {
        let exo_cols = self.graph.len() * self.noise.dim_per_node;
        let exo = Matrix::from_fn(n, exo_cols, |_, _| rng.sample(StandardNormal));
        let gumbel = sample_gumbel(n, self.width(), rng);
        GeneratorNoise { exo, gumbel }
    }

    fn check_noise(&self, noise: &GeneratorNoise) -> Result<usize, GanError> {
        let n = noise.exo.rows();
        let exo_cols = self.graph.len() * self.noise.dim_per_node;
        if noise.exo.cols() != exo_cols || noise.gumbel.shape() != (n, self.width()) {
            return Err(GanError::ShapeMismatch(format!(
                "noise shapes {:?} / {:?} do not fit {} nodes of dim {} and width {}",
                noise.exo.shape(),
                noise.gumbel.shape(),
                self.graph.len(),
                self.noise.dim_per_node,
                self.width()
            )));
        }
        Ok(n)
    }

    fn mechanism_input(&self, node: usize, out: &Matrix, noise: &GeneratorNoise) -> Matrix {
        let codecs = self.codec.codecs();
        let dim = self.noise.dim_per_node;
        let mut blocks: Vec<Matrix> = self
            .graph
            .parents(node)
            .iter()
            .map(|&p| out.columns(codecs[p].offset, codecs[p].width))
            .collect();
        blocks.push(noise.exo.columns(node * dim, dim));
        Matrix::hstack(&blocks.iter().collect::<Vec<_>>())
    }

    fn apply_heads(&self, codec: &ColumnCodec, raw: &Matrix, gumbel: &Matrix) -> Matrix {
        let mut soft = Matrix::zeros(raw.rows(), codec.width);
        let block_start = if codec.is_continuous() {
            soft.set_columns(0, &raw.columns(0, 1).map(f64::tanh));
            1
        } else {
            0
        };
        let block_width = codec.width - block_start;
        let logits = raw.columns(block_start, block_width);
        let g = gumbel.columns(codec.offset + block_start, block_width);
        soft.set_columns(block_start, &gumbel_softmax(&logits, &g, self.tau));
        soft
    }

    fn harden(codec: &ColumnCodec, soft: &Matrix) -> Matrix {
        let mut hard = soft.clone();
        let start = if codec.is_continuous() { 1 } else { 0 };
        for r in 0..hard.rows() {
            let row = &mut hard.row_mut(r)[start..];
            let k = argmax(row);
            row.iter_mut().enumerate().for_each(|(j, v)| *v = if j == k { 1.0 } else { 0.0 });
        }
        hard
    }

    /// Ancestral pass with explicit noise. `overrides` replaces a node's
    /// encoded output before its children are evaluated.
    pub fn forward_with(
        &self,
        noise: &GeneratorNoise,
        mode: SampleMode,
        overrides: &BTreeMap<usize, Matrix>,
    ) -> Result<GeneratorCache, GanError> {
        let n = self.check_noise(noise)?;
        let codecs = self.codec.codecs();
        let mut out = Matrix::zeros(n, self.width());
        let mut nodes: Vec<Option<NodeCache>> = vec![None; self.graph.len()];
        for &node in self.graph.topo_order() {
            let codec = &codecs[node];
            let input = self.mechanism_input(node, &out, noise);
            let mlp = self.mechanisms[node].mlp.forward(&input);
            let soft = self.apply_heads(codec, &mlp.output, &noise.gumbel);
            let overridden = match overrides.get(&node) {
                Some(value) => {
                    if value.shape() != (n, codec.width) {
                        return Err(GanError::ShapeMismatch(format!(
                            "override for `{}` has shape {:?}, expected ({n}, {})",
                            codec.name,
                            value.shape(),
                            codec.width
                        )));
                    }
                    out.set_columns(codec.offset, value);
                    true
                }
                None => {
                    let emitted = match mode {
                        SampleMode::Soft => soft.clone(),
                        SampleMode::Hard => Self::harden(codec, &soft),
                    };
                    out.set_columns(codec.offset, &emitted);
                    false
                }
            };
            nodes[node] = Some(NodeCache { mlp, soft, overridden });
        }
        Ok(GeneratorCache {
            nodes: nodes.into_iter().map(|c| c.expect("every node visited")).collect(),
            output: out,
        })
    }

    pub fn forward(&self, noise: &GeneratorNoise, mode: SampleMode) -> Result<GeneratorCache, GanError> {
        self.forward_with(noise, mode, &BTreeMap::new())
    }

    /// Draws `n` encoded rows. Deterministic under `seed`.
    pub fn generate(&self, n: usize, seed: u64, mode: SampleMode) -> Result<EncodedMatrix, GanError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = self.sample_noise(n, &mut rng);
        let cache = self.forward(&noise, mode)?;
        Ok(EncodedMatrix {
            data: cache.output,
            codec: self.codec.clone(),
        })
    }

    /// Reverse pass from `∂L/∂output`. Nodes are visited in reverse
    /// topological order; each mechanism's input gradient is split back onto
    /// its parents' spans. Hard-mode rounding is treated as identity
    /// (straight-through) and overridden nodes pass no gradient to their own
    /// mechanism.
    pub fn backward(&self, cache: &GeneratorCache, grad_output: &Matrix) -> Result<GeneratorGrads, GanError> {
        if grad_output.shape() != cache.output.shape() {
            return Err(GanError::ShapeMismatch(format!(
                "upstream gradient {:?} vs generator output {:?}",
                grad_output.shape(),
                cache.output.shape()
            )));
        }
        let codecs = self.codec.codecs();
        let mut grad = grad_output.clone();
        let mut mechanisms: Vec<Option<MlpGrads>> = vec![None; self.graph.len()];
        for &node in self.graph.topo_order().iter().rev() {
            let codec = &codecs[node];
            let net = &self.mechanisms[node].mlp;
            let nc = &cache.nodes[node];
            if nc.overridden {
                mechanisms[node] = Some(MlpGrads::zeros_like(net));
                continue;
            }
            let g_out = grad.columns(codec.offset, codec.width);
            let mut g_raw = Matrix::zeros(g_out.rows(), codec.width);
            let block_start = if codec.is_continuous() {
                let y = nc.soft.columns(0, 1);
                let g = g_out.columns(0, 1);
                g_raw.set_columns(
                    0,
                    &Matrix::from_fn(y.rows(), 1, |r, _| g.get(r, 0) * (1.0 - y.get(r, 0).powi(2))),
                );
                1
            } else {
                0
            };
            let bw = codec.width - block_start;
            let gb = gumbel_softmax_backward(&nc.soft.columns(block_start, bw), &g_out.columns(block_start, bw), self.tau);
            g_raw.set_columns(block_start, &gb);

            let (params, g_in) = net.backward(&nc.mlp, &g_raw, true);
            mechanisms[node] = params;
            let mut at = 0;
            for &p in self.graph.parents(node) {
                let pc = &codecs[p];
                grad.add_columns(pc.offset, &g_in.columns(at, pc.width));
                at += pc.width;
            }
        }
        Ok(GeneratorGrads {
            mechanisms: mechanisms.into_iter().map(|g| g.expect("every node visited")).collect(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transform::CodecKind;

    fn binary(name: &str) -> (String, CodecKind) {
        (
            name.to_string(),
            CodecKind::Discrete {
                categories: vec!["yes".into(), "no".into()],
            },
        )
    }

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn input_widths_follow_parent_spans() {
        let codec = TableCodec::from_kinds(vec![binary("a"), binary("b")]).unwrap();
        let graph = CausalGraph::from_edges(names(&["a", "b"]), &[(0, 1)]).unwrap();
        let gen = build_generator(&graph, &codec, NoiseSpec::default(), &[64, 64], 0.2, 1).unwrap();
        assert_eq!(gen.mechanisms[0].input_width(), 5);
        assert_eq!(gen.mechanisms[1].input_width(), 7);
        assert_eq!(gen.mechanisms[1].output_width(), 2);
    }

    #[test]
    fn graph_is_bound_by_name() {
        let codec = TableCodec::from_kinds(vec![binary("a"), binary("b")]).unwrap();
        let graph = CausalGraph::from_edges(names(&["b", "a"]), &[(0, 1)]).unwrap();
        let gen = build_generator(&graph, &codec, NoiseSpec::default(), &[8], 0.2, 1).unwrap();
        assert_eq!(gen.graph.parents(0), &[1]);
        let bad = CausalGraph::from_edges(names(&["a", "c"]), &[]).unwrap();
        assert!(matches!(
            build_generator(&bad, &codec, NoiseSpec::default(), &[8], 0.2, 1),
            Err(GanError::SchemaMismatch(_))
        ));
    }

    #[test]
    fn hard_mode_blocks_are_one_hot() {
        let codec = TableCodec::from_kinds(vec![binary("a"), binary("b")]).unwrap();
        let graph = CausalGraph::from_edges(names(&["a", "b"]), &[(0, 1)]).unwrap();
        let gen = build_generator(&graph, &codec, NoiseSpec::default(), &[8], 0.2, 3).unwrap();
        let out = gen.generate(50, 9, SampleMode::Hard).unwrap().data;
        for r in 0..50 {
            for block in [0, 2] {
                let row = &out.row(r)[block..block + 2];
                assert!(row.iter().all(|&v| v == 0.0 || v == 1.0));
                assert_eq!(row.iter().sum::<f64>(), 1.0);
            }
        }
    }

    #[test]
    fn zero_upstream_gradient_gives_zero_gradients() {
        let codec = TableCodec::from_kinds(vec![binary("a"), binary("b")]).unwrap();
        let graph = CausalGraph::from_edges(names(&["a", "b"]), &[(0, 1)]).unwrap();
        let gen = build_generator(&graph, &codec, NoiseSpec::default(), &[8], 0.2, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let noise = gen.sample_noise(10, &mut rng);
        let cache = gen.forward(&noise, SampleMode::Soft).unwrap();
        let grads = gen.backward(&cache, &Matrix::zeros(10, 4)).unwrap();
        assert!(grads.flat().iter().all(|&g| g == 0.0));
        assert!(matches!(
            gen.backward(&cache, &Matrix::zeros(10, 3)),
            Err(GanError::ShapeMismatch(_))
        ));
    }
}
