//! Discrete Bayesian networks used as oracle models: BIF parsing, ancestral
//! sampling and log-likelihood scoring of tables.

mod bif;

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::data::{ColumnData, ColumnSchema, DataError, Table, TableSchema};
use crate::graph::{CausalGraph, GraphError};

/// Tolerance on CPT row sums.
pub const ROW_SUM_TOLERANCE: f64 = 1e-6;

/// Additive floor used by [`LikelihoodReport::floored_mean`].
pub const LIKELIHOOD_FLOOR: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum BayesNetError {
    #[error("syntax error on line {line} at `{token}`: {message}")]
    Syntax {
        line: usize,
        token: String,
        message: String,
    },
    #[error("variable `{0}` is not declared")]
    UnknownVariable(String),
    #[error("parent `{parent}` of `{node}` is not declared")]
    UnknownParent { node: String, parent: String },
    #[error("bad CPT for `{node}`: {message}")]
    CptShape { node: String, message: String },
    #[error("CPT row {row} of `{node}` sums to {sum}")]
    CptRowSum { node: String, row: usize, sum: f64 },
    #[error("CPT row {row} of `{node}` has invalid probability {value}")]
    InvalidProbability { node: String, row: usize, value: f64 },
    #[error("value `{value}` is not a state of `{column}`")]
    UnknownState { column: String, value: String },
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Data(#[from] DataError),
}

/// Conditional probability table for one node. Rows are indexed by the parent
/// assignment in mixed radix, first parent most significant.
#[derive(Debug, Clone, PartialEq)]
pub struct Cpt {
    n_states: usize,
    parent_cards: Vec<usize>,
    probs: Vec<f64>,
}

impl Cpt {
    pub fn new(node: &str, n_states: usize, parent_cards: Vec<usize>, probs: Vec<f64>) -> Result<Self, BayesNetError> {
        let n_rows: usize = parent_cards.iter().product();
        if n_states == 0 || probs.len() != n_rows * n_states {
            return Err(BayesNetError::CptShape {
                node: node.to_string(),
                message: format!("{} entries for {n_rows} rows of {n_states} states", probs.len()),
            });
        }
        for (row, chunk) in probs.chunks(n_states).enumerate() {
            if let Some(&value) = chunk.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
                return Err(BayesNetError::InvalidProbability {
                    node: node.to_string(),
                    row,
                    value,
                });
            }
            let sum: f64 = chunk.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(BayesNetError::CptRowSum {
                    node: node.to_string(),
                    row,
                    sum,
                });
            }
        }
        Ok(Cpt {
            n_states,
            parent_cards,
            probs,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.parent_cards.iter().product()
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn row_index(&self, parent_states: impl IntoIterator<Item = usize>) -> usize {
        parent_states
            .into_iter()
            .zip(&self.parent_cards)
            .fold(0, |acc, (s, &card)| acc * card + s)
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.probs[row * self.n_states..(row + 1) * self.n_states]
    }
}

/// Discrete Bayesian network: a DAG, per-node state labels and CPTs.
#[derive(Debug, Clone, PartialEq)]
pub struct BayesNet {
    name: String,
    graph: CausalGraph,
    states: Vec<Vec<String>>,
    cpts: Vec<Cpt>,
}

/// Result of scoring a table on an oracle network.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LikelihoodReport {
    /// Mean of `ln P(row)`; `-inf` when any row has probability zero.
    pub mean: f64,
    /// Mean of `ln(P(row) + 1e-8)`, the convention of the usual benchmark tooling.
    pub floored_mean: f64,
    /// Rows whose probability under the network is exactly zero.
    pub zero_prob_rows: usize,
    pub n_rows: usize,
}

impl BayesNet {
    pub fn new(name: String, graph: CausalGraph, states: Vec<Vec<String>>, cpts: Vec<Cpt>) -> Result<Self, BayesNetError> {
        if states.len() != graph.len() || cpts.len() != graph.len() {
            return Err(BayesNetError::SchemaMismatch("node, state and CPT counts differ".into()));
        }
        for node in 0..graph.len() {
            let cpt = &cpts[node];
            let cards: Vec<usize> = graph.parents(node).iter().map(|&p| states[p].len()).collect();
            if cpt.n_states != states[node].len() || cpt.parent_cards != cards {
                return Err(BayesNetError::CptShape {
                    node: graph.name(node).to_string(),
                    message: "CPT shape does not match parent state counts".into(),
                });
            }
        }
        Ok(BayesNet {
            name,
            graph,
            states,
            cpts,
        })
    }

    /// Parses a BIF document (discrete subset).
    pub fn parse_bif(text: &str) -> Result<Self, BayesNetError> {
        bif::parse(text)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn graph(&self) -> &CausalGraph {
        &self.graph
    }

    pub fn states(&self, node: usize) -> &[String] {
        &self.states[node]
    }

    pub fn cpt(&self, node: usize) -> &Cpt {
        &self.cpts[node]
    }

    pub fn len(&self) -> usize {
        self.graph.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graph.is_empty()
    }

    /// Schema of sampled tables: one discrete column per node, BIF state order.
    pub fn schema(&self) -> TableSchema {
        let columns = (0..self.len())
            .map(|i| ColumnSchema::discrete(self.graph.name(i), self.states[i].clone()))
            .collect();
        TableSchema::new(columns).expect("validated network names")
    }

    /// Probability of a full assignment given as state indices in node order.
    pub fn joint_probability(&self, assignment: &[usize]) -> f64 {
        let mut p = 1.0;
        for node in 0..self.len() {
            let cpt = &self.cpts[node];
            let row = cpt.row_index(self.graph.parents(node).iter().map(|&q| assignment[q]));
            p *= cpt.row(row)[assignment[node]];
        }
        p
    }

    /// Draws `n` rows by sampling each node from its CPT row given already
    /// sampled parents, in topological order.
    pub fn ancestral_sample(&self, n: usize, seed: u64) -> Table {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut codes = (0..self.len()).map(|_| Vec::with_capacity(n)).collect::<Vec<_>>();
        let mut assignment = vec![0usize; self.len()];
        for _ in 0..n {
            for &node in self.graph.topo_order() {
                let cpt = &self.cpts[node];
                let row = cpt.row_index(self.graph.parents(node).iter().map(|&q| assignment[q]));
                assignment[node] = sample_index(cpt.row(row), rng.random::<f64>());
            }
            for (column, &s) in codes.iter_mut().zip(&assignment) {
                column.push(s);
            }
        }
        let columns = codes.into_iter().map(ColumnData::Discrete).collect();
        Table::new(self.schema(), columns).expect("sampled states are valid")
    }

    /// Mean per-record log-likelihood (nats) of `table` under the network.
    /// Columns are matched to nodes by name and cells to states by label.
    pub fn log_likelihood(&self, table: &Table) -> Result<LikelihoodReport, BayesNetError> {
        let schema = table.schema();
        if schema.len() != self.len() {
            return Err(BayesNetError::SchemaMismatch(format!(
                "table has {} columns, network has {} nodes",
                schema.len(),
                self.len()
            )));
        }
        // per node: the table column and a map from table code to network state
        let mut bindings: Vec<(usize, Vec<usize>)> = Vec::with_capacity(self.len());
        for node in 0..self.len() {
            let name = self.graph.name(node);
            let col = schema
                .index_of(name)
                .ok_or_else(|| BayesNetError::SchemaMismatch(format!("column `{name}` missing")))?;
            let lookup: HashMap<&str, usize> =
                self.states[node].iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
            let map = match (&schema.column(col).categories(), table.column(col)) {
                (Some(categories), ColumnData::Discrete(codes)) => {
                    let mut map = vec![usize::MAX; categories.len()];
                    for &code in codes {
                        if map[code] == usize::MAX {
                            map[code] = *lookup.get(categories[code].as_str()).ok_or_else(|| {
                                BayesNetError::UnknownState {
                                    column: name.to_string(),
                                    value: categories[code].clone(),
                                }
                            })?;
                        }
                    }
                    map
                }
                (_, ColumnData::Continuous(values)) => {
                    // Numeric state labels such as "0"/"1" read as numbers.
                    let mut map = Vec::with_capacity(values.len());
                    for v in values {
                        let label = format!("{v}");
                        map.push(*lookup.get(label.as_str()).ok_or(BayesNetError::UnknownState {
                            column: name.to_string(),
                            value: label,
                        })?);
                    }
                    map
                }
                _ => unreachable!("table storage matches schema"),
            };
            bindings.push((col, map));
        }

        let n = table.n_rows();
        let mut assignment = vec![0usize; self.len()];
        let mut total = 0.0;
        let mut floored = 0.0;
        let mut zero_rows = 0;
        for row in 0..n {
            for (node, (col, map)) in bindings.iter().enumerate() {
                assignment[node] = match table.column(*col) {
                    ColumnData::Discrete(codes) => map[codes[row]],
                    ColumnData::Continuous(_) => map[row],
                };
            }
            let p = self.joint_probability(&assignment);
            if p == 0.0 {
                zero_rows += 1;
            }
            total += p.ln();
            floored += (p + LIKELIHOOD_FLOOR).ln();
        }
        let denom = n.max(1) as f64;
        Ok(LikelihoodReport {
            mean: total / denom,
            floored_mean: floored / denom,
            zero_prob_rows: zero_rows,
            n_rows: n,
        })
    }

    /// Renders the network back to BIF using per-row probability entries.
    pub fn to_bif(&self) -> String {
        let mut out = format!("network {} {{\n}}\n", self.name);
        for node in 0..self.len() {
            out.push_str(&format!(
                "variable {} {{\n  type discrete [ {} ] {{ {} }};\n}}\n",
                self.graph.name(node),
                self.states[node].len(),
                self.states[node].join(", ")
            ));
        }
        for node in 0..self.len() {
            let parents = self.graph.parents(node);
            let cpt = &self.cpts[node];
            let fmt_row = |r: usize| cpt.row(r).iter().map(|p| format!("{p}")).collect::<Vec<_>>().join(", ");
            if parents.is_empty() {
                out.push_str(&format!(
                    "probability ( {} ) {{\n  table {};\n}}\n",
                    self.graph.name(node),
                    fmt_row(0)
                ));
                continue;
            }
            let names: Vec<&str> = parents.iter().map(|&p| self.graph.name(p)).collect();
            out.push_str(&format!(
                "probability ( {} | {} ) {{\n",
                self.graph.name(node),
                names.join(", ")
            ));
            for r in 0..cpt.n_rows() {
                let mut rem = r;
                let mut labels = vec![""; parents.len()];
                for (k, &p) in parents.iter().enumerate().rev() {
                    let card = self.states[p].len();
                    labels[k] = &self.states[p][rem % card];
                    rem /= card;
                }
                out.push_str(&format!("  ({}) {};\n", labels.join(", "), fmt_row(r)));
            }
            out.push_str("}\n");
        }
        out
    }
}

fn sample_index(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            last_positive = i;
            acc += p;
            if u < acc {
                return i;
            }
        }
    }
    // rows summing to slightly under 1
    last_positive
}

/// The 8-node asia network, bundled as a test and demo asset.
pub const ASIA_BIF: &str = include_str!("../../assets/asia.bif");

/// The asia structure in `.dag` form.
pub const ASIA_DAG: &str = include_str!("../../assets/asia.dag");

pub fn asia() -> BayesNet {
    BayesNet::parse_bif(ASIA_BIF).expect("bundled asia network parses")
}
