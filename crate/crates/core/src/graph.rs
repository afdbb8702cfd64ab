//! Directed acyclic graphs over table columns.
//!
//! A [`CausalGraph`] owns the node names, each node's parent list and a cached
//! topological order. Every constructor validates acyclicity, so holding a
//! `CausalGraph` is proof that parents can always be evaluated before children.
//!
//! The text format (`.dag`) is one edge per line, `src -> dst`, with `#`
//! comments and optional standalone lines naming isolated nodes.

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("cycle detected through node `{node}`")]
    Cycle { node: String },
    #[error("syntax error on line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("duplicate edge `{from} -> {to}`")]
    DuplicateEdge { from: String, to: String },
    #[error("duplicate node name `{0}`")]
    DuplicateNode(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("node index {index} out of range for graph with {len} nodes")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("graph nodes do not match columns: {0}")]
    SchemaMismatch(String),
}

/// A validated DAG. Immutable after construction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GraphRepr", into = "GraphRepr")]
pub struct CausalGraph {
    names: Vec<String>,
    parents: Vec<Vec<usize>>,
    topo: Vec<usize>,
}

/// Serialized shape: names plus `(parent, child)` index pairs.
#[derive(Serialize, Deserialize)]
struct GraphRepr {
    nodes: Vec<String>,
    edges: Vec<(usize, usize)>,
}

impl TryFrom<GraphRepr> for CausalGraph {
    type Error = GraphError;

    fn try_from(repr: GraphRepr) -> Result<Self, Self::Error> {
        CausalGraph::from_edges(repr.nodes, &repr.edges)
    }
}

impl From<CausalGraph> for GraphRepr {
    fn from(graph: CausalGraph) -> Self {
        GraphRepr {
            edges: graph.edges(),
            nodes: graph.names,
        }
    }
}

impl CausalGraph {
    /// Graph with the given nodes and no edges.
    pub fn empty(names: Vec<String>) -> Result<Self, GraphError> {
        Self::from_edges(names, &[])
    }

    /// Builds a graph from `(parent, child)` index pairs.
    pub fn from_edges(names: Vec<String>, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut parents = vec![Vec::new(); names.len()];
        for &(from, to) in edges {
            for index in [from, to] {
                if index >= names.len() {
                    return Err(GraphError::IndexOutOfRange {
                        index,
                        len: names.len(),
                    });
                }
            }
            parents[to].push(from);
        }
        Self::from_parents(names, parents)
    }

    /// Builds a graph from per-node parent lists. Parent order is preserved;
    /// it determines how a node's inputs are laid out downstream.
    pub fn from_parents(names: Vec<String>, parents: Vec<Vec<usize>>) -> Result<Self, GraphError> {
        let mut seen = HashSet::new();
        for name in &names {
            if !seen.insert(name.as_str()) {
                return Err(GraphError::DuplicateNode(name.clone()));
            }
        }
        if parents.len() != names.len() {
            return Err(GraphError::IndexOutOfRange {
                index: parents.len(),
                len: names.len(),
            });
        }
        for (child, list) in parents.iter().enumerate() {
            let mut local = HashSet::new();
            for &p in list {
                if p >= names.len() {
                    return Err(GraphError::IndexOutOfRange {
                        index: p,
                        len: names.len(),
                    });
                }
                if p == child {
                    return Err(GraphError::Cycle {
                        node: names[child].clone(),
                    });
                }
                if !local.insert(p) {
                    return Err(GraphError::DuplicateEdge {
                        from: names[p].clone(),
                        to: names[child].clone(),
                    });
                }
            }
        }
        let topo = topological_order(&parents).map_err(|node| GraphError::Cycle {
            node: names[node].clone(),
        })?;
        Ok(CausalGraph {
            names,
            parents,
            topo,
        })
    }

    /// Parses the `.dag` edge-list format.
    pub fn parse(text: &str) -> Result<Self, GraphError> {
        let mut names: Vec<String> = Vec::new();
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut edges: Vec<(usize, usize)> = Vec::new();
        let mut edge_set = HashSet::new();

        let mut intern = |name: &str, names: &mut Vec<String>| -> usize {
            if let Some(&i) = index.get(name) {
                return i;
            }
            names.push(name.to_string());
            index.insert(name.to_string(), names.len() - 1);
            names.len() - 1
        };

        for (lineno, raw) in text.lines().enumerate() {
            let line_no = lineno + 1;
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split("->").map(str::trim).collect();
            match parts.as_slice() {
                [single] => {
                    validate_name(single, line_no)?;
                    intern(single, &mut names);
                }
                [from, to] => {
                    validate_name(from, line_no)?;
                    validate_name(to, line_no)?;
                    let f = intern(from, &mut names);
                    let t = intern(to, &mut names);
                    if f == t {
                        return Err(GraphError::Cycle {
                            node: from.to_string(),
                        });
                    }
                    if !edge_set.insert((f, t)) {
                        return Err(GraphError::DuplicateEdge {
                            from: from.to_string(),
                            to: to.to_string(),
                        });
                    }
                    edges.push((f, t));
                }
                _ => {
                    return Err(GraphError::Syntax {
                        line: line_no,
                        message: "expected `src -> dst` or a single node name".into(),
                    })
                }
            }
        }
        Self::from_edges(names, &edges)
    }

    /// Renders the graph in the `.dag` format. Every node is listed on its own
    /// line first so that node order survives a reparse.
    pub fn to_dag_string(&self) -> String {
        let mut out = String::new();
        for name in &self.names {
            out.push_str(name);
            out.push('\n');
        }
        for (from, to) in self.edges() {
            out.push_str(&format!("{} -> {}\n", self.names[from], self.names[to]));
        }
        out
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, node: usize) -> &str {
        &self.names[node]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn parents(&self, node: usize) -> &[usize] {
        &self.parents[node]
    }

    pub fn children(&self, node: usize) -> Vec<usize> {
        (0..self.len())
            .filter(|&c| self.parents[c].contains(&node))
            .collect()
    }

    /// Cached topological order: parents always precede children.
    pub fn topo_order(&self) -> &[usize] {
        &self.topo
    }

    /// All `(parent, child)` pairs, ordered by child then parent position.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.parents
            .iter()
            .enumerate()
            .flat_map(|(child, ps)| ps.iter().map(move |&p| (p, child)))
            .collect()
    }

    pub fn n_edges(&self) -> usize {
        self.parents.iter().map(Vec::len).sum()
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.parents[to].contains(&from)
    }

    /// `mask[j]` is true when `j` is a proper ancestor of `node`.
    pub fn ancestors(&self, node: usize) -> Vec<bool> {
        let mut mask = vec![false; self.len()];
        let mut stack: Vec<usize> = self.parents[node].clone();
        while let Some(p) = stack.pop() {
            if !mask[p] {
                mask[p] = true;
                stack.extend_from_slice(&self.parents[p]);
            }
        }
        mask
    }

    /// `mask[j]` is true when `j` is a proper descendant of `node`.
    pub fn descendants(&self, node: usize) -> Vec<bool> {
        (0..self.len())
            .map(|j| j != node && self.ancestors(j)[node])
            .collect()
    }

    /// Re-indexes the graph so node `i` is `columns[i]`. Matching is by exact
    /// name and ignores order; the node sets must be identical.
    pub fn bind_to(&self, columns: &[String]) -> Result<CausalGraph, GraphError> {
        if columns.len() != self.len() {
            return Err(GraphError::SchemaMismatch(format!(
                "graph has {} nodes, table has {} columns",
                self.len(),
                columns.len()
            )));
        }
        let mut remap = vec![0usize; self.len()];
        for (new_index, column) in columns.iter().enumerate() {
            let old = self.index_of(column).ok_or_else(|| {
                GraphError::SchemaMismatch(format!("column `{column}` is not a graph node"))
            })?;
            remap[old] = new_index;
        }
        let mut parents = vec![Vec::new(); self.len()];
        for old in 0..self.len() {
            parents[remap[old]] = self.parents[old].iter().map(|&p| remap[p]).collect();
        }
        CausalGraph::from_parents(columns.to_vec(), parents)
    }
}

impl fmt::Display for CausalGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_dag_string())
    }
}

fn validate_name(name: &str, line: usize) -> Result<(), GraphError> {
    if name.is_empty() {
        return Err(GraphError::Syntax {
            line,
            message: "empty node name".into(),
        });
    }
    Ok(())
}

/// Layered Kahn sort over parent lists. Each layer (nodes whose parents are all
/// placed) is emitted in ascending index order. On failure returns the index of
/// a node that lies on a directed cycle.
pub fn topological_order(parents: &[Vec<usize>]) -> Result<Vec<usize>, usize> {
    let n = parents.len();
    let mut children = vec![Vec::new(); n];
    let mut indegree = vec![0usize; n];
    for (child, ps) in parents.iter().enumerate() {
        indegree[child] = ps.len();
        for &p in ps {
            children[p].push(child);
        }
    }
    let mut order = Vec::with_capacity(n);
    let mut layer: Vec<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
    while !layer.is_empty() {
        let mut next = Vec::new();
        for &node in &layer {
            order.push(node);
            for &c in &children[node] {
                indegree[c] -= 1;
                if indegree[c] == 0 {
                    next.push(c);
                }
            }
        }
        next.sort_unstable();
        layer = next;
    }
    if order.len() == n {
        return Ok(order);
    }
    // Every unplaced node has an unplaced parent; walking parents must revisit a node.
    let start = (0..n).find(|&i| indegree[i] > 0).expect("unplaced node");
    let mut visited = vec![false; n];
    let mut node = start;
    while !visited[node] {
        visited[node] = true;
        node = *parents[node]
            .iter()
            .find(|&&p| indegree[p] > 0)
            .expect("unplaced node has an unplaced parent");
    }
    Err(node)
}
