//! Causal structure estimation for tables without a known graph: a surrogate
//! correlation matrix over mixed column types, the PC skeleton search with
//! Fisher-z tests, orientation (v-structures plus Meek rules) and extension of
//! the resulting CPDAG to a DAG.

mod correlation;
mod orient;
mod skeleton;

pub use correlation::{repair_psd, surrogate_correlation, SurrogateCorrelation, PSD_EIGEN_FLOOR};
pub use orient::{apply_meek_rules, cpdag_to_dag, orient, Cpdag, DagExtension};
pub use skeleton::{fisher_z_pvalue, partial_correlation, pc_skeleton, Skeleton};

use std::fmt::Write;

use thiserror::Error;

use crate::data::Table;
use crate::graph::CausalGraph;

pub const DEFAULT_ALPHA: f64 = 0.01;
pub const DEFAULT_MAX_COND: usize = 3;

#[derive(Debug, Error)]
pub enum DiscoveryError {
    #[error("column `{0}` has zero variance")]
    DegenerateColumn(String),
    #[error("need at least 10 rows for discovery, got {0}")]
    TooFewRows(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Everything produced by one discovery run.
#[derive(Debug, Clone)]
pub struct Discovery {
    pub correlation: SurrogateCorrelation,
    pub skeleton: Skeleton,
    pub cpdag: Cpdag,
    pub dag: CausalGraph,
    pub fallback: bool,
}

/// Runs the full pipeline: correlation, skeleton, orientation, extension.
pub fn discover(table: &Table, alpha: f64, max_cond: usize) -> Result<Discovery, DiscoveryError> {
    let correlation = surrogate_correlation(table)?;
    let skeleton = pc_skeleton(&correlation, alpha, max_cond)?;
    let cpdag = orient(&skeleton);
    let DagExtension { dag, fallback } = cpdag_to_dag(&cpdag);
    Ok(Discovery {
        correlation,
        skeleton,
        cpdag,
        dag,
        fallback,
    })
}

impl Discovery {
    /// Plain-text log: parameters, tests run, sepsets, orientations, warnings.
    pub fn report(&self, alpha: f64, max_cond: usize) -> String {
        let names = &self.cpdag.names;
        let mut out = String::new();
        let _ = writeln!(out, "alpha: {alpha}");
        let _ = writeln!(out, "max_cond: {max_cond}");
        let _ = writeln!(out, "rows: {}", self.correlation.n);
        let _ = writeln!(out, "columns: {}", names.len());
        let _ = writeln!(out, "min_eigenvalue_before_repair: {:.6e}", self.correlation.min_eigenvalue_before_repair);
        let _ = writeln!(out, "tests_run: {}", self.skeleton.tests_run);
        let _ = writeln!(out, "singular_tests: {}", self.skeleton.singular_tests);
        let _ = writeln!(out, "skeleton_edges: {}", self.skeleton.edges().len());
        let _ = writeln!(out, "extension_fallback: {}", self.fallback);
        let _ = writeln!(out, "\n[sepsets]");
        for (&(a, b), set) in &self.skeleton.sepsets {
            let labels: Vec<&str> = set.iter().map(|&c| names[c].as_str()).collect();
            let _ = writeln!(out, "{} _||_ {} | {{{}}}", names[a], names[b], labels.join(", "));
        }
        let _ = writeln!(out, "\n[v-structures]");
        for &(a, c, b) in &self.cpdag.v_structures {
            let _ = writeln!(out, "{} -> {} <- {}", names[a], names[c], names[b]);
        }
        let _ = writeln!(out, "\n[cpdag]");
        for (a, b) in self.cpdag.directed_edges() {
            let _ = writeln!(out, "{} -> {}", names[a], names[b]);
        }
        for (a, b) in self.cpdag.undirected_edges() {
            let _ = writeln!(out, "{} -- {}", names[a], names[b]);
        }
        let _ = writeln!(out, "\n[warnings]");
        for &(a, b) in &self.cpdag.conflicts {
            let _ = writeln!(out, "conflicting collider orientations on {} -- {}", names[a], names[b]);
        }
        if self.skeleton.singular_tests > 0 {
            let _ = writeln!(out, "{} tests had singular conditioning sets", self.skeleton.singular_tests);
        }
        if self.fallback {
            let _ = writeln!(out, "no consistent DAG extension; fallback ordering used");
        }
        out
    }
}
