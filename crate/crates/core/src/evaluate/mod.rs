//! Synthetic-data quality metrics: column-wise KS and chi-squared similarity,
//! oracle likelihood under a known Bayesian network, and machine-learning
//! efficacy (train on synthetic, test on real).

mod efficacy;
pub mod models;

pub use efficacy::{ml_efficacy, EfficacyReport, FeatureEncoder, Task};

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write;
use std::hash::Hash;

use serde_json::json;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use thiserror::Error;

use crate::bayes_net::{BayesNet, BayesNetError, LikelihoodReport};
use crate::data::{ColumnData, Table};

#[derive(Debug, Error)]
pub enum EvaluateError {
    #[error("column `{0}` is empty")]
    EmptyColumn(String),
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("target `{0}` has a single class in the training data")]
    SingleClass(String),
    #[error(transparent)]
    Oracle(#[from] BayesNetError),
}

/// `1 - D` where `D` is the two-sample Kolmogorov-Smirnov statistic.
pub fn ks_score(real: &[f64], synth: &[f64]) -> Result<f64, EvaluateError> {
    if real.is_empty() || synth.is_empty() {
        return Err(EvaluateError::EmptyColumn(String::new()));
    }
    let mut a = real.to_vec();
    let mut b = synth.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = if a[i] <= b[j] { a[i] } else { b[j] };
        while i < a.len() && a[i] == x {
            i += 1;
        }
        while j < b.len() && b[j] == x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok((1.0 - d).clamp(0.0, 1.0))
}

/// p-value of Pearson's chi-squared homogeneity test between two samples of
/// labels, over the union of observed categories.
pub fn cs_score<T: Eq + Hash + Ord + Clone>(real: &[T], synth: &[T]) -> Result<f64, EvaluateError> {
    if real.is_empty() || synth.is_empty() {
        return Err(EvaluateError::EmptyColumn(String::new()));
    }
    let mut counts: BTreeMap<T, [f64; 2]> = BTreeMap::new();
    for v in real {
        counts.entry(v.clone()).or_default()[0] += 1.0;
    }
    for v in synth {
        counts.entry(v.clone()).or_default()[1] += 1.0;
    }
    let totals = [real.len() as f64, synth.len() as f64];
    let n = totals[0] + totals[1];
    let mut stat = 0.0;
    for c in counts.values() {
        let pooled = c[0] + c[1];
        for s in 0..2 {
            let expected = totals[s] * pooled / n;
            stat += (c[s] - expected).powi(2) / expected;
        }
    }
    let dof = counts.len() - 1;
    if dof == 0 || stat == 0.0 {
        return Ok(1.0);
    }
    let dist = ChiSquared::new(dof as f64).expect("positive degrees of freedom");
    Ok(dist.sf(stat).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Ks,
    Cs,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Ks => "ks",
            Metric::Cs => "cs",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityReport {
    /// In schema order.
    pub columns: Vec<(String, Metric, f64)>,
    pub ks_average: Option<f64>,
    pub cs_average: Option<f64>,
}

fn check_schemas(real: &Table, synth: &Table) -> Result<(), EvaluateError> {
    let (rs, ss) = (real.schema(), synth.schema());
    if rs.len() != ss.len() {
        return Err(EvaluateError::SchemaMismatch(format!(
            "real has {} columns, synthetic has {}",
            rs.len(),
            ss.len()
        )));
    }
    for col in rs.columns() {
        let other = ss
            .index_of(&col.name)
            .map(|i| ss.column(i))
            .ok_or_else(|| EvaluateError::SchemaMismatch(format!("synthetic data lacks column `{}`", col.name)))?;
        if other.is_continuous() != col.is_continuous() {
            return Err(EvaluateError::SchemaMismatch(format!(
                "column `{}` is continuous in one table and discrete in the other",
                col.name
            )));
        }
    }
    Ok(())
}

/// KS for continuous columns and CS (compared by label) for discrete ones,
/// matching columns by name.
pub fn similarity(real: &Table, synth: &Table) -> Result<SimilarityReport, EvaluateError> {
    check_schemas(real, synth)?;
    let mut columns = Vec::new();
    for (i, col) in real.schema().columns().iter().enumerate() {
        let j = synth.schema().index_of(&col.name).expect("checked");
        let named = |e: EvaluateError| match e {
            EvaluateError::EmptyColumn(_) => EvaluateError::EmptyColumn(col.name.clone()),
            other => other,
        };
        let (metric, score) = match (real.column(i), synth.column(j)) {
            (ColumnData::Continuous(a), ColumnData::Continuous(b)) => (Metric::Ks, ks_score(a, b).map_err(named)?),
            _ => {
                let a = real.labels(i).expect("discrete");
                let b = synth.labels(j).expect("discrete");
                (Metric::Cs, cs_score(&a, &b).map_err(named)?)
            }
        };
        columns.push((col.name.clone(), metric, score));
    }
    let average = |m: Metric| {
        let v: Vec<f64> = columns.iter().filter(|c| c.1 == m).map(|c| c.2).collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    };
    Ok(SimilarityReport {
        ks_average: average(Metric::Ks),
        cs_average: average(Metric::Cs),
        columns,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub n_real: usize,
    pub n_synth: usize,
    pub similarity: SimilarityReport,
    pub oracle: Option<LikelihoodReport>,
    pub efficacy: Option<EfficacyReport>,
}

/// Similarity always; oracle likelihood of `synth` when an oracle is given;
/// efficacy (train on `synth`, test on `real`) when a target is given.
pub fn evaluate_pipeline(
    real: &Table,
    synth: &Table,
    oracle: Option<&BayesNet>,
    target: Option<&str>,
) -> Result<EvaluationReport, EvaluateError> {
    let similarity = similarity(real, synth)?;
    let oracle = oracle.map(|bn| bn.log_likelihood(synth)).transpose()?;
    let efficacy = target.map(|t| ml_efficacy(synth, real, t)).transpose()?;
    Ok(EvaluationReport {
        n_real: real.n_rows(),
        n_synth: synth.n_rows(),
        similarity,
        oracle,
        efficacy,
    })
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.6}"))
}

impl EvaluationReport {
    pub fn efficacy_average(&self) -> Option<f64> {
        self.efficacy.as_ref().map(|e| e.average)
    }

    /// `key: value` text blocks.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "[summary]");
        let _ = writeln!(out, "real_rows: {}", self.n_real);
        let _ = writeln!(out, "synthetic_rows: {}", self.n_synth);
        let _ = writeln!(out, "ks_avg: {}", opt(self.similarity.ks_average));
        let _ = writeln!(out, "cs_avg: {}", opt(self.similarity.cs_average));
        let _ = writeln!(out, "oracle_ll: {}", opt(self.oracle.as_ref().map(|o| o.floored_mean)));
        let _ = writeln!(out, "efficacy_avg: {}", opt(self.efficacy_average()));
        let _ = writeln!(out, "\n[columns]");
        for (name, metric, score) in &self.similarity.columns {
            let _ = writeln!(out, "{name}: {} {score:.6}", metric.as_str());
        }
        if let Some(o) = &self.oracle {
            let _ = writeln!(out, "\n[oracle]");
            let _ = writeln!(out, "mean_log_likelihood: {}", o.mean);
            let _ = writeln!(out, "floored_mean_log_likelihood: {:.6}", o.floored_mean);
            let _ = writeln!(out, "zero_probability_rows: {}", o.zero_prob_rows);
        }
        if let Some(e) = &self.efficacy {
            let _ = writeln!(out, "\n[efficacy]");
            let _ = writeln!(out, "task: {}", e.task.as_str());
            let _ = writeln!(out, "target: {}", e.target);
            for (model, score) in &e.scores {
                let _ = writeln!(out, "{model}: {score:.6}");
            }
        }
        out
    }

    /// JSON object with fixed top-level keys `ks_avg`, `cs_avg`, `oracle_ll`,
    /// `efficacy_avg`, `columns` and `models` (missing values are `null`).
    pub fn to_json(&self) -> serde_json::Value {
        let columns: serde_json::Map<String, serde_json::Value> = self
            .similarity
            .columns
            .iter()
            .map(|(name, metric, score)| (name.clone(), json!({ "metric": metric.as_str(), "score": score })))
            .collect();
        let models: HashMap<&str, f64> = self
            .efficacy
            .iter()
            .flat_map(|e| e.scores.iter().map(|(k, v)| (k.as_str(), *v)))
            .collect();
        json!({
            "ks_avg": self.similarity.ks_average,
            "cs_avg": self.similarity.cs_average,
            "oracle_ll": self.oracle.as_ref().map(|o| o.floored_mean),
            "oracle_ll_strict": self.oracle.as_ref().map(|o| o.mean).filter(|m| m.is_finite()),
            "oracle_zero_probability_rows": self.oracle.as_ref().map(|o| o.zero_prob_rows),
            "efficacy_avg": self.efficacy_average(),
            "efficacy_task": self.efficacy.as_ref().map(|e| e.task.as_str()),
            "efficacy_target": self.efficacy.as_ref().map(|e| e.target.clone()),
            "columns": columns,
            "models": models,
            "real_rows": self.n_real,
            "synthetic_rows": self.n_synth,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ks_extremes() {
        let a = [1.0, 2.0, 3.0];
        assert_eq!(ks_score(&a, &a).unwrap(), 1.0);
        assert_eq!(ks_score(&[0.0; 4], &[1.0; 4]).unwrap(), 0.0);
        assert!(ks_score(&[], &a).is_err());
    }

    #[test]
    fn ks_handles_ties() {
        // F_a jumps to 1 at 0; F_b is 0.5 at 0 and 1 at 1.
        assert!((ks_score(&[0.0, 0.0], &[0.0, 1.0]).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn cs_identical_and_disjoint() {
        let a = ["x", "y", "y"];
        assert_eq!(cs_score(&a, &a).unwrap(), 1.0);
        let r = vec!["a"; 5000];
        let s = vec!["b"; 5000];
        assert!(cs_score(&r, &s).unwrap() < 1e-12);
    }

    #[test]
    fn cs_reference_value() {
        // [30, 20] vs [20, 30]: chi2 = 4.0, dof 1, p = 0.0455003 (scipy)
        let mut r = vec!["a"; 30];
        r.extend(vec!["b"; 20]);
        let mut s = vec!["a"; 20];
        s.extend(vec!["b"; 30]);
        assert!((cs_score(&r, &s).unwrap() - 0.045_500_26).abs() < 1e-7);
    }
}
