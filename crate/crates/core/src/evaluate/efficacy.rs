use std::collections::BTreeSet;

use super::models::{
    accuracy, r_squared, DecisionTree, LinearRegression, LogisticRegression, LOGISTIC_EPOCHS, LOGISTIC_LR, OLS_RIDGE,
    TREE_MAX_DEPTH,
};
use super::EvaluateError;
use crate::data::{ColumnData, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    Classification,
    Regression,
}

impl Task {
    pub fn as_str(self) -> &'static str {
        match self {
            Task::Classification => "classification",
            Task::Regression => "regression",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EfficacyReport {
    pub task: Task,
    pub target: String,
    /// Accuracy (classification) or R² (regression) per model.
    pub scores: Vec<(String, f64)>,
    pub average: f64,
}

#[derive(Debug, Clone, PartialEq)]
enum FeatureKind {
    Standardized { mean: f64, std: f64 },
    OneHot { categories: Vec<String> },
}

/// Maps feature columns to a dense design matrix: continuous columns are
/// standardized with statistics of the fitting table, discrete columns are
/// one-hot over a fixed category list.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureEncoder {
    columns: Vec<(String, FeatureKind)>,
    width: usize,
}

impl FeatureEncoder {
    /// Fits on `train`; discrete categories are the union of labels seen in
    /// `train` and `others`.
    pub fn fit(train: &Table, others: &[&Table], exclude: &str) -> Result<Self, EvaluateError> {
        let mut columns = Vec::new();
        let mut width = 0;
        for (i, col) in train.schema().columns().iter().enumerate() {
            if col.name == exclude {
                continue;
            }
            let kind = match train.column(i) {
                ColumnData::Continuous(v) => {
                    let n = v.len() as f64;
                    let mean = v.iter().sum::<f64>() / n;
                    let sd = (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
                    width += 1;
                    FeatureKind::Standardized {
                        mean,
                        std: if sd > 0.0 { sd } else { 1.0 },
                    }
                }
                ColumnData::Discrete(_) => {
                    let mut set: BTreeSet<String> = train.labels(i).expect("discrete").into_iter().map(String::from).collect();
                    for t in others {
                        let j = t.schema().index_of(&col.name).ok_or_else(|| {
                            EvaluateError::SchemaMismatch(format!("column `{}` missing from test data", col.name))
                        })?;
                        let labels = t.labels(j).ok_or_else(|| {
                            EvaluateError::SchemaMismatch(format!("column `{}` is continuous in test data", col.name))
                        })?;
                        set.extend(labels.into_iter().map(String::from));
                    }
                    width += set.len();
                    FeatureKind::OneHot {
                        categories: set.into_iter().collect(),
                    }
                }
            };
            columns.push((col.name.clone(), kind));
        }
        Ok(FeatureEncoder { columns, width })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Row-major `n × width` features, columns bound by name.
    pub fn transform(&self, table: &Table) -> Result<Vec<f64>, EvaluateError> {
        let n = table.n_rows();
        let mut x = vec![0.0; n * self.width];
        let mut offset = 0;
        for (name, kind) in &self.columns {
            let j = table
                .schema()
                .index_of(name)
                .ok_or_else(|| EvaluateError::SchemaMismatch(format!("column `{name}` missing")))?;
            match (kind, table.column(j)) {
                (FeatureKind::Standardized { mean, std }, ColumnData::Continuous(v)) => {
                    for (r, val) in v.iter().enumerate() {
                        x[r * self.width + offset] = (val - mean) / std;
                    }
                    offset += 1;
                }
                (FeatureKind::OneHot { categories }, ColumnData::Discrete(_)) => {
                    for (r, label) in table.labels(j).expect("discrete").into_iter().enumerate() {
                        // Labels outside the fitted list leave an all-zero block.
                        if let Ok(k) = categories.binary_search_by(|c| c.as_str().cmp(label)) {
                            x[r * self.width + offset + k] = 1.0;
                        }
                    }
                    offset += categories.len();
                }
                _ => {
                    return Err(EvaluateError::SchemaMismatch(format!(
                        "column `{name}` changed type between tables"
                    )))
                }
            }
        }
        Ok(x)
    }
}

/// Trains every built-in model on `synth` and scores it on `real_test`.
/// The task follows the target's column type.
pub fn ml_efficacy(synth: &Table, real_test: &Table, target: &str) -> Result<EfficacyReport, EvaluateError> {
    let missing = |which: &str| EvaluateError::SchemaMismatch(format!("target `{target}` missing from {which} data"));
    let ts = synth.schema().index_of(target).ok_or_else(|| missing("synthetic"))?;
    let tr = real_test.schema().index_of(target).ok_or_else(|| missing("test"))?;
    let encoder = FeatureEncoder::fit(synth, &[real_test], target)?;
    if encoder.width() == 0 {
        return Err(EvaluateError::SchemaMismatch("no feature columns besides the target".into()));
    }
    let f = encoder.width();
    let x_train = encoder.transform(synth)?;
    let x_test = encoder.transform(real_test)?;

    let (task, scores) = match (synth.column(ts), real_test.column(tr)) {
        (ColumnData::Discrete(_), ColumnData::Discrete(_)) => {
            let train_labels = synth.labels(ts).expect("discrete");
            let test_labels = real_test.labels(tr).expect("discrete");
            let classes: Vec<&str> = train_labels
                .iter()
                .chain(&test_labels)
                .copied()
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect();
            let index = |l: &&str| classes.binary_search(l).expect("label in union");
            let y_train: Vec<usize> = train_labels.iter().map(index).collect();
            let y_test: Vec<usize> = test_labels.iter().map(index).collect();
            if y_train.iter().collect::<BTreeSet<_>>().len() < 2 {
                return Err(EvaluateError::SingleClass(target.to_string()));
            }
            let k = classes.len();
            let tree = DecisionTree::fit_classifier(&x_train, f, &y_train, k, TREE_MAX_DEPTH);
            let logit = LogisticRegression::fit(&x_train, f, &y_train, k, LOGISTIC_EPOCHS, LOGISTIC_LR);
            (
                Task::Classification,
                vec![
                    ("decision_tree".to_string(), accuracy(&tree.predict_classes(&x_test), &y_test)),
                    ("logistic_regression".to_string(), accuracy(&logit.predict_classes(&x_test), &y_test)),
                ],
            )
        }
        (ColumnData::Continuous(y_train), ColumnData::Continuous(y_test)) => {
            let ols = LinearRegression::fit(&x_train, f, y_train, OLS_RIDGE);
            let tree = DecisionTree::fit_regressor(&x_train, f, y_train, TREE_MAX_DEPTH);
            (
                Task::Regression,
                vec![
                    ("linear_regression".to_string(), r_squared(&ols.predict(&x_test), y_test)),
                    ("regression_tree".to_string(), r_squared(&tree.predict(&x_test), y_test)),
                ],
            )
        }
        _ => {
            return Err(EvaluateError::SchemaMismatch(format!(
                "target `{target}` changed type between tables"
            )))
        }
    };
    let average = scores.iter().map(|s| s.1).sum::<f64>() / scores.len() as f64;
    Ok(EfficacyReport {
        task,
        target: target.to_string(),
        scores,
        average,
    })
}
