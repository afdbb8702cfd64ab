use nalgebra::{DMatrix, SymmetricEigen};

use super::DiscoveryError;
use crate::data::{ColumnData, Table};

/// Eigenvalue floor used when repairing the matrix to be positive semidefinite.
pub const PSD_EIGEN_FLOOR: f64 = 1e-6;

/// Correlation-like matrix over mixed-type columns.
#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateCorrelation {
    pub names: Vec<String>,
    pub matrix: DMatrix<f64>,
    pub n: usize,
    /// Smallest eigenvalue before the PSD repair.
    pub min_eigenvalue_before_repair: f64,
}

impl SurrogateCorrelation {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix[(i, j)]
    }

    /// Wraps an existing correlation matrix (e.g. a known population matrix).
    pub fn from_matrix(names: Vec<String>, matrix: DMatrix<f64>, n: usize) -> Self {
        let min = SymmetricEigen::new(matrix.clone()).eigenvalues.min();
        SurrogateCorrelation {
            names,
            matrix,
            n,
            min_eigenvalue_before_repair: min,
        }
    }
}

/// Column embedding: continuous columns as z-scores, discrete columns as
/// centered indicators of every observed category but the first.
fn embed(table: &Table, col: usize) -> Result<DMatrix<f64>, DiscoveryError> {
    let n = table.n_rows();
    let name = &table.schema().column(col).name;
    match table.column(col) {
        ColumnData::Continuous(values) => {
            let mean = values.iter().sum::<f64>() / n as f64;
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
            if !(var > 0.0) {
                return Err(DiscoveryError::DegenerateColumn(name.clone()));
            }
            let sd = var.sqrt();
            Ok(DMatrix::from_iterator(n, 1, values.iter().map(|v| (v - mean) / sd)))
        }
        ColumnData::Discrete(codes) => {
            let k = table.schema().column(col).categories().expect("discrete").len();
            let mut counts = vec![0usize; k];
            for &c in codes {
                counts[c] += 1;
            }
            let observed: Vec<usize> = (0..k).filter(|&c| counts[c] > 0).collect();
            if observed.len() < 2 {
                return Err(DiscoveryError::DegenerateColumn(name.clone()));
            }
            let kept = &observed[1..];
            let mut m = DMatrix::zeros(n, kept.len());
            for (j, &cat) in kept.iter().enumerate() {
                let freq = counts[cat] as f64 / n as f64;
                for (r, &c) in codes.iter().enumerate() {
                    m[(r, j)] = if c == cat { 1.0 } else { 0.0 } - freq;
                }
            }
            Ok(m)
        }
    }
}

/// Inverse square root of a covariance matrix, dropping null directions.
fn inv_sqrt(cov: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(cov.clone());
    let max = eig.eigenvalues.max().max(0.0);
    let tol = 1e-10 * max.max(f64::MIN_POSITIVE);
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| if l > tol { 1.0 / l.sqrt() } else { 0.0 }));
    &eig.eigenvectors * d * eig.eigenvectors.transpose()
}

/// Largest canonical correlation between two embeddings; signed Pearson
/// correlation when both are one-dimensional.
fn association(x: &DMatrix<f64>, y: &DMatrix<f64>) -> f64 {
    let n = x.nrows() as f64;
    let sxy = x.transpose() * y / n;
    if x.ncols() == 1 && y.ncols() == 1 {
        let sxx = x.column(0).norm_squared() / n;
        let syy = y.column(0).norm_squared() / n;
        return (sxy[(0, 0)] / (sxx * syy).sqrt()).clamp(-1.0, 1.0);
    }
    let sxx = x.transpose() * x / n;
    let syy = y.transpose() * y / n;
    let m = inv_sqrt(&sxx) * sxy * inv_sqrt(&syy);
    let sv = m.singular_values();
    sv.max().clamp(0.0, 1.0)
}

/// Pairwise association matrix for a mixed-type table, repaired to the
/// nearest positive semidefinite matrix with unit diagonal.
pub fn surrogate_correlation(table: &Table) -> Result<SurrogateCorrelation, DiscoveryError> {
    let n = table.n_rows();
    if n < 10 {
        return Err(DiscoveryError::TooFewRows(n));
    }
    let d = table.n_cols();
    let embeddings: Vec<DMatrix<f64>> = (0..d).map(|c| embed(table, c)).collect::<Result<_, _>>()?;
    let mut raw = DMatrix::identity(d, d);
    for i in 0..d {
        for j in i + 1..d {
            let r = association(&embeddings[i], &embeddings[j]);
            raw[(i, j)] = r;
            raw[(j, i)] = r;
        }
    }
    let (matrix, min_eig) = repair_psd(&raw);
    Ok(SurrogateCorrelation {
        names: table.schema().names(),
        matrix,
        n,
        min_eigenvalue_before_repair: min_eig,
    })
}

/// Clips eigenvalues at [`PSD_EIGEN_FLOOR`], rescales to unit diagonal and
/// re-symmetrizes. Returns the repaired matrix and the original minimum eigenvalue.
pub fn repair_psd(raw: &DMatrix<f64>) -> (DMatrix<f64>, f64) {
    let d = raw.nrows();
    let eig = SymmetricEigen::new(raw.clone());
    let min_eig = eig.eigenvalues.min();
    let clipped = eig.eigenvalues.map(|l| l.max(PSD_EIGEN_FLOOR));
    let rebuilt = &eig.eigenvectors * DMatrix::from_diagonal(&clipped) * eig.eigenvectors.transpose();
    let mut out = DMatrix::identity(d, d);
    for i in 0..d {
        for j in i + 1..d {
            let v = 0.5 * (rebuilt[(i, j)] + rebuilt[(j, i)]) / (rebuilt[(i, i)] * rebuilt[(j, j)]).sqrt();
            let v = v.clamp(-1.0, 1.0);
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    (out, min_eig)
}
