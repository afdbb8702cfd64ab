//! Reversible encoding of tables into the real matrix consumed by the GAN.
//!
//! Continuous columns use mode-specific normalization: a Gaussian mixture is
//! fitted per column, each value picks a mode by sampling its responsibilities,
//! and is stored as `clamp((x - μ_m) / (4σ_m), -1, 1)` followed by a one-hot
//! of `m`. Discrete columns are one-hot encoded.

mod gmm;

pub use gmm::{GmmFit, GmmModel, EM_TOLERANCE, MAX_EM_ITERATIONS, PRUNE_WEIGHT};

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{ColumnData, ColumnKind, ColumnSchema, DataError, Table, TableSchema};
use crate::nn::{argmax, Matrix};

pub const DEFAULT_K_MAX: usize = 10;
/// Divisor applied to the component std when normalizing.
pub const STD_MULTIPLIER: f64 = 4.0;

#[derive(Debug, Error)]
pub enum TransformError {
    #[error("degenerate column: {0}")]
    DegenerateColumn(String),
    #[error("value `{value}` is not a known category of `{column}`")]
    UnknownCategory { column: String, value: String },
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("invalid column spans: {0}")]
    Span(String),
    #[error(transparent)]
    Data(#[from] DataError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CodecKind {
    Continuous { gmm: GmmModel },
    Discrete { categories: Vec<String> },
}

/// Encoding of one column and its `(offset, width)` span in the encoded row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnCodec {
    pub name: String,
    pub kind: CodecKind,
    pub offset: usize,
    pub width: usize,
}

impl ColumnCodec {
    fn expected_width(kind: &CodecKind) -> usize {
        match kind {
            CodecKind::Continuous { gmm } => 1 + gmm.k(),
            CodecKind::Discrete { categories } => categories.len(),
        }
    }

    pub fn is_continuous(&self) -> bool {
        matches!(self.kind, CodecKind::Continuous { .. })
    }

    /// Column range of the one-hot block: the mode block for continuous
    /// columns, the whole span for discrete ones.
    pub fn one_hot_range(&self) -> std::ops::Range<usize> {
        match self.kind {
            CodecKind::Continuous { .. } => self.offset + 1..self.offset + self.width,
            CodecKind::Discrete { .. } => self.offset..self.offset + self.width,
        }
    }

    fn schema(&self) -> ColumnSchema {
        match &self.kind {
            CodecKind::Continuous { .. } => ColumnSchema::continuous(&self.name),
            CodecKind::Discrete { categories } => ColumnSchema::discrete(&self.name, categories.clone()),
        }
    }
}

/// Ordered codecs whose spans tile `[0, width)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<ColumnCodec>", into = "Vec<ColumnCodec>")]
pub struct TableCodec {
    codecs: Vec<ColumnCodec>,
    width: usize,
}

impl TryFrom<Vec<ColumnCodec>> for TableCodec {
    type Error = TransformError;

    fn try_from(codecs: Vec<ColumnCodec>) -> Result<Self, Self::Error> {
        TableCodec::new(codecs)
    }
}

impl From<TableCodec> for Vec<ColumnCodec> {
    fn from(codec: TableCodec) -> Self {
        codec.codecs
    }
}

/// Encoded table plus the codecs needed to invert it.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedMatrix {
    pub data: Matrix,
    pub codec: TableCodec,
}

impl TableCodec {
    /// Validates that spans are contiguous from zero and match each kind's width.
    pub fn new(codecs: Vec<ColumnCodec>) -> Result<Self, TransformError> {
        let mut offset = 0;
        for c in &codecs {
            if c.offset != offset {
                return Err(TransformError::Span(format!(
                    "`{}` starts at {} but previous span ends at {offset}",
                    c.name, c.offset
                )));
            }
            let expected = ColumnCodec::expected_width(&c.kind);
            if c.width != expected || c.width == 0 {
                return Err(TransformError::Span(format!(
                    "`{}` has width {} but its encoding needs {expected}",
                    c.name, c.width
                )));
            }
            offset += c.width;
        }
        Ok(TableCodec { codecs, width: offset })
    }

    /// Assigns spans in order to the given kinds.
    pub fn from_kinds(columns: Vec<(String, CodecKind)>) -> Result<Self, TransformError> {
        let mut offset = 0;
        let mut codecs = Vec::with_capacity(columns.len());
        for (name, kind) in columns {
            let width = ColumnCodec::expected_width(&kind);
            codecs.push(ColumnCodec {
                name,
                kind,
                offset,
                width,
            });
            offset += width;
        }
        Self::new(codecs)
    }

    /// Fits one codec per column: a GMM with up to `k_max` components for
    /// continuous columns, the schema's categories for discrete ones.
    pub fn fit(table: &Table, k_max: usize, seed: u64) -> Result<Self, TransformError> {
        let mut kinds = Vec::with_capacity(table.n_cols());
        for (i, spec) in table.schema().columns().iter().enumerate() {
            let kind = match (&spec.kind, table.column(i)) {
                (ColumnKind::Continuous, ColumnData::Continuous(values)) => {
                    let gmm = GmmModel::fit(values, k_max, seed.wrapping_add(i as u64))
                        .map_err(|e| TransformError::DegenerateColumn(format!("`{}`: {e}", spec.name)))?;
                    CodecKind::Continuous { gmm }
                }
                (ColumnKind::Discrete { categories }, _) => CodecKind::Discrete {
                    categories: categories.clone(),
                },
                _ => unreachable!("table storage matches schema"),
            };
            kinds.push((spec.name.clone(), kind));
        }
        Self::from_kinds(kinds)
    }

    pub fn codecs(&self) -> &[ColumnCodec] {
        &self.codecs
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn len(&self) -> usize {
        self.codecs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codecs.is_empty()
    }

    pub fn names(&self) -> Vec<String> {
        self.codecs.iter().map(|c| c.name.clone()).collect()
    }

    /// Schema of decoded tables.
    pub fn schema(&self) -> TableSchema {
        TableSchema::new(self.codecs.iter().map(ColumnCodec::schema).collect()).expect("codec names are unique")
    }

    /// Encodes `table`, binding columns by name and categories by label.
    /// Mode selection is sampled from the responsibilities with `seed`.
    pub fn encode(&self, table: &Table, seed: u64) -> Result<EncodedMatrix, TransformError> {
        let schema = table.schema();
        if schema.len() != self.codecs.len() {
            return Err(TransformError::SchemaMismatch(format!(
                "table has {} columns, codecs expect {}",
                schema.len(),
                self.codecs.len()
            )));
        }
        let n = table.n_rows();
        let mut data = Matrix::zeros(n, self.width);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for codec in &self.codecs {
            let col = schema
                .index_of(&codec.name)
                .ok_or_else(|| TransformError::SchemaMismatch(format!("column `{}` missing", codec.name)))?;
            match (&codec.kind, table.column(col)) {
                (CodecKind::Continuous { gmm }, ColumnData::Continuous(values)) => {
                    for (row, &x) in values.iter().enumerate() {
                        let (scalar, mode) = encode_value(gmm, x, &mut rng);
                        data.set(row, codec.offset, scalar);
                        data.set(row, codec.offset + 1 + mode, 1.0);
                    }
                }
                (CodecKind::Discrete { categories }, ColumnData::Discrete(codes)) => {
                    let table_categories = schema.column(col).categories().expect("discrete");
                    let lookup: HashMap<&str, usize> =
                        categories.iter().enumerate().map(|(i, c)| (c.as_str(), i)).collect();
                    let remap: Vec<Option<usize>> = table_categories
                        .iter()
                        .map(|c| lookup.get(c.as_str()).copied())
                        .collect();
                    for (row, &code) in codes.iter().enumerate() {
                        let idx = remap[code].ok_or_else(|| TransformError::UnknownCategory {
                            column: codec.name.clone(),
                            value: table_categories[code].clone(),
                        })?;
                        data.set(row, codec.offset + idx, 1.0);
                    }
                }
                _ => {
                    return Err(TransformError::SchemaMismatch(format!(
                        "column `{}` kind differs from its codec",
                        codec.name
                    )))
                }
            }
        }
        Ok(EncodedMatrix {
            data,
            codec: self.clone(),
        })
    }

    /// Inverts [`TableCodec::encode`]: argmax over each one-hot block (lowest
    /// index on ties), continuous values rebuilt from the chosen mode.
    pub fn decode(&self, data: &Matrix) -> Result<Table, TransformError> {
        if data.cols() != self.width {
            return Err(TransformError::SchemaMismatch(format!(
                "matrix has {} columns, codecs expect {}",
                data.cols(),
                self.width
            )));
        }
        let n = data.rows();
        let mut columns = Vec::with_capacity(self.codecs.len());
        for codec in &self.codecs {
            let block = codec.one_hot_range();
            match &codec.kind {
                CodecKind::Continuous { gmm } => {
                    let values = (0..n)
                        .map(|r| {
                            let row = data.row(r);
                            let mode = argmax(&row[block.clone()]);
                            decode_value(gmm, row[codec.offset], mode)
                        })
                        .collect();
                    columns.push(ColumnData::Continuous(values));
                }
                CodecKind::Discrete { .. } => {
                    let codes = (0..n).map(|r| argmax(&data.row(r)[block.clone()])).collect();
                    columns.push(ColumnData::Discrete(codes));
                }
            }
        }
        Ok(Table::new(self.schema(), columns)?)
    }
}

impl EncodedMatrix {
    pub fn decode(&self) -> Result<Table, TransformError> {
        self.codec.decode(&self.data)
    }
}

fn encode_value<R: Rng>(gmm: &GmmModel, x: f64, rng: &mut R) -> (f64, usize) {
    let resp = gmm.responsibilities(x);
    let mut u = rng.random::<f64>();
    let mut mode = resp.len() - 1;
    for (j, &p) in resp.iter().enumerate() {
        if u < p {
            mode = j;
            break;
        }
        u -= p;
    }
    // Guard against a zero-responsibility pick from rounding.
    if resp[mode] == 0.0 {
        mode = argmax(&resp);
    }
    let scalar = ((x - gmm.means[mode]) / (STD_MULTIPLIER * gmm.stds[mode])).clamp(-1.0, 1.0);
    (scalar, mode)
}

fn decode_value(gmm: &GmmModel, scalar: f64, mode: usize) -> f64 {
    scalar.clamp(-1.0, 1.0) * STD_MULTIPLIER * gmm.stds[mode] + gmm.means[mode]
}
