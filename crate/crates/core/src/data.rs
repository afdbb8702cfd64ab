//! Tables, column schemas, CSV ingestion and the schema sidecar format.
//!
//! Tables are stored column-major: continuous columns as `f64`, discrete
//! columns as indices into the column's ordered category list. Binding between
//! tables, graphs and Bayesian networks is always by column name.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Columns with at most this many distinct values are inferred as discrete.
pub const DISCRETE_INFERENCE_THRESHOLD: usize = 20;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("column `{0}` is missing")]
    MissingColumn(String),
    #[error("cannot read value {value:?} at row {row}, column `{column}`")]
    TypeCoercion {
        row: usize,
        column: String,
        value: String,
    },
    #[error("table has no rows")]
    EmptyTable,
    #[error("schema line {line}: {message}")]
    SchemaSyntax { line: usize, message: String },
    #[error("invalid schema: {0}")]
    InvalidSchema(String),
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("invalid split fraction {0}; expected 0 < fraction < 1")]
    InvalidFraction(f64),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ColumnKind {
    Continuous,
    Discrete { categories: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSchema {
    pub name: String,
    #[serde(flatten)]
    pub kind: ColumnKind,
}

impl ColumnSchema {
    pub fn continuous(name: impl Into<String>) -> Self {
        ColumnSchema {
            name: name.into(),
            kind: ColumnKind::Continuous,
        }
    }

    pub fn discrete<S: Into<String>>(name: impl Into<String>, categories: impl IntoIterator<Item = S>) -> Self {
        ColumnSchema {
            name: name.into(),
            kind: ColumnKind::Discrete {
                categories: categories.into_iter().map(Into::into).collect(),
            },
        }
    }

    pub fn is_continuous(&self) -> bool {
        matches!(self.kind, ColumnKind::Continuous)
    }

    pub fn categories(&self) -> Option<&[String]> {
        match &self.kind {
            ColumnKind::Discrete { categories } => Some(categories),
            ColumnKind::Continuous => None,
        }
    }

    pub fn category_index(&self, label: &str) -> Option<usize> {
        self.categories()?.iter().position(|c| c == label)
    }

    fn validate(&self) -> Result<(), DataError> {
        if self.name.is_empty() {
            return Err(DataError::InvalidSchema("empty column name".into()));
        }
        if let ColumnKind::Discrete { categories } = &self.kind {
            if categories.is_empty() {
                return Err(DataError::InvalidSchema(format!(
                    "discrete column `{}` has no categories",
                    self.name
                )));
            }
            let unique: HashSet<&String> = categories.iter().collect();
            if unique.len() != categories.len() {
                return Err(DataError::InvalidSchema(format!(
                    "discrete column `{}` repeats a category",
                    self.name
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<ColumnSchema>", into = "Vec<ColumnSchema>")]
pub struct TableSchema {
    columns: Vec<ColumnSchema>,
}

impl TryFrom<Vec<ColumnSchema>> for TableSchema {
    type Error = DataError;

    fn try_from(columns: Vec<ColumnSchema>) -> Result<Self, Self::Error> {
        TableSchema::new(columns)
    }
}

impl From<TableSchema> for Vec<ColumnSchema> {
    fn from(schema: TableSchema) -> Self {
        schema.columns
    }
}

impl TableSchema {
    pub fn new(columns: Vec<ColumnSchema>) -> Result<Self, DataError> {
        if columns.is_empty() {
            return Err(DataError::InvalidSchema("schema has no columns".into()));
        }
        let mut names = HashSet::new();
        for column in &columns {
            column.validate()?;
            if !names.insert(column.name.as_str()) {
                return Err(DataError::InvalidSchema(format!(
                    "duplicate column `{}`",
                    column.name
                )));
            }
        }
        Ok(TableSchema { columns })
    }

    pub fn columns(&self) -> &[ColumnSchema] {
        &self.columns
    }

    pub fn column(&self, index: usize) -> &ColumnSchema {
        &self.columns[index]
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn names(&self) -> Vec<String> {
        self.columns.iter().map(|c| c.name.clone()).collect()
    }

    /// Parses the sidecar format: one `name: continuous` or
    /// `name: discrete(a,b,c)` per line; `#` starts a comment line.
    pub fn parse_sidecar(text: &str) -> Result<Self, DataError> {
        let mut columns = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            columns.push(parse_sidecar_line(line).ok_or_else(|| DataError::SchemaSyntax {
                line: i + 1,
                message: format!("expected `name: continuous` or `name: discrete(...)`, got {line:?}"),
            })?);
        }
        TableSchema::new(columns)
    }

    pub fn to_sidecar(&self) -> String {
        let mut out = String::new();
        for column in &self.columns {
            match &column.kind {
                ColumnKind::Continuous => out.push_str(&format!("{}: continuous\n", column.name)),
                ColumnKind::Discrete { categories } => {
                    out.push_str(&format!("{}: discrete({})\n", column.name, category_list(categories)))
                }
            }
        }
        out
    }

    pub fn read_sidecar(path: impl AsRef<Path>) -> Result<Self, DataError> {
        Self::parse_sidecar(&std::fs::read_to_string(path)?)
    }

    pub fn write_sidecar(&self, path: impl AsRef<Path>) -> Result<(), DataError> {
        std::fs::write(path, self.to_sidecar())?;
        Ok(())
    }
}

/// Comma-joined labels, CSV-quoted where a label contains `,` or `"`.
fn category_list(categories: &[String]) -> String {
    let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    wtr.write_record(categories).expect("in-memory write");
    let bytes = wtr.into_inner().expect("in-memory flush");
    String::from_utf8(bytes).expect("utf-8 labels").trim_end().to_string()
}

fn parse_sidecar_line(line: &str) -> Option<ColumnSchema> {
    // Names may contain ':', so try every split point until the tail parses.
    for (pos, _) in line.match_indices(':') {
        let name = line[..pos].trim();
        let kind = line[pos + 1..].trim();
        if name.is_empty() {
            continue;
        }
        if kind == "continuous" {
            return Some(ColumnSchema::continuous(name));
        }
        if let Some(inner) = kind.strip_prefix("discrete(").and_then(|k| k.strip_suffix(')')) {
            let mut rdr = csv::ReaderBuilder::new()
                .has_headers(false)
                .trim(csv::Trim::All)
                .from_reader(inner.as_bytes());
            let record = rdr.records().next()?.ok()?;
            return Some(ColumnSchema::discrete(name, record.iter().map(String::from)));
        }
    }
    None
}

/// Column storage. Discrete cells are indices into the schema's categories.
#[derive(Debug, Clone, PartialEq)]
pub enum ColumnData {
    Continuous(Vec<f64>),
    Discrete(Vec<usize>),
}

impl ColumnData {
    pub fn len(&self) -> usize {
        match self {
            ColumnData::Continuous(v) => v.len(),
            ColumnData::Discrete(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn as_continuous(&self) -> Option<&[f64]> {
        match self {
            ColumnData::Continuous(v) => Some(v),
            ColumnData::Discrete(_) => None,
        }
    }

    pub fn as_discrete(&self) -> Option<&[usize]> {
        match self {
            ColumnData::Discrete(v) => Some(v),
            ColumnData::Continuous(_) => None,
        }
    }

    fn select(&self, rows: &[usize]) -> ColumnData {
        match self {
            ColumnData::Continuous(v) => ColumnData::Continuous(rows.iter().map(|&r| v[r]).collect()),
            ColumnData::Discrete(v) => ColumnData::Discrete(rows.iter().map(|&r| v[r]).collect()),
        }
    }
}

/// A borrowed cell value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell<'a> {
    Number(f64),
    Label(&'a str),
}

/// Typed, immutable table. Every column has `n_rows` cells, discrete cells are
/// valid category indices and continuous cells are finite.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    schema: TableSchema,
    columns: Vec<ColumnData>,
    n_rows: usize,
}

impl Table {
    pub fn new(schema: TableSchema, columns: Vec<ColumnData>) -> Result<Self, DataError> {
        if columns.len() != schema.len() {
            return Err(DataError::SchemaMismatch(format!(
                "{} columns for a schema of {}",
                columns.len(),
                schema.len()
            )));
        }
        let n_rows = columns.first().map_or(0, ColumnData::len);
        for (spec, data) in schema.columns().iter().zip(&columns) {
            if data.len() != n_rows {
                return Err(DataError::SchemaMismatch(format!(
                    "column `{}` has {} rows, expected {n_rows}",
                    spec.name,
                    data.len()
                )));
            }
            match (&spec.kind, data) {
                (ColumnKind::Continuous, ColumnData::Continuous(values)) => {
                    if let Some(row) = values.iter().position(|v| !v.is_finite()) {
                        return Err(DataError::TypeCoercion {
                            row,
                            column: spec.name.clone(),
                            value: values[row].to_string(),
                        });
                    }
                }
                (ColumnKind::Discrete { categories }, ColumnData::Discrete(codes)) => {
                    if let Some(row) = codes.iter().position(|&c| c >= categories.len()) {
                        return Err(DataError::TypeCoercion {
                            row,
                            column: spec.name.clone(),
                            value: codes[row].to_string(),
                        });
                    }
                }
                _ => {
                    return Err(DataError::SchemaMismatch(format!(
                        "column `{}` storage does not match its kind",
                        spec.name
                    )))
                }
            }
        }
        Ok(Table {
            schema,
            columns,
            n_rows,
        })
    }

    pub fn schema(&self) -> &TableSchema {
        &self.schema
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, index: usize) -> &ColumnData {
        &self.columns[index]
    }

    pub fn columns(&self) -> &[ColumnData] {
        &self.columns
    }

    pub fn column_by_name(&self, name: &str) -> Option<&ColumnData> {
        self.schema.index_of(name).map(|i| &self.columns[i])
    }

    pub fn cell(&self, row: usize, col: usize) -> Cell<'_> {
        match &self.columns[col] {
            ColumnData::Continuous(v) => Cell::Number(v[row]),
            ColumnData::Discrete(v) => {
                Cell::Label(&self.schema.column(col).categories().expect("discrete")[v[row]])
            }
        }
    }

    /// Labels of a discrete column, one per row.
    pub fn labels(&self, col: usize) -> Option<Vec<&str>> {
        let categories = self.schema.column(col).categories()?;
        let codes = self.columns[col].as_discrete()?;
        Some(codes.iter().map(|&c| categories[c].as_str()).collect())
    }

    pub fn select_rows(&self, rows: &[usize]) -> Table {
        Table {
            schema: self.schema.clone(),
            columns: self.columns.iter().map(|c| c.select(rows)).collect(),
            n_rows: rows.len(),
        }
    }

    /// Reorders/selects columns by name.
    pub fn project(&self, names: &[String]) -> Result<Table, DataError> {
        let mut specs = Vec::with_capacity(names.len());
        let mut columns = Vec::with_capacity(names.len());
        for name in names {
            let i = self
                .schema
                .index_of(name)
                .ok_or_else(|| DataError::MissingColumn(name.clone()))?;
            specs.push(self.schema.column(i).clone());
            columns.push(self.columns[i].clone());
        }
        Ok(Table {
            schema: TableSchema::new(specs)?,
            columns,
            n_rows: self.n_rows,
        })
    }

    /// Writes the table as CSV with a header row. Continuous values use the
    /// shortest representation that parses back to the same `f64`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), DataError> {
        let mut out = csv::Writer::from_writer(writer);
        out.write_record(self.schema.columns().iter().map(|c| c.name.as_str()))?;
        let mut record: Vec<String> = vec![String::new(); self.n_cols()];
        for row in 0..self.n_rows {
            for (col, slot) in record.iter_mut().enumerate() {
                *slot = match self.cell(row, col) {
                    Cell::Number(x) => format!("{x}"),
                    Cell::Label(l) => l.to_string(),
                };
            }
            out.write_record(&record)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn write_csv_file(&self, path: impl AsRef<Path>) -> Result<(), DataError> {
        self.write_csv(File::create(path)?)
    }
}

/// How `load_csv` obtains column types.
#[derive(Debug, Clone)]
pub enum SchemaSource {
    Infer,
    Explicit(TableSchema),
}

pub fn load_csv(path: impl AsRef<Path>, schema: SchemaSource) -> Result<Table, DataError> {
    read_csv(File::open(path)?, schema)
}

/// Reads a headed CSV. With an explicit schema, columns are picked by name and
/// extra CSV columns are ignored; with inference a column is discrete iff it is
/// non-numeric or has at most [`DISCRETE_INFERENCE_THRESHOLD`] distinct values.
pub fn read_csv<R: Read>(reader: R, schema: SchemaSource) -> Result<Table, DataError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let mut raw: Vec<Vec<String>> = vec![Vec::new(); headers.len()];
    for record in rdr.records() {
        let record = record?;
        for (col, value) in record.iter().enumerate() {
            raw[col].push(value.trim().to_string());
        }
    }
    let n_rows = raw.first().map_or(0, Vec::len);
    if n_rows == 0 {
        return Err(DataError::EmptyTable);
    }
    let header_index: HashMap<&str, usize> =
        headers.iter().enumerate().map(|(i, h)| (h.as_str(), i)).collect();

    let schema = match schema {
        SchemaSource::Explicit(schema) => schema,
        SchemaSource::Infer => {
            let mut columns = Vec::with_capacity(headers.len());
            for (name, values) in headers.iter().zip(&raw) {
                columns.push(infer_column(name, values)?);
            }
            TableSchema::new(columns)?
        }
    };

    let mut columns = Vec::with_capacity(schema.len());
    for spec in schema.columns() {
        let &src = header_index
            .get(spec.name.as_str())
            .ok_or_else(|| DataError::MissingColumn(spec.name.clone()))?;
        let values = &raw[src];
        let coercion = |row: usize| DataError::TypeCoercion {
            row,
            column: spec.name.clone(),
            value: values[row].clone(),
        };
        match &spec.kind {
            ColumnKind::Continuous => {
                let mut parsed = Vec::with_capacity(n_rows);
                for (row, v) in values.iter().enumerate() {
                    match v.parse::<f64>() {
                        Ok(x) if x.is_finite() => parsed.push(x),
                        _ => return Err(coercion(row)),
                    }
                }
                columns.push(ColumnData::Continuous(parsed));
            }
            ColumnKind::Discrete { categories } => {
                let lookup: HashMap<&str, usize> =
                    categories.iter().enumerate().map(|(i, c)| (c.as_str(), i)).collect();
                let mut codes = Vec::with_capacity(n_rows);
                for (row, v) in values.iter().enumerate() {
                    codes.push(*lookup.get(v.as_str()).ok_or_else(|| coercion(row))?);
                }
                columns.push(ColumnData::Discrete(codes));
            }
        }
    }
    Table::new(schema, columns)
}

fn infer_column(name: &str, values: &[String]) -> Result<ColumnSchema, DataError> {
    if let Some(row) = values.iter().position(|v| v.is_empty()) {
        return Err(DataError::TypeCoercion {
            row,
            column: name.to_string(),
            value: String::new(),
        });
    }
    let distinct: BTreeSet<&str> = values.iter().map(String::as_str).collect();
    let numeric: Option<Vec<f64>> = distinct
        .iter()
        .map(|v| v.parse::<f64>().ok().filter(|x| x.is_finite()))
        .collect();
    match numeric {
        Some(_) if distinct.len() > DISCRETE_INFERENCE_THRESHOLD => Ok(ColumnSchema::continuous(name)),
        Some(nums) => {
            // Numeric labels sort by value, so "10" follows "9".
            let mut pairs: Vec<(f64, &str)> = nums.into_iter().zip(distinct.iter().copied()).collect();
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(b.1)));
            Ok(ColumnSchema::discrete(name, pairs.into_iter().map(|(_, s)| s)))
        }
        None => Ok(ColumnSchema::discrete(name, distinct)),
    }
}

/// Shuffles rows with `seed` and splits off the first `round(fraction * n)`.
pub fn split_rows(table: &Table, fraction: f64, seed: u64) -> Result<(Table, Table), DataError> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(DataError::InvalidFraction(fraction));
    }
    let n = table.n_rows();
    let cut = (fraction * n as f64).round() as usize;
    if cut == 0 || cut == n {
        return Err(DataError::EmptyTable);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    Ok((table.select_rows(&order[..cut]), table.select_rows(&order[cut..])))
}
