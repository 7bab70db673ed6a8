//! CSV ingestion of compositional tables and part-weight files.
//!
//! Layout: a header row, then one row per sample. An optional grouping column
//! (e.g. `Season`) holds categorical labels; every other column is a numeric
//! part. Decimal separator is `.`.

use std::io::Read;
use std::path::Path;

use crate::composition::{CompositionMatrix, PartWeights};
use crate::error::{CodaError, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// Where the grouping factor comes from.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub enum GroupColumn {
    /// The first column is the group factor when any of its cells is not a
    /// number.
    #[default]
    Detect,
    /// A named column is the group factor.
    Named(String),
    /// All columns are parts.
    None,
}

#[derive(Debug, Clone, Default)]
pub struct CsvOptions {
    pub group_column: GroupColumn,
}

fn parse_error(row: usize, column: usize, message: impl Into<String>) -> CodaError {
    CodaError::Parse {
        row,
        column,
        message: message.into(),
    }
}

fn parse_number<T: Scalar>(cell: &str, row: usize, column: usize) -> Result<T> {
    let trimmed = cell.trim();
    if trimmed.is_empty() {
        return Err(parse_error(row, column, "empty cell"));
    }
    let value: f64 = trimmed
        .parse()
        .map_err(|_| parse_error(row, column, format!("`{trimmed}` is not a number")))?;
    if !value.is_finite() {
        return Err(parse_error(row, column, format!("`{trimmed}` is not finite")));
    }
    if value < 0.0 {
        return Err(parse_error(row, column, format!("negative value {trimmed}")));
    }
    T::from_f64(value).ok_or_else(|| parse_error(row, column, "value out of range"))
}

/// Reads a composition table from CSV text.
pub fn read_composition<T: Scalar, R: Read>(reader: R, options: &CsvOptions) -> Result<CompositionMatrix<T>> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let header: Vec<String> = csv.headers()?.iter().map(str::to_string).collect();
    let mut records = Vec::new();
    for (n, record) in csv.records().enumerate() {
        let record = record?;
        let line = n + 2;
        if record.len() != header.len() {
            return Err(parse_error(
                line,
                record.len().min(header.len()) + 1,
                format!("expected {} fields, found {}", header.len(), record.len()),
            ));
        }
        if record.iter().all(str::is_empty) {
            continue;
        }
        records.push((line, record));
    }

    let group_idx = match &options.group_column {
        GroupColumn::None => None,
        GroupColumn::Named(name) => Some(
            header
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| parse_error(1, 0, format!("no column named `{name}`")))?,
        ),
        GroupColumn::Detect => {
            let first_is_text = records
                .iter()
                .any(|(_, r)| r.get(0).is_some_and(|c| c.trim().parse::<f64>().is_err()));
            first_is_text.then_some(0)
        }
    };

    let part_cols: Vec<usize> = (0..header.len()).filter(|&c| Some(c) != group_idx).collect();
    let part_names: Vec<String> = part_cols.iter().map(|&c| header[c].clone()).collect();
    let mut data = Vec::with_capacity(records.len() * part_cols.len());
    let mut groups = Vec::with_capacity(records.len());
    for (line, record) in &records {
        for &c in &part_cols {
            data.push(parse_number::<T>(&record[c], *line, c + 1)?);
        }
        if let Some(g) = group_idx {
            groups.push(record[g].to_string());
        }
    }
    let values = Matrix::from_row_major(records.len(), part_cols.len(), data);
    let labels = (1..=records.len()).map(|i| i.to_string()).collect();
    CompositionMatrix::new(values, part_names, labels, group_idx.map(|_| groups))
}

pub fn read_composition_file<T: Scalar>(path: &Path, options: &CsvOptions) -> Result<CompositionMatrix<T>> {
    let file = std::fs::File::open(path)?;
    read_composition(std::io::BufReader::new(file), options)
}

/// Reads `part,weight` rows (with a header) and closes the weights to one.
/// Every part of the composition must be listed exactly once.
pub fn read_weights<T: Scalar, R: Read>(reader: R, part_names: &[String]) -> Result<PartWeights<T>> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut raw: Vec<Option<T>> = vec![None; part_names.len()];
    for (n, record) in csv.records().enumerate() {
        let record = record?;
        let line = n + 2;
        if record.len() != 2 {
            return Err(parse_error(line, 1, "expected `part,weight`"));
        }
        let j = part_names
            .iter()
            .position(|p| p == &record[0])
            .ok_or_else(|| parse_error(line, 1, format!("unknown part `{}`", &record[0])))?;
        if raw[j].is_some() {
            return Err(parse_error(line, 1, format!("part `{}` listed twice", &record[0])));
        }
        let w = parse_number::<T>(&record[1], line, 2)?;
        if w <= T::zero() {
            return Err(parse_error(line, 2, "weight must be positive"));
        }
        raw[j] = Some(w);
    }
    let weights: Vec<T> = raw
        .into_iter()
        .enumerate()
        .map(|(j, w)| w.ok_or_else(|| CodaError::Weights(format!("no weight for part `{}`", part_names[j]))))
        .collect::<Result<_>>()?;
    PartWeights::normalized(&weights)
}
