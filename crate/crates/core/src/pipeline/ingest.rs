//! Reading real benchmark CSVs and splitting them chronologically.

use std::path::Path;
use std::str::FromStr;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::floor_fraction;
use crate::error::{Error, Result};

/// Chronological train / validation / test fractions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitFractions {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl Default for SplitFractions {
    fn default() -> Self {
        SplitFractions {
            train: 0.7,
            val: 0.1,
            test: 0.2,
        }
    }
}

impl SplitFractions {
    pub const EIGHTY_TEN_TEN: SplitFractions = SplitFractions {
        train: 0.8,
        val: 0.1,
        test: 0.1,
    };

    pub fn validate(&self) -> Result<()> {
        let parts = [self.train, self.val, self.test];
        if parts.iter().any(|p| !(*p > 0.0)) {
            return Err(Error::invalid(
                "splits",
                format!("fractions must be positive, got {parts:?}"),
            ));
        }
        let total: f64 = parts.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(
                "splits",
                format!("fractions must sum to 1, got {total}"),
            ));
        }
        Ok(())
    }

    /// Row counts `(train, val, test)` for `rows` rows; the test split takes
    /// the remainder.
    pub fn row_counts(&self, rows: usize) -> (usize, usize, usize) {
        let train = floor_fraction(rows, self.train);
        let val = floor_fraction(rows, self.val).min(rows - train);
        (train, val, rows - train - val)
    }
}

impl FromStr for SplitFractions {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| {
                Error::invalid(
                    "splits",
                    format!("expected three comma-separated numbers, got {s:?}"),
                )
            })?;
        if parts.len() != 3 {
            return Err(Error::invalid(
                "splits",
                format!("expected three fractions, got {}", parts.len()),
            ));
        }
        let fractions = SplitFractions {
            train: parts[0],
            val: parts[1],
            test: parts[2],
        };
        fractions.validate()?;
        Ok(fractions)
    }
}

/// A numeric table with its first (index or timestamp) column kept as text.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub index_name: String,
    pub columns: Vec<String>,
    pub index: Vec<String>,
    /// `rows x columns`.
    pub data: Array2<f64>,
}

impl Table {
    pub fn rows(&self) -> usize {
        self.data.nrows()
    }

    fn slice(&self, start: usize, end: usize) -> Table {
        Table {
            index_name: self.index_name.clone(),
            columns: self.columns.clone(),
            index: self.index[start..end].to_vec(),
            data: self.data.slice(ndarray::s![start..end, ..]).to_owned(),
        }
    }
}

/// Read a CSV whose header names an index column followed by numeric value
/// columns.
pub fn read_table(path: &Path) -> Result<Table> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(file);
    let format = |line: usize, reason: String| Error::Format {
        path: path.to_path_buf(),
        line,
        reason,
    };
    let csv_err = |e: csv::Error| {
        let line = e.position().map_or(0, |p| p.line() as usize);
        format(line, e.to_string())
    };

    let mut records = reader.records();
    let header = match records.next() {
        Some(r) => r.map_err(csv_err)?,
        None => return Err(format(1, "file is empty".into())),
    };
    if header.len() < 2 {
        return Err(format(
            1,
            format!(
                "need an index column and at least one value column, got {} column(s)",
                header.len()
            ),
        ));
    }
    if header
        .iter()
        .skip(1)
        .all(|h| h.trim().parse::<f64>().is_ok())
    {
        return Err(format(1, "missing header row".into()));
    }
    let index_name = header[0].trim().to_string();
    let columns: Vec<String> = header
        .iter()
        .skip(1)
        .map(|h| h.trim().to_string())
        .collect();

    let mut index = Vec::new();
    let mut values = Vec::new();
    for (i, record) in records.enumerate() {
        let line = i + 2;
        let record = record.map_err(csv_err)?;
        if record.len() != header.len() {
            return Err(format(
                line,
                format!("expected {} fields, found {}", header.len(), record.len()),
            ));
        }
        index.push(record[0].trim().to_string());
        for (j, cell) in record.iter().enumerate().skip(1) {
            let v: f64 = cell.trim().parse().map_err(|_| {
                format(
                    line,
                    format!("non-numeric value {cell:?} in column {:?}", columns[j - 1]),
                )
            })?;
            values.push(v);
        }
    }
    let data = Array2::from_shape_vec((index.len(), columns.len()), values)
        .map_err(|e| format(0, e.to_string()))?;
    Ok(Table {
        index_name,
        columns,
        index,
        data,
    })
}

/// Real data split chronologically into contiguous train / val / test blocks.
#[derive(Clone, Debug, PartialEq)]
pub struct RealSplits {
    pub source: String,
    pub fractions: SplitFractions,
    pub train: Table,
    pub val: Table,
    pub test: Table,
}

impl RealSplits {
    pub fn channels(&self) -> usize {
        self.train.columns.len()
    }

    pub fn split(
        table: &Table,
        fractions: SplitFractions,
        source: impl Into<String>,
    ) -> Result<RealSplits> {
        fractions.validate()?;
        let (n_train, n_val, _) = fractions.row_counts(table.rows());
        Ok(RealSplits {
            source: source.into(),
            fractions,
            train: table.slice(0, n_train),
            val: table.slice(n_train, n_train + n_val),
            test: table.slice(n_train + n_val, table.rows()),
        })
    }
}

pub fn load_real_csv(path: &Path, fractions: SplitFractions) -> Result<RealSplits> {
    let table = read_table(path)?;
    RealSplits::split(&table, fractions, path.display().to_string())
}
