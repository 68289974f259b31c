//! Exact integer matrices: dense finite matrices, sparse rows and row
//! streams for row-finite infinite matrices, and the pivot column map shared
//! by both elimination engines.
//!
//! Text format for dense matrices: the first line is `rows cols`, followed by
//! one whitespace separated row per line.

mod dense;
mod sparse;

use std::collections::BTreeMap;
use std::fmt;
use std::io::BufRead;
use std::str::FromStr;

use num_bigint::BigInt;

pub use dense::IntMatrix;
pub use sparse::{RowStream, SparseRow};

use crate::error::{Error, Result};

/// Injective map from pivot row index to pivot column index.
///
/// Pivots are recorded in row order; row `i` always has the `i`-th entry.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ColumnPermutation {
    columns: Vec<usize>,
    rows: BTreeMap<usize, usize>,
}

impl ColumnPermutation {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_columns(columns: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut perm = Self::new();
        for c in columns {
            perm.push(c)?;
        }
        Ok(perm)
    }

    /// Records `col` as the pivot column of the next row.
    pub fn push(&mut self, col: usize) -> Result<()> {
        if let Some(&row) = self.rows.get(&col) {
            return Err(Error::ShapeMismatch(format!(
                "column {col} is already the pivot of row {row}"
            )));
        }
        self.rows.insert(col, self.columns.len());
        self.columns.push(col);
        Ok(())
    }

    pub fn column(&self, row: usize) -> Option<usize> {
        self.columns.get(row).copied()
    }

    pub fn row_of(&self, col: usize) -> Option<usize> {
        self.rows.get(&col).copied()
    }

    pub fn is_pivot(&self, col: usize) -> bool {
        self.rows.contains_key(&col)
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn columns(&self) -> &[usize] {
        &self.columns
    }

    pub fn truncated(&self, rows: usize) -> Self {
        Self::from_columns(self.columns.iter().copied().take(rows))
            .expect("prefix of an injective map is injective")
    }
}

impl IntMatrix {
    /// Parses the dense text format.
    pub fn parse_text(text: &str) -> Result<IntMatrix> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (header_line, header) = lines.next().ok_or_else(|| Error::parse(1, "missing header"))?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| Error::parse(header_line, format!("bad dimension {t:?}"))))
            .collect::<Result<_>>()?;
        let [rows, cols] = dims[..] else {
            return Err(Error::parse(header_line, "header must be `rows cols`"));
        };
        let mut entries = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            let (line_no, line) = lines
                .next()
                .ok_or_else(|| Error::parse(header_line + r + 1, format!("missing row {r}")))?;
            let before = entries.len();
            for token in line.split_whitespace() {
                entries.push(
                    BigInt::from_str(token)
                        .map_err(|_| Error::parse(line_no, format!("bad integer {token:?}")))?,
                );
            }
            if entries.len() - before != cols {
                return Err(Error::parse(
                    line_no,
                    format!("row {r} has {} entries, expected {cols}", entries.len() - before),
                ));
            }
        }
        if let Some((line_no, _)) = lines.next() {
            return Err(Error::parse(line_no, "trailing data after matrix"));
        }
        IntMatrix::new(rows, cols, entries)
    }

    pub fn read_text(mut reader: impl BufRead) -> Result<IntMatrix> {
        let mut text = String::new();
        reader.read_to_string(&mut text)?;
        Self::parse_text(&text)
    }
}

impl FromStr for IntMatrix {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        IntMatrix::parse_text(s)
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {}", self.rows(), self.cols())?;
        for row in self.iter_rows() {
            let line: Vec<String> = row.iter().map(ToString::to_string).collect();
            writeln!(f, "{}", line.join(" "))?;
        }
        Ok(())
    }
}
