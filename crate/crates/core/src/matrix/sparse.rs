use std::collections::BTreeMap;
use std::fmt;
use std::io::BufRead;
use std::sync::mpsc::Receiver;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::IntMatrix;
use crate::error::{Error, Result};

/// A finitely supported integer row. Zero entries are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct SparseRow {
    entries: BTreeMap<usize, BigInt>,
}

impl SparseRow {
    pub fn new() -> Self {
        Self::default()
    }

    /// The standard basis row `e_i`.
    pub fn unit(i: usize) -> Self {
        let mut row = Self::new();
        row.set(i, BigInt::one());
        row
    }

    /// Later pairs overwrite earlier ones for the same column.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, BigInt)>) -> Self {
        let mut row = Self::new();
        for (c, v) in pairs {
            row.set(c, v);
        }
        row
    }

    pub fn from_dense(values: &[BigInt]) -> Self {
        Self::from_pairs(values.iter().cloned().enumerate())
    }

    pub fn set(&mut self, col: usize, value: BigInt) {
        if value.is_zero() {
            self.entries.remove(&col);
        } else {
            self.entries.insert(col, value);
        }
    }

    pub fn get(&self, col: usize) -> Option<&BigInt> {
        self.entries.get(&col)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &BigInt)> + '_ {
        self.entries.iter().map(|(&c, v)| (c, v))
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// One past the largest column index in the support (0 for the zero row).
    pub fn support_end(&self) -> usize {
        self.entries.keys().next_back().map_or(0, |&c| c + 1)
    }

    /// Dense copy of width `max(width, support_end())`.
    pub fn to_dense(&self, width: usize) -> Vec<BigInt> {
        let mut out = vec![BigInt::zero(); width.max(self.support_end())];
        for (c, v) in self.iter() {
            out[c] = v.clone();
        }
        out
    }

    /// Parses whitespace separated `col:value` pairs. A blank line is the zero row.
    pub fn parse(line: &str, line_no: usize) -> Result<Self> {
        let mut row = Self::new();
        for token in line.split_whitespace() {
            let (col, value) = token
                .split_once(':')
                .ok_or_else(|| Error::parse(line_no, format!("expected col:value, got {token:?}")))?;
            let col: usize = col
                .parse()
                .map_err(|_| Error::parse(line_no, format!("bad column index {col:?}")))?;
            let value: BigInt = value
                .parse()
                .map_err(|_| Error::parse(line_no, format!("bad integer {value:?}")))?;
            if row.entries.contains_key(&col) {
                return Err(Error::parse(line_no, format!("column {col} given twice")));
            }
            row.set(col, value);
        }
        Ok(row)
    }
}

impl fmt::Display for SparseRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (c, v)) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{c}:{v}")?;
        }
        Ok(())
    }
}

type Producer = Box<dyn FnMut() -> Result<Option<SparseRow>> + Send>;

/// Pull-based, single-consumer source of sparse rows for a row-finite
/// `omega x omega` matrix.
///
/// `Ok(None)` from [`RowStream::next_row`] means the matrix was declared
/// finite and every row has been delivered.
pub struct RowStream {
    producer: Producer,
    consumed: usize,
    finished: bool,
}

impl RowStream {
    pub fn from_producer(producer: impl FnMut() -> Result<Option<SparseRow>> + Send + 'static) -> Self {
        RowStream { producer: Box::new(producer), consumed: 0, finished: false }
    }

    /// The iterator ending is taken as the declared end of a finite matrix.
    pub fn from_rows<I>(rows: I) -> Self
    where
        I: IntoIterator<Item = SparseRow>,
        I::IntoIter: Send + 'static,
    {
        let mut rows = rows.into_iter();
        Self::from_producer(move || Ok(rows.next()))
    }

    /// Row `i` is `f(i)`; the stream is finite once `f` returns `None`.
    pub fn from_fn(mut f: impl FnMut(usize) -> Option<SparseRow> + Send + 'static) -> Self {
        let mut next = 0usize;
        Self::from_producer(move || {
            let row = f(next);
            next += 1;
            Ok(row)
        })
    }

    /// Rows arrive in order over a channel; a closed channel ends the stream.
    pub fn from_receiver(rx: Receiver<SparseRow>) -> Self {
        Self::from_producer(move || Ok(rx.recv().ok()))
    }

    /// The rows of a finite matrix, zero padded to infinite width.
    pub fn from_matrix(m: &IntMatrix) -> Self {
        let rows: Vec<SparseRow> = m.iter_rows().map(SparseRow::from_dense).collect();
        Self::from_rows(rows)
    }

    /// The block matrix `m (+) I`: the rows of `m` followed by `e_n, e_{n+1}, ...`
    /// where `n = max(rows, cols)`. Never ends.
    pub fn identity_extended(m: &IntMatrix) -> Self {
        let rows: Vec<SparseRow> = m.iter_rows().map(SparseRow::from_dense).collect();
        let offset = m.rows().max(m.cols());
        let head = rows.len();
        Self::from_fn(move |i| {
            Some(if i < head { rows[i].clone() } else { SparseRow::unit(offset + i - head) })
        })
    }

    /// Reads the sparse stream text format: one row per line as `col:value`
    /// pairs, a line containing only `.` ends a finite stream. Reaching end of
    /// input without the terminator is reported as [`Error::StreamTruncated`].
    pub fn from_reader(reader: impl BufRead + Send + 'static) -> Self {
        let mut lines = reader.lines();
        let mut line_no = 0usize;
        let mut rows = 0usize;
        Self::from_producer(move || loop {
            line_no += 1;
            let Some(line) = lines.next() else {
                return Err(Error::StreamTruncated { rows });
            };
            let line = line?;
            let trimmed = line.trim();
            if trimmed.starts_with('#') {
                continue;
            }
            if trimmed == "." {
                return Ok(None);
            }
            rows += 1;
            return SparseRow::parse(trimmed, line_no).map(Some);
        })
    }

    pub fn next_row(&mut self) -> Result<Option<SparseRow>> {
        if self.finished {
            return Ok(None);
        }
        match (self.producer)()? {
            Some(row) => {
                self.consumed += 1;
                Ok(Some(row))
            }
            None => {
                self.finished = true;
                Ok(None)
            }
        }
    }

    pub fn rows_consumed(&self) -> usize {
        self.consumed
    }

    pub fn is_finished(&self) -> bool {
        self.finished
    }

    /// Pulls `n` rows into a dense window `n x w`, `w = max(cols, widest support)`.
    pub fn take_prefix(&mut self, n: usize, cols: usize) -> Result<IntMatrix> {
        let mut rows = Vec::with_capacity(n);
        for _ in 0..n {
            match self.next_row()? {
                Some(row) => rows.push(row),
                None => return Err(Error::StreamExhausted { requested: n, available: rows.len() }),
            }
        }
        let width = rows.iter().map(SparseRow::support_end).fold(cols, usize::max);
        IntMatrix::from_rows(rows.iter().map(|r| r.to_dense(width)).collect())
    }
}

impl fmt::Debug for RowStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RowStream")
            .field("consumed", &self.consumed)
            .field("finished", &self.finished)
            .finish_non_exhaustive()
    }
}
