use std::ops::{Index, IndexMut};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Dense row-major matrix of arbitrary-precision integers.
///
/// The shape is fixed at construction; operations mutate entries in place.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<BigInt>,
}

impl IntMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<BigInt>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "{} entries cannot fill a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        Ok(IntMatrix { rows, cols, entries })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, entries: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::one();
        }
        m
    }

    /// Builds a matrix from row vectors. An empty list gives a `0x0` matrix.
    pub fn from_rows(rows: Vec<Vec<BigInt>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * cols);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != cols {
                return Err(Error::ShapeMismatch(format!(
                    "row {i} has {} entries, expected {cols}",
                    row.len()
                )));
            }
            entries.extend(row);
        }
        Ok(IntMatrix { rows: n, cols, entries })
    }

    pub fn from_i64_rows<R: AsRef<[i64]>>(rows: &[R]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.as_ref().iter().copied().map(BigInt::from).collect())
                .collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> Option<&BigInt> {
        (r < self.rows && c < self.cols).then(|| &self.entries[r * self.cols + c])
    }

    pub fn row(&self, r: usize) -> &[BigInt] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [BigInt] {
        &mut self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[BigInt]> + '_ {
        (0..self.rows).map(move |r| self.row(r))
    }

    pub fn column(&self, c: usize) -> Vec<BigInt> {
        (0..self.rows).map(|r| self[(r, c)].clone()).collect()
    }

    pub fn entries(&self) -> &[BigInt] {
        &self.entries
    }

    pub fn to_rows(&self) -> Vec<Vec<BigInt>> {
        self.iter_rows().map(<[BigInt]>::to_vec).collect()
    }

    pub fn transpose(&self) -> IntMatrix {
        let mut t = IntMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t[(c, r)] = self[(r, c)].clone();
            }
        }
        t
    }

    /// Copies rows `0..rows` and columns `0..cols`.
    pub fn principal_submatrix(&self, rows: usize, cols: usize) -> Result<IntMatrix> {
        if rows > self.rows || cols > self.cols {
            return Err(Error::DimensionMismatch {
                left_rows: self.rows,
                left_cols: self.cols,
                right_rows: rows,
                right_cols: cols,
            });
        }
        let entries = (0..rows)
            .flat_map(|r| self.row(r)[..cols].iter().cloned())
            .collect();
        Ok(IntMatrix { rows, cols, entries })
    }

    pub fn map(&self, mut f: impl FnMut(&BigInt) -> BigInt) -> IntMatrix {
        IntMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(&mut f).collect(),
        }
    }

    /// Row `dst` becomes `dst + c * src`.
    pub fn add_row_multiple(&mut self, src: usize, dst: usize, c: &BigInt) -> Result<()> {
        check_index(src, self.rows)?;
        check_index(dst, self.rows)?;
        if src == dst {
            return Err(Error::AliasedOperands { index: src });
        }
        if c.is_zero() {
            return Ok(());
        }
        for k in 0..self.cols {
            let delta = c * &self[(src, k)];
            self[(dst, k)] += delta;
        }
        Ok(())
    }

    /// Column `dst` becomes `dst + c * src`.
    pub fn add_col_multiple(&mut self, src: usize, dst: usize, c: &BigInt) -> Result<()> {
        check_index(src, self.cols)?;
        check_index(dst, self.cols)?;
        if src == dst {
            return Err(Error::AliasedOperands { index: src });
        }
        if c.is_zero() {
            return Ok(());
        }
        for k in 0..self.rows {
            let delta = c * &self[(k, src)];
            self[(k, dst)] += delta;
        }
        Ok(())
    }

    pub fn scale_row(&mut self, r: usize, c: &BigInt) -> Result<()> {
        check_index(r, self.rows)?;
        for x in self.row_mut(r) {
            *x *= c;
        }
        Ok(())
    }

    /// Exact product `self * rhs`.
    pub fn mul(&self, rhs: &IntMatrix) -> Result<IntMatrix> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch {
                left_rows: self.rows,
                left_cols: self.cols,
                right_rows: rhs.rows,
                right_cols: rhs.cols,
            });
        }
        let mut out = IntMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = &rhs[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }
}

impl Index<(usize, usize)> for IntMatrix {
    type Output = BigInt;

    fn index(&self, (r, c): (usize, usize)) -> &BigInt {
        assert!(r < self.rows && c < self.cols, "index ({r}, {c}) out of range");
        &self.entries[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut BigInt {
        assert!(r < self.rows && c < self.cols, "index ({r}, {c}) out of range");
        &mut self.entries[r * self.cols + c]
    }
}

fn check_index(index: usize, len: usize) -> Result<()> {
    if index < len {
        Ok(())
    } else {
        Err(Error::IndexOutOfRange { index, len })
    }
}
