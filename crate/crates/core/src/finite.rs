//! Finite-matrix basis lifting modulo `p^nu`.
//!
//! A port of the `GetBasis` elimination procedure: symmetric residues
//! throughout, `C` built by column operations that mirror every row
//! operation on `R`, and a repair pass for entries of `C` divisible by `q`
//! in pivot position.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::arith::{mgcdex, symmetric_residue, unit_inverse, Modulus};
use crate::error::{Error, Result};
use crate::matrix::{ColumnPermutation, IntMatrix};
use crate::oracle::LiftedBasis;

/// What the repair pass did for one working row.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RepairEvent {
    /// The pivot entry of `C` was zero or not a multiple of `q`.
    NotTriggered,
    /// Triggered, but no usable gcd combination was found.
    Declined,
    /// Columns of `C` (and rows of `R`) that were combined.
    Applied { columns: Vec<usize> },
}

/// Per-row record of the repair pass. `residue_flag` mirrors a flag of the
/// original procedure that is set but never read; it is kept for audit only.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RepairRecord {
    pub row: usize,
    pub event: RepairEvent,
    pub residue_flag: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LiftResult {
    /// Rows `y_i` in input-row order.
    pub lifted: IntMatrix,
    pub units: Vec<BigInt>,
    pub pivots: ColumnPermutation,
    /// Final `R` restricted to the input columns.
    pub reduction_witness: IntMatrix,
    pub modulus: Modulus,
    /// Final `C`; `transform * witness` is the unit-scaled residue input.
    pub transform: IntMatrix,
    /// Augmented part of `R`, the exact inverse of `transform`.
    pub transform_inverse: IntMatrix,
    pub repairs: Vec<RepairRecord>,
}

impl LiftedBasis for LiftResult {
    fn lifted(&self) -> &IntMatrix {
        &self.lifted
    }
    fn units(&self) -> &[BigInt] {
        &self.units
    }
    fn modulus(&self) -> &Modulus {
        &self.modulus
    }
}

/// Lifts the rows of `a`, a basis of a free submodule of `(Z/qZ)^n`, to
/// integer rows that extend to a basis of `Z^n`.
pub fn get_basis_finite(a: &IntMatrix, modulus: &Modulus) -> Result<LiftResult> {
    let (m, n) = (a.rows(), a.cols());
    if m > n {
        return Err(Error::TooManyRows { rows: m, cols: n });
    }
    let q = modulus.value();
    let width = n + m;

    let mut r: Vec<Vec<BigInt>> = a
        .iter_rows()
        .enumerate()
        .map(|(i, row)| {
            let mut v: Vec<BigInt> = row.iter().map(|x| symmetric_residue(x, q)).collect();
            v.extend((0..m).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }));
            v
        })
        .collect();
    let mut c = IntMatrix::identity(m).to_rows();
    let mut ind: Vec<usize> = (0..n).collect();
    let mut units = vec![BigInt::one(); m];
    let mut repairs = Vec::with_capacity(m);

    for i in 0..m {
        let checkdet: Vec<BigInt> = (0..n)
            .map(|col| {
                let mut v = r[i][col].clone();
                for h in 0..i {
                    v -= &r[i][ind[h]] * &r[h][col];
                }
                v
            })
            .collect();
        let k = checkdet
            .iter()
            .position(|x| x.gcd(q).is_one())
            .ok_or_else(|| Error::NotABasisModP { row: i, modulus: q.clone() })?;
        if ind[i] != k {
            let at = ind.iter().position(|&x| x == k).expect("ind is a permutation");
            ind.swap(i, at);
        }

        let u = unit_inverse(&checkdet[k], modulus)?;
        for x in r[i][..n].iter_mut() {
            *x = symmetric_residue(&(&u * &*x), q);
        }
        units[i] = u;

        // clear below the permuted diagonal
        for h in 0..i {
            let t = symmetric_residue(&r[i][ind[h]], q);
            if t.is_zero() {
                continue;
            }
            sub_row_multiple(&mut r, i, h, &t);
            add_col_multiple(&mut c, h, i, &t);
        }
        // clear above it
        for h in (0..i).rev() {
            let t = symmetric_residue(&r[h][ind[i]], q);
            if t.is_zero() {
                continue;
            }
            sub_row_multiple(&mut r, h, i, &t);
            add_col_multiple(&mut c, i, h, &t);
        }

        repairs.push(repair(&mut r, &mut c, &ind, i, k, m, q));
    }

    let pivots = ColumnPermutation::from_columns(ind[..m].iter().copied())?;
    let witness = IntMatrix::from_rows(r.iter().map(|row| row[..n].to_vec()).collect())
        .unwrap_or_else(|_| IntMatrix::zeros(m, n));
    let transform_inverse = IntMatrix::from_rows(r.iter().map(|row| row[n..width].to_vec()).collect())
        .unwrap_or_else(|_| IntMatrix::zeros(m, m));
    let transform = IntMatrix::from_rows(c).unwrap_or_else(|_| IntMatrix::zeros(m, m));

    // R reduced into symmetric residues, with the pivot columns replaced by the
    // exact identity they are congruent to.
    let mut reduced = witness.map(|x| symmetric_residue(x, q));
    for (row, &col) in ind[..m].iter().enumerate() {
        for h in 0..m {
            reduced[(h, col)] = if h == row { BigInt::one() } else { BigInt::zero() };
        }
    }
    let lifted = transform.mul(&reduced)?;

    Ok(LiftResult {
        lifted,
        units,
        pivots,
        reduction_witness: witness,
        modulus: modulus.clone(),
        transform,
        transform_inverse,
        repairs,
    })
}

/// Correction of a pivot-position entry of `C` that is a nonzero multiple
/// of `q`, using earlier columns whose entries above row `k` vanish.
///
/// The original procedure decrements `k` before reading the entry it just
/// tested; here the tested row is used, and steps that would fail (index out
/// of range, zero gcd) are declined instead.
fn repair(
    r: &mut [Vec<BigInt>],
    c: &mut [Vec<BigInt>],
    ind: &[usize],
    i: usize,
    k: usize,
    m: usize,
    q: &BigInt,
) -> RepairRecord {
    let col = ind[i];
    let mut record = RepairRecord { row: i, event: RepairEvent::NotTriggered, residue_flag: false };
    if k >= m || col >= m {
        return record;
    }
    let entry = c[k][col].clone();
    record.residue_flag = !symmetric_residue(&entry, q).is_zero();
    if entry.is_zero() || !entry.is_multiple_of(q) {
        return record;
    }
    record.event = RepairEvent::Declined;

    let candidates: Vec<usize> = (0..i)
        .filter(|&j| (0..k).all(|row| c[row][j].is_zero()))
        .map(|j| ind[j])
        .collect();
    if candidates.is_empty() || candidates.iter().any(|&g| g >= m) {
        return record;
    }
    let values: Vec<BigInt> = candidates.iter().map(|&g| c[k][g].clone()).collect();
    let combo = mgcdex(&values);
    if combo.gcd.is_zero() || !symmetric_residue(&entry, &(&combo.gcd * q)).is_zero() {
        record.residue_flag = true;
        return record;
    }
    let temp = &entry / &combo.gcd;
    for (b, &g) in combo.coefficients.iter().zip(&candidates) {
        let x = b * &temp;
        if x.is_zero() {
            continue;
        }
        // column i of C -= x * column g; row g of R += x * row i
        for row in c.iter_mut() {
            let delta = &x * &row[g];
            row[i] -= delta;
        }
        let src = r[i].clone();
        for (dst, s) in r[g].iter_mut().zip(&src) {
            *dst += &x * s;
        }
    }
    record.event = RepairEvent::Applied { columns: candidates };
    record
}

// row dst -= t * row src
fn sub_row_multiple(r: &mut [Vec<BigInt>], dst: usize, src: usize, t: &BigInt) {
    let src_row = r[src].clone();
    for (d, s) in r[dst].iter_mut().zip(&src_row) {
        *d -= t * s;
    }
}

// column dst += t * column src
fn add_col_multiple(c: &mut [Vec<BigInt>], dst: usize, src: usize, t: &BigInt) {
    for row in c.iter_mut() {
        let delta = t * &row[src];
        row[dst] += delta;
    }
}

/// Applies the recorded inverse transform to `lifted`, recovering a matrix
/// congruent to the reduction witness modulo `q`.
pub fn replay_reduction(result: &LiftResult) -> Result<IntMatrix> {
    result.transform_inverse.mul(&result.lifted)
}

/// Row/column positions where the replay and the witness differ modulo `q`.
pub fn replay_mismatches(result: &LiftResult) -> Result<Vec<(usize, usize)>> {
    let replay = replay_reduction(result)?;
    let q = result.modulus.value();
    let witness = &result.reduction_witness;
    let mut out = Vec::new();
    for row in 0..witness.rows() {
        for col in 0..witness.cols() {
            if !(&replay[(row, col)] - &witness[(row, col)]).is_multiple_of(q) {
                out.push((row, col));
            }
        }
    }
    Ok(out)
}
