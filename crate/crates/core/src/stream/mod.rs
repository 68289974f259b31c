//! Streaming elimination modulo `p^nu` over a row-finite `omega x omega`
//! integer matrix.
//!
//! Each loop consumes one source row. The state keeps a reduction workspace
//! `R` (never holding a nonzero multiple of `q`), candidate lifted rows `C`,
//! the units, the pivot map `J` and the square matrix `M` with `C = M R`.
//! A row of `C` is reported once it can no longer change.

pub mod fixtures;

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::arith::{mgcdex, unit_inverse, Modulus};
use crate::error::{Error, Result};
use crate::matrix::{ColumnPermutation, IntMatrix, RowStream, SparseRow};
use crate::oracle::LiftedBasis;

/// Hooks called at fixed points inside [`EliminationState::step_loop_observed`].
pub trait LoopObserver {
    /// After the pivot of the working row has been made exactly 1.
    fn after_pivot_normalized(&mut self, _state: &EliminationState) {}
    /// After `M` was rebuilt and `C` recomputed as `M R`.
    fn after_recompute(&mut self, _state: &EliminationState) {}
}

impl LoopObserver for () {}

pub struct EliminationState {
    modulus: Modulus,
    source: RowStream,
    consumed: Vec<SparseRow>,
    // rows 0..I are processed; row I, when present, is the pending source row
    r: Vec<Vec<BigInt>>,
    c: Vec<Vec<BigInt>>,
    m: Vec<Vec<BigInt>>,
    units: Vec<BigInt>,
    pivots: ColumnPermutation,
    width: usize,
    loops: usize,
    stabilized_at: Vec<Option<usize>>,
    exhausted: bool,
}

impl EliminationState {
    /// Prepares a run and reads the first source row.
    pub fn new(source: RowStream, modulus: Modulus) -> Result<Self> {
        let mut state = EliminationState {
            modulus,
            source,
            consumed: Vec::new(),
            r: Vec::new(),
            c: Vec::new(),
            m: Vec::new(),
            units: Vec::new(),
            pivots: ColumnPermutation::new(),
            width: 0,
            loops: 0,
            stabilized_at: Vec::new(),
            exhausted: false,
        };
        state.read_next()?;
        Ok(state)
    }

    pub fn modulus(&self) -> &Modulus {
        &self.modulus
    }

    /// Number of processed rows, `I`.
    pub fn working_row(&self) -> usize {
        self.c.len()
    }

    pub fn loops(&self) -> usize {
        self.loops
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn is_exhausted(&self) -> bool {
        self.exhausted
    }

    /// Processed rows of `R` (the pending row is excluded).
    pub fn r_rows(&self) -> &[Vec<BigInt>] {
        &self.r[..self.c.len().min(self.r.len())]
    }

    pub fn c_rows(&self) -> &[Vec<BigInt>] {
        &self.c
    }

    pub fn m_rows(&self) -> &[Vec<BigInt>] {
        &self.m
    }

    pub fn units(&self) -> &[BigInt] {
        &self.units
    }

    pub fn pivots(&self) -> &ColumnPermutation {
        &self.pivots
    }

    /// Loop count at which each processed row was first found stable.
    pub fn stabilized_at(&self) -> &[Option<usize>] {
        &self.stabilized_at
    }

    /// The consumed source rows `0..rows` as a dense `rows x width` block.
    pub fn consumed_prefix(&self, rows: usize) -> IntMatrix {
        IntMatrix::from_rows(self.consumed[..rows].iter().map(|r| r.to_dense(self.width)).collect())
            .unwrap_or_else(|_| IntMatrix::zeros(rows, self.width))
    }

    /// `[R_{a, J(b)}]` over the rows that currently have a pivot, including
    /// the working row while a loop is in progress.
    pub fn pivot_block(&self) -> IntMatrix {
        let n = self.pivots.len();
        let cols = self.pivots.columns();
        IntMatrix::from_rows((0..n).map(|a| cols.iter().map(|&j| self.r[a][j].clone()).collect()).collect())
            .unwrap_or_else(|_| IntMatrix::zeros(0, 0))
    }

    /// Runs one loop without observation.
    pub fn step_loop(&mut self) -> Result<()> {
        self.step_loop_observed(&mut ())
    }

    /// Runs one full elimination loop on the pending row.
    ///
    /// On [`Error::NotABasisModP`] the state is left mid-loop and should be
    /// discarded.
    pub fn step_loop_observed(&mut self, observer: &mut impl LoopObserver) -> Result<()> {
        let i = self.c.len();
        if self.r.len() <= i {
            return Err(Error::StreamExhausted { requested: i + 1, available: i });
        }
        let q = self.modulus.value().clone();
        let p = self.modulus.prime().clone();

        self.clear_working_row(i);

        let pivot = self.r[i]
            .iter()
            .position(|x| !x.is_multiple_of(&p))
            .ok_or_else(|| Error::NotABasisModP { row: i, modulus: q.clone() })?;
        self.pivots.push(pivot)?;

        let u = unit_inverse(&self.r[i][pivot], &self.modulus)?;
        let scaled: Vec<BigInt> = self.consumed[i]
            .to_dense(self.width)
            .into_iter()
            .map(|x| {
                let v = &u * x;
                if v.is_multiple_of(&q) {
                    BigInt::zero()
                } else {
                    v
                }
            })
            .collect();
        self.units.push(u);
        self.r[i] = scaled.clone();
        self.c.push(scaled);

        self.clear_working_row(i);

        // the pivot is now 1 modulo q; make it exactly 1
        let d = &self.r[i][pivot] - BigInt::one();
        debug_assert!(d.is_multiple_of(&q));
        self.r[i][pivot] -= &d;
        self.c[i][pivot] -= &d;
        observer.after_pivot_normalized(self);

        for j in 0..self.width {
            let x = &self.r[i][j];
            if !x.is_zero() && x.is_multiple_of(&q) {
                let x = std::mem::take(&mut self.r[i][j]);
                self.c[i][j] -= x;
            }
        }

        // clear the pivot column above the working row
        for k in 0..i {
            let f = self.r[k][pivot].clone();
            if !f.is_zero() {
                let (top, rest) = self.r.split_at_mut(i);
                sub_multiple(&mut top[k], &rest[0], &f);
            }
        }

        for row in self.r[..=i].iter_mut() {
            for x in row.iter_mut() {
                if !x.is_zero() && x.is_multiple_of(&q) {
                    *x = BigInt::zero();
                }
            }
        }

        let n = i + 1;
        let cols = self.pivots.columns().to_vec();
        self.m = (0..n).map(|a| cols.iter().map(|&j| self.c[a][j].clone()).collect()).collect();
        self.c = mat_mul(&self.m, &self.r[..n], self.width);
        observer.after_recompute(self);

        self.repair_nonpivot_columns(&q);

        self.loops += 1;
        self.stabilized_at.push(None);
        self.read_next()?;
        self.record_stabilization();
        Ok(())
    }

    // Subtracts R[i][J(K)] times row K from row i for every earlier pivot row.
    fn clear_working_row(&mut self, i: usize) {
        let (top, rest) = self.r.split_at_mut(i);
        let row = &mut rest[0];
        for (k, &j) in self.pivots.columns().iter().enumerate().take(i) {
            let f = row[j].clone();
            if !f.is_zero() {
                sub_multiple(row, &top[k], &f);
            }
        }
    }

    // For each nonpivot column whose first nonzero C entry is divisible by q,
    // try to cancel that entry through pivot columns sharing its first row.
    fn repair_nonpivot_columns(&mut self, q: &BigInt) {
        let n = self.c.len();
        let first_nonzero = |c: &[Vec<BigInt>], col: usize| (0..n).find(|&r| !c[r][col].is_zero());
        for l in 0..self.width {
            if self.pivots.is_pivot(l) {
                continue;
            }
            let Some(k) = first_nonzero(&self.c, l) else { continue };
            let target = self.c[k][l].clone();
            if !target.is_multiple_of(q) {
                continue;
            }
            let set: Vec<(usize, usize)> = self
                .pivots
                .columns()
                .iter()
                .enumerate()
                .filter(|&(row, &col)| first_nonzero(&self.c, col) == Some(k) && !self.r[row][l].is_zero())
                .map(|(row, &col)| (row, col))
                .collect();
            if set.is_empty() {
                continue;
            }
            let values: Vec<BigInt> = set.iter().map(|&(_, col)| self.c[k][col].clone()).collect();
            let combo = mgcdex(&values);
            if combo.gcd.is_zero() || !target.is_multiple_of(&(q * &combo.gcd)) {
                continue;
            }
            let f = &target / &combo.gcd;
            for (b, &(row, _)) in combo.coefficients.iter().zip(&set) {
                self.r[row][l] -= b * &f;
            }
            for a in 0..n {
                let mut v = BigInt::zero();
                for b in 0..n {
                    if !self.m[a][b].is_zero() && !self.r[b][l].is_zero() {
                        v += &self.m[a][b] * &self.r[b][l];
                    }
                }
                self.c[a][l] = v;
            }
            debug_assert!(self.c[k][l].is_zero());
        }
    }

    fn read_next(&mut self) -> Result<()> {
        if self.exhausted {
            return Ok(());
        }
        match self.source.next_row()? {
            None => {
                self.exhausted = true;
                Ok(())
            }
            Some(row) => {
                let q = self.modulus.value();
                self.width = self.width.max(row.support_end());
                let zeroed: Vec<BigInt> = row
                    .to_dense(self.width)
                    .into_iter()
                    .map(|x| if x.is_multiple_of(q) { BigInt::zero() } else { x })
                    .collect();
                self.consumed.push(row);
                self.r.push(zeroed);
                let w = self.width;
                for row in self.r.iter_mut().chain(self.c.iter_mut()) {
                    row.resize(w, BigInt::zero());
                }
                Ok(())
            }
        }
    }

    fn record_stabilization(&mut self) {
        let loops = self.loops;
        for a in 0..self.c.len() {
            if self.stabilized_at[a].is_none() && (self.exhausted || self.stabilization_check(a)) {
                self.stabilized_at[a] = Some(loops);
            }
        }
    }

    /// True when every nonzero entry of row `row` of `C` lies in a pivot
    /// column whose `R` row is exactly the matching identity row. Such a row
    /// is never modified again. Rows not yet processed are never stable.
    pub fn stabilization_check(&self, row: usize) -> bool {
        row < self.c.len() && self.blocking_columns(row).is_empty()
    }

    // Support columns of a C row that are not yet covered by identity rows of R.
    fn blocking_columns(&self, row: usize) -> Vec<usize> {
        self.c[row]
            .iter()
            .enumerate()
            .filter(|(_, x)| !x.is_zero())
            .map(|(j, _)| j)
            .filter(|&j| match self.pivots.row_of(j) {
                Some(pr) if pr < self.c.len() => !is_unit_row(&self.r[pr], j),
                _ => true,
            })
            .collect()
    }

    /// Loops until rows `0..target_rows` are all stable.
    ///
    /// A finite source is run to its end, after which every row is final.
    pub fn run_until(&mut self, target_rows: usize, max_loops: usize) -> Result<StreamLiftReport> {
        self.run_until_observed(target_rows, max_loops, &mut ())
    }

    pub fn run_until_observed(
        &mut self,
        target_rows: usize,
        max_loops: usize,
        observer: &mut impl LoopObserver,
    ) -> Result<StreamLiftReport> {
        loop {
            if self.stable_prefix() >= target_rows {
                return Ok(self.report(target_rows));
            }
            if self.r.len() <= self.c.len() {
                return Err(Error::StreamExhausted { requested: target_rows, available: self.c.len() });
            }
            if self.loops >= max_loops {
                return Err(Error::StabilizationTimeout(Box::new(self.timeout_diagnostic(target_rows))));
            }
            self.step_loop_observed(observer)?;
        }
    }

    /// Length of the longest prefix of stable rows.
    pub fn stable_prefix(&self) -> usize {
        self.stabilized_at.iter().take_while(|s| s.is_some()).count()
    }

    /// Snapshot of rows `0..rows`. Rows that are not yet stable are included
    /// as they currently stand.
    pub fn report(&self, rows: usize) -> StreamLiftReport {
        let rows = rows.min(self.c.len());
        let lifted = IntMatrix::from_rows(self.c[..rows].to_vec()).unwrap_or_else(|_| IntMatrix::zeros(rows, self.width));
        StreamLiftReport {
            lifted,
            units: self.units[..rows].to_vec(),
            pivots: self.pivots.truncated(rows),
            loops_executed: self.loops,
            stabilized_at: self.stabilized_at[..rows].to_vec(),
            input: self.consumed_prefix(rows),
            modulus: self.modulus.clone(),
        }
    }

    fn timeout_diagnostic(&self, target_rows: usize) -> TimeoutDiagnostic {
        let blocking: Vec<usize> =
            (0..target_rows.min(self.c.len())).filter(|&a| self.stabilized_at[a].is_none()).collect();
        let mut missing: Vec<usize> = blocking.iter().flat_map(|&a| self.blocking_columns(a)).collect();
        missing.sort_unstable();
        missing.dedup();
        TimeoutDiagnostic {
            loops: self.loops,
            target_rows,
            processed_rows: self.c.len(),
            stable_prefix: self.stable_prefix(),
            blocking_rows: blocking,
            missing_identity_columns: missing,
        }
    }
}

impl fmt::Debug for EliminationState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EliminationState")
            .field("modulus", &self.modulus)
            .field("working_row", &self.c.len())
            .field("width", &self.width)
            .field("loops", &self.loops)
            .field("pivots", &self.pivots.columns())
            .field("exhausted", &self.exhausted)
            .finish_non_exhaustive()
    }
}

fn is_unit_row(row: &[BigInt], j: usize) -> bool {
    row.iter().enumerate().all(|(k, x)| if k == j { x.is_one() } else { x.is_zero() })
}

// dst -= f * src
fn sub_multiple(dst: &mut [BigInt], src: &[BigInt], f: &BigInt) {
    for (d, s) in dst.iter_mut().zip(src) {
        if !s.is_zero() {
            *d -= f * s;
        }
    }
}

fn mat_mul(a: &[Vec<BigInt>], b: &[Vec<BigInt>], width: usize) -> Vec<Vec<BigInt>> {
    a.iter()
        .map(|arow| {
            let mut out = vec![BigInt::zero(); width];
            for (x, brow) in arow.iter().zip(b) {
                if x.is_zero() {
                    continue;
                }
                for (o, y) in out.iter_mut().zip(brow) {
                    if !y.is_zero() {
                        *o += x * y;
                    }
                }
            }
            out
        })
        .collect()
}

/// Stable prefix of a streaming run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StreamLiftReport {
    /// Stable rows of `C`, at the width reached by the run.
    pub lifted: IntMatrix,
    pub units: Vec<BigInt>,
    pub pivots: ColumnPermutation,
    pub loops_executed: usize,
    pub stabilized_at: Vec<Option<usize>>,
    /// The consumed source rows matching `lifted`.
    pub input: IntMatrix,
    pub modulus: Modulus,
}

impl LiftedBasis for StreamLiftReport {
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

/// Why [`EliminationState::run_until`] gave up.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TimeoutDiagnostic {
    pub loops: usize,
    pub target_rows: usize,
    pub processed_rows: usize,
    pub stable_prefix: usize,
    /// Rows below the target that are not yet stable.
    pub blocking_rows: Vec<usize>,
    /// Columns in their support still lacking an identity row in `R`.
    pub missing_identity_columns: Vec<usize>,
}

impl fmt::Display for TimeoutDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "no stabilization after {} loops: {} of {} target rows stable; blocking rows {:?}; \
             columns without an identity row {:?}",
            self.loops, self.stable_prefix, self.target_rows, self.blocking_rows, self.missing_identity_columns
        )
    }
}

/// Lifts a whole finite matrix through the streaming engine.
pub fn lift_stream_finite(a: &IntMatrix, modulus: &Modulus) -> Result<StreamLiftReport> {
    if a.rows() > a.cols() {
        return Err(Error::TooManyRows { rows: a.rows(), cols: a.cols() });
    }
    let mut state = EliminationState::new(RowStream::from_matrix(a), modulus.clone())?;
    let mut report = state.run_until(a.rows(), a.rows())?;
    // zero columns at the right edge are not seen by the stream
    if report.lifted.cols() < a.cols() {
        report.lifted = pad_columns(&report.lifted, a.cols());
        report.input = a.clone();
    }
    Ok(report)
}

fn pad_columns(m: &IntMatrix, cols: usize) -> IntMatrix {
    let mut out = IntMatrix::zeros(m.rows(), cols);
    for r in 0..m.rows() {
        for c in 0..m.cols() {
            out[(r, c)] = m[(r, c)].clone();
        }
    }
    out
}
