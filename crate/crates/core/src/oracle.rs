//! Independent certification of lifts.
//!
//! Nothing in this module calls into either elimination engine or into the
//! residue helpers of [`crate::arith`]; it works with plain `num-integer`
//! arithmetic so that a bug in the engines cannot hide itself here.

use num_bigint::BigInt;
use num_integer::{ExtendedGcd, Integer};
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::arith::Modulus;
use crate::error::{Error, Result};
use crate::matrix::IntMatrix;

/// Anything that claims to be a lift: rows `y_i`, units `u_i` and the prime
/// power they are congruent under.
pub trait LiftedBasis {
    fn lifted(&self) -> &IntMatrix;
    fn units(&self) -> &[BigInt];
    fn modulus(&self) -> &Modulus;
}

/// Exact determinant by fraction-free (Bareiss) elimination.
pub fn det_exact(m: &IntMatrix) -> Result<BigInt> {
    if !m.is_square() {
        return Err(Error::NotSquare { rows: m.rows(), cols: m.cols() });
    }
    let n = m.rows();
    if n == 0 {
        return Ok(BigInt::one());
    }
    let mut a = m.to_rows();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(k, i);
                    sign = -sign;
                }
                None => return Ok(BigInt::zero()),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    Ok(sign * &a[n - 1][n - 1])
}

/// Row-style Hermite normal form `H = T * M`.
///
/// Convention: nonzero rows first, each pivot strictly right of the one
/// above, pivots positive, entries above a pivot reduced into `[0, pivot)`.
/// `T` is unimodular.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HermiteForm {
    pub h: IntMatrix,
    pub transform: IntMatrix,
}

impl HermiteForm {
    /// `(row, column, value)` of every pivot.
    pub fn pivots(&self) -> Vec<(usize, usize, BigInt)> {
        let mut out = Vec::new();
        for r in 0..self.h.rows() {
            if let Some(c) = self.h.row(r).iter().position(|x| !x.is_zero()) {
                out.push((r, c, self.h[(r, c)].clone()));
            }
        }
        out
    }

    pub fn rank(&self) -> usize {
        self.pivots().len()
    }
}

pub fn hermite_normal_form(m: &IntMatrix) -> HermiteForm {
    let (rows, cols) = (m.rows(), m.cols());
    let mut h = m.to_rows();
    let mut t = IntMatrix::identity(rows).to_rows();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        for i in r + 1..rows {
            if h[i][c].is_zero() {
                continue;
            }
            let (a, b) = (h[r][c].clone(), h[i][c].clone());
            let ExtendedGcd { gcd, x, y, .. } = a.extended_gcd(&b);
            let (a_g, b_g) = (&a / &gcd, &b / &gcd);
            combine_rows(&mut h, r, i, &x, &y, &b_g, &a_g);
            combine_rows(&mut t, r, i, &x, &y, &b_g, &a_g);
        }
        if h[r][c].is_zero() {
            continue;
        }
        if h[r][c].is_negative() {
            negate(&mut h[r]);
            negate(&mut t[r]);
        }
        for i in 0..r {
            let f = h[i][c].div_floor(&h[r][c]);
            if !f.is_zero() {
                sub_multiple(&mut h, i, r, &f);
                sub_multiple(&mut t, i, r, &f);
            }
        }
        r += 1;
    }
    HermiteForm {
        h: IntMatrix::from_rows(h).unwrap_or_else(|_| IntMatrix::zeros(rows, cols)),
        transform: IntMatrix::from_rows(t).expect("square transform"),
    }
}

// (row_r, row_i) <- (x*row_r + y*row_i, -b_g*row_r + a_g*row_i); determinant 1.
fn combine_rows(m: &mut [Vec<BigInt>], r: usize, i: usize, x: &BigInt, y: &BigInt, b_g: &BigInt, a_g: &BigInt) {
    for k in 0..m[r].len() {
        let (top, bottom) = (&m[r][k], &m[i][k]);
        let new_top = x * top + y * bottom;
        let new_bottom = a_g * bottom - b_g * top;
        m[r][k] = new_top;
        m[i][k] = new_bottom;
    }
}

fn sub_multiple(m: &mut [Vec<BigInt>], dst: usize, src: usize, f: &BigInt) {
    for k in 0..m[dst].len() {
        let delta = f * &m[src][k];
        m[dst][k] -= delta;
    }
}

fn negate(row: &mut [BigInt]) {
    for x in row {
        *x = -std::mem::take(x);
    }
}

/// True iff the rows of the square matrix `m` form a basis of `(Z/qZ)^n`,
/// i.e. its determinant is coprime to `p`.
pub fn is_basis_mod_q(m: &IntMatrix, modulus: &Modulus) -> Result<bool> {
    let det = det_exact(m)?;
    Ok(!det.is_multiple_of(modulus.prime()))
}

/// Rank of `m` over the field with `p` elements.
pub fn rank_mod_p(m: &IntMatrix, p: &BigInt) -> usize {
    let mut a: Vec<Vec<BigInt>> = m
        .iter_rows()
        .map(|r| r.iter().map(|x| x.mod_floor(p)).collect())
        .collect();
    let mut rank = 0;
    for c in 0..m.cols() {
        let Some(piv) = (rank..a.len()).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(rank, piv);
        let inv = a[rank][c].extended_gcd(p).x.mod_floor(p);
        for x in a[rank].iter_mut() {
            *x = (&*x * &inv).mod_floor(p);
        }
        for i in 0..a.len() {
            if i != rank && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for k in 0..a[i].len() {
                    let v = (&a[i][k] - &f * &a[rank][k]).mod_floor(p);
                    a[i][k] = v;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Outcome of checking a lift.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub congruence_ok: Vec<bool>,
    pub unimodular_ok: bool,
    pub basis_mod_q_ok: bool,
    pub units_ok: bool,
    pub details: Vec<String>,
}

impl VerificationReport {
    pub fn all_ok(&self) -> bool {
        self.units_ok && self.unimodular_ok && self.basis_mod_q_ok && self.congruence_ok.iter().all(|&b| b)
    }
}

// Above this many maximal minors the second unimodularity route is skipped.
const MINOR_LIMIT: usize = 5000;

/// Checks every clause of the lifting contract:
///
/// 1. each unit is coprime to `p`;
/// 2. `lifted[i] = units[i] * input[i]` modulo `q`, entrywise;
/// 3. the lifted rows extend to a basis of `Z^n` (for square inputs:
///    `|det| = 1`), certified both by determinants and by a Hermite form;
/// 4. the input rows are independent modulo `p`.
pub fn verify_lift(input: &IntMatrix, result: &impl LiftedBasis) -> Result<VerificationReport> {
    let lifted = result.lifted();
    let units = result.units();
    let modulus = result.modulus();
    if lifted.rows() != input.rows() || lifted.cols() != input.cols() || units.len() != input.rows() {
        return Err(Error::ShapeMismatch(format!(
            "input {}x{}, lifted {}x{}, {} units",
            input.rows(),
            input.cols(),
            lifted.rows(),
            lifted.cols(),
            units.len()
        )));
    }
    let (p, q) = (modulus.prime(), modulus.value());
    let mut details = Vec::new();

    let units_ok = units.iter().all(|u| !u.is_multiple_of(p));
    if !units_ok {
        details.push(format!("some unit is divisible by {p}"));
    }

    let congruence_ok: Vec<bool> = (0..input.rows())
        .map(|i| {
            let ok = (0..input.cols())
                .all(|c| (&lifted[(i, c)] - &units[i] * &input[(i, c)]).is_multiple_of(q));
            if !ok {
                details.push(format!("row {i}: lifted row is not units[{i}] * input row modulo {q}"));
            }
            ok
        })
        .collect();

    let (rows, cols) = (lifted.rows(), lifted.cols());
    let unimodular_ok = if rows > cols {
        details.push("more rows than columns".into());
        false
    } else if rows == cols {
        let det = det_exact(lifted)?;
        let hnf = hermite_normal_form(lifted);
        let by_det = det.abs().is_one();
        let by_hnf = hnf.h == IntMatrix::identity(rows);
        if by_det != by_hnf {
            details.push(format!("determinant ({det}) and Hermite form disagree"));
        }
        if !by_det {
            details.push(format!("det(lifted) = {det}"));
        }
        by_det && by_hnf
    } else {
        let hnf = hermite_normal_form(&lifted.transpose());
        let pivots = hnf.pivots();
        let by_hnf = pivots.len() == rows && pivots.iter().all(|(_, _, v)| v.is_one());
        if !by_hnf {
            details.push("lifted rows do not extend to a basis (Hermite form of transpose)".into());
        }
        let by_minors = match maximal_minor_gcd(lifted)? {
            Some(g) => {
                let ok = g.is_one();
                if ok != by_hnf {
                    details.push(format!("gcd of maximal minors ({g}) and Hermite form disagree"));
                }
                ok
            }
            None => by_hnf,
        };
        by_hnf && by_minors
    };

    let basis_mod_q_ok = if rows == cols {
        is_basis_mod_q(input, modulus)?
    } else {
        rank_mod_p(input, p) == rows
    };
    if !basis_mod_q_ok {
        details.push(format!("input rows are not a basis modulo {q}"));
    }

    Ok(VerificationReport { congruence_ok, unimodular_ok, basis_mod_q_ok, units_ok, details })
}

/// Gcd of all maximal minors of a wide matrix, or `None` when there are too
/// many of them to enumerate.
fn maximal_minor_gcd(m: &IntMatrix) -> Result<Option<BigInt>> {
    let (rows, cols) = (m.rows(), m.cols());
    if binomial(cols, rows).is_none_or(|n| n > MINOR_LIMIT) {
        return Ok(None);
    }
    let mut g = BigInt::zero();
    let mut chosen: Vec<usize> = (0..rows).collect();
    loop {
        let minor = IntMatrix::from_rows(
            m.iter_rows().map(|r| chosen.iter().map(|&c| r[c].clone()).collect()).collect(),
        )?;
        g = g.gcd(&det_exact(&minor)?);
        if g.is_one() {
            return Ok(Some(g));
        }
        // next combination in lexicographic order
        let Some(i) = (0..rows).rev().find(|&i| chosen[i] != i + cols - rows) else {
            return Ok(Some(g));
        };
        chosen[i] += 1;
        for j in i + 1..rows {
            chosen[j] = chosen[j - 1] + 1;
        }
    }
}

fn binomial(n: usize, k: usize) -> Option<usize> {
    let k = k.min(n - k.min(n));
    (0..k).try_fold(1usize, |acc, i| acc.checked_mul(n - i).map(|v| v / (i + 1)))
}

/// Random `n x n` basis of `(Z/qZ)^n`: `ops` random elementary row additions
/// and unit row scalings applied to the identity, followed by adding a random
/// multiple of `q` in `[-2q, 2q]` to every entry. Deterministic in `seed`.
pub fn random_basis_mod_q(n: usize, modulus: &Modulus, seed: u64, ops: usize) -> IntMatrix {
    random_basis_mod_q_with(n, modulus, seed, ops, 2)
}

/// As [`random_basis_mod_q`] with perturbation multiples drawn from
/// `[-max_perturbation, max_perturbation]`; zero disables the perturbation.
pub fn random_basis_mod_q_with(
    n: usize,
    modulus: &Modulus,
    seed: u64,
    ops: usize,
    max_perturbation: i64,
) -> IntMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = modulus.value();
    let p = modulus.prime();
    let coeff_bound = small_bound(q);
    let mut m = IntMatrix::identity(n);
    for _ in 0..ops {
        if n > 1 && rng.gen_bool(0.7) {
            let src = rng.gen_range(0..n);
            let mut dst = rng.gen_range(0..n - 1);
            if dst >= src {
                dst += 1;
            }
            let c = BigInt::from(rng.gen_range(-coeff_bound..=coeff_bound));
            m.add_row_multiple(src, dst, &c).expect("indices in range");
        } else {
            let r = rng.gen_range(0..n);
            let u = loop {
                let u = BigInt::from(rng.gen_range(-coeff_bound..=coeff_bound));
                if !u.is_multiple_of(p) {
                    break u;
                }
            };
            m.scale_row(r, &u).expect("index in range");
        }
    }
    if max_perturbation > 0 {
        for r in 0..n {
            for c in 0..n {
                let k = rng.gen_range(-max_perturbation..=max_perturbation);
                m[(r, c)] += q * BigInt::from(k);
            }
        }
    }
    m
}

fn small_bound(q: &BigInt) -> i64 {
    i64::try_from(q).unwrap_or(i64::MAX / 2).clamp(1, 1 << 20)
}

/// Plain online Gauss-Jordan elimination over `Z/qZ` with least nonnegative
/// residues: rows are included one at a time, earlier pivot columns cleared,
/// the first unit entry becomes the pivot (scaled to 1), and the new pivot
/// column is cleared above. No row permutations.
#[derive(Clone, Debug)]
pub struct ModQEliminator {
    p: BigInt,
    q: BigInt,
    rows: Vec<Vec<BigInt>>,
    pivots: Vec<usize>,
}

impl ModQEliminator {
    pub fn new(modulus: &Modulus) -> Self {
        ModQEliminator {
            p: modulus.prime().clone(),
            q: modulus.value().clone(),
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }

    /// Includes the next row; `Err(row index)` when it has no unit pivot.
    pub fn push_row(&mut self, row: &[BigInt]) -> std::result::Result<(), usize> {
        let q = self.q.clone();
        let width = row.len().max(self.rows.first().map_or(0, Vec::len));
        for r in self.rows.iter_mut() {
            r.resize(width, BigInt::zero());
        }
        let mut new: Vec<BigInt> = row.iter().map(|x| x.mod_floor(&q)).collect();
        new.resize(width, BigInt::zero());
        for (k, &pc) in self.pivots.iter().enumerate() {
            let f = new[pc].clone();
            if !f.is_zero() {
                for (x, y) in new.iter_mut().zip(&self.rows[k]) {
                    *x = (&*x - &f * y).mod_floor(&q);
                }
            }
        }
        let Some(pc) = new.iter().position(|x| !x.is_multiple_of(&self.p)) else {
            return Err(self.rows.len());
        };
        let inv = new[pc].extended_gcd(&q).x.mod_floor(&q);
        for x in new.iter_mut() {
            *x = (&*x * &inv).mod_floor(&q);
        }
        for r in self.rows.iter_mut() {
            let f = r[pc].clone();
            if !f.is_zero() {
                for j in 0..width {
                    r[j] = (&r[j] - &f * &new[j]).mod_floor(&q);
                }
            }
        }
        self.rows.push(new);
        self.pivots.push(pc);
        Ok(())
    }

    /// Reduced rows, least nonnegative residues.
    pub fn rows(&self) -> &[Vec<BigInt>] {
        &self.rows
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m(rows: &[&[i64]]) -> IntMatrix {
        IntMatrix::from_i64_rows(rows).unwrap()
    }

    fn big(v: i64) -> BigInt {
        BigInt::from(v)
    }

    /// Cofactor expansion, used as a second determinant implementation.
    fn det_cofactor(a: &[Vec<BigInt>]) -> BigInt {
        let n = a.len();
        if n == 0 {
            return BigInt::one();
        }
        (0..n)
            .map(|j| {
                let minor: Vec<Vec<BigInt>> =
                    a[1..].iter().map(|r| r.iter().enumerate().filter(|&(k, _)| k != j).map(|(_, x)| x.clone()).collect()).collect();
                let term = &a[0][j] * det_cofactor(&minor);
                if j % 2 == 0 { term } else { -term }
            })
            .sum()
    }

    fn is_hermite(h: &IntMatrix) -> bool {
        let mut last_pivot: Option<usize> = None;
        let mut seen_zero = false;
        for r in 0..h.rows() {
            match h.row(r).iter().position(|x| !x.is_zero()) {
                None => seen_zero = true,
                Some(c) => {
                    if seen_zero || last_pivot.is_some_and(|l| c <= l) {
                        return false;
                    }
                    let piv = &h[(r, c)];
                    if !piv.is_positive() {
                        return false;
                    }
                    if (0..r).any(|i| h[(i, c)].is_negative() || h[(i, c)] >= *piv) {
                        return false;
                    }
                    last_pivot = Some(c);
                }
            }
        }
        true
    }

    #[test]
    fn det_examples() {
        assert_eq!(det_exact(&IntMatrix::identity(4)).unwrap(), big(1));
        assert_eq!(det_exact(&m(&[&[2, 1], &[1, 1]])).unwrap(), big(1));
        assert_eq!(det_exact(&m(&[&[2, 0], &[0, 3]])).unwrap(), big(6));
        assert_eq!(det_exact(&m(&[&[0, 1], &[1, 0]])).unwrap(), big(-1));
        assert!(matches!(det_exact(&IntMatrix::zeros(2, 3)), Err(Error::NotSquare { .. })));
    }

    #[test]
    fn hnf_examples() {
        let id = hermite_normal_form(&IntMatrix::identity(3));
        assert_eq!(id.h, IntMatrix::identity(3));
        assert_eq!(id.transform, IntMatrix::identity(3));

        let a = m(&[&[2, 4], &[1, 3]]);
        let hf = hermite_normal_form(&a);
        assert_eq!(hf.h, m(&[&[1, 1], &[0, 2]]));
        assert_eq!(hf.transform.mul(&a).unwrap(), hf.h);
        assert_eq!(det_exact(&hf.transform).unwrap().abs(), big(1));

        let z = hermite_normal_form(&m(&[&[0, 0], &[3, 6]]));
        assert_eq!(z.h, m(&[&[3, 6], &[0, 0]]));
    }

    #[test]
    fn basis_mod_q_examples() {
        let md = Modulus::new(2, 3).unwrap();
        assert!(is_basis_mod_q(&IntMatrix::identity(3), &md).unwrap());
        assert!(!is_basis_mod_q(&m(&[&[2, 0], &[0, 1]]), &md).unwrap());
        let md = Modulus::new(5, 2).unwrap();
        assert!(is_basis_mod_q(&random_basis_mod_q(4, &md, 11, 20), &md).unwrap());
    }

    #[test]
    fn generator_examples() {
        let md = Modulus::new(3, 2).unwrap();
        assert_eq!(random_basis_mod_q_with(5, &md, 1, 0, 0), IntMatrix::identity(5));
        assert_eq!(random_basis_mod_q(6, &md, 7, 18), random_basis_mod_q(6, &md, 7, 18));
        assert_ne!(random_basis_mod_q(6, &md, 7, 18), random_basis_mod_q(6, &md, 8, 18));
        for seed in 0..50 {
            let g = random_basis_mod_q(1 + (seed as usize % 7), &md, seed, 12);
            assert!(is_basis_mod_q(&g, &md).unwrap());
        }
    }

    struct Plain {
        lifted: IntMatrix,
        units: Vec<BigInt>,
        modulus: Modulus,
    }

    impl LiftedBasis for Plain {
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

    #[test]
    fn verify_trivial_and_perturbed() {
        let modulus = Modulus::new(3, 2).unwrap();
        let input = IntMatrix::identity(3);
        let mut lift = Plain { lifted: input.clone(), units: vec![big(1); 3], modulus };
        let report = verify_lift(&input, &lift).unwrap();
        assert!(report.all_ok(), "{report:?}");

        lift.lifted[(1, 2)] += 1;
        let report = verify_lift(&input, &lift).unwrap();
        assert_eq!(report.congruence_ok, vec![true, false, true]);
        assert!(!report.all_ok());

        lift.units[0] = big(3);
        assert!(!verify_lift(&input, &lift).unwrap().units_ok);

        let short = Plain { lifted: IntMatrix::identity(2), units: vec![big(1); 2], modulus: lift.modulus.clone() };
        assert!(matches!(verify_lift(&input, &short), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn verify_wide_lift() {
        let modulus = Modulus::new(2, 2).unwrap();
        let input = m(&[&[1, 1, 4], &[0, 2, 1]]);
        let ok = Plain { lifted: m(&[&[1, 1, 0], &[0, 2, 1]]), units: vec![big(1); 2], modulus: modulus.clone() };
        assert!(verify_lift(&input, &ok).unwrap().all_ok());
        let not_primitive = Plain { lifted: m(&[&[1, 1, 0], &[4, 6, 1]]), units: vec![big(1), big(1)], modulus };
        let input2 = m(&[&[1, 1, 0], &[0, 2, 1]]);
        let r = verify_lift(&input2, &not_primitive).unwrap();
        // rows (1,1,0), (4,6,1): minors 2, 1, 1 -> still primitive
        assert!(r.unimodular_ok);
        let bad = Plain { lifted: m(&[&[2, 0, 0], &[0, 1, 0]]), units: vec![big(1), big(1)], modulus: r_mod() };
        assert!(!verify_lift(&m(&[&[2, 0, 0], &[0, 1, 0]]), &bad).unwrap().unimodular_ok);
    }

    fn r_mod() -> Modulus {
        Modulus::new(3, 1).unwrap()
    }

    #[test]
    fn mod_q_eliminator_basics() {
        let md = Modulus::new(2, 2).unwrap();
        let mut e = ModQEliminator::new(&md);
        e.push_row(&[big(1), big(1)]).unwrap();
        e.push_row(&[big(1), big(2)]).unwrap();
        assert_eq!(e.rows(), &[vec![big(1), big(0)], vec![big(0), big(1)]]);
        assert_eq!(e.pivots(), &[0, 1]);
        let mut f = ModQEliminator::new(&md);
        f.push_row(&[big(2), big(6)]).unwrap_err();
    }

    fn small_square(n: usize) -> impl Strategy<Value = IntMatrix> {
        proptest::collection::vec(-9i64..10, n * n)
            .prop_map(move |v| IntMatrix::new(n, n, v.into_iter().map(BigInt::from).collect()).unwrap())
    }

    proptest! {
        #[test]
        fn bareiss_matches_cofactor(a in (1usize..5).prop_flat_map(small_square)) {
            prop_assert_eq!(det_exact(&a).unwrap(), det_cofactor(&a.to_rows()));
        }

        #[test]
        fn hnf_properties(rows in 1usize..5, cols in 1usize..5, v in proptest::collection::vec(-12i64..12, 16)) {
            let a = IntMatrix::new(rows, cols, v.into_iter().take(rows * cols).map(BigInt::from).collect()).unwrap();
            let hf = hermite_normal_form(&a);
            prop_assert_eq!(hf.transform.mul(&a).unwrap(), hf.h.clone());
            prop_assert_eq!(det_exact(&hf.transform).unwrap().abs(), big(1));
            prop_assert!(is_hermite(&hf.h));
        }

        #[test]
        fn det_is_signed_product_of_hnf_pivots(a in (1usize..5).prop_flat_map(small_square)) {
            let det = det_exact(&a).unwrap();
            let hf = hermite_normal_form(&a);
            let product: BigInt = if hf.rank() == a.rows() {
                hf.pivots().into_iter().map(|(_, _, v)| v).product()
            } else {
                BigInt::zero()
            };
            prop_assert_eq!(det.abs(), product);
        }
    }
}
