//! The free lattice ring of a finite boolean algebra, in atom coordinates.
//!
//! A boolean algebra with `k` atoms is represented by bitsets over
//! `{0..k-1}`. An element of the ring is the integer vector of its atom
//! coordinates; ring operations are coordinatewise.

use std::collections::HashSet;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::IntMatrix;
use crate::oracle::hermite_normal_form;

pub const MAX_ATOMS: usize = 64;
/// Largest atom count accepted by [`free_basis`], which scans all `2^k - 1`
/// nonzero idempotents.
pub const MAX_FREE_BASIS_ATOMS: usize = 12;

/// An idempotent, as the set of atoms below it.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Idempotent(pub u64);

impl Idempotent {
    pub fn from_atoms(atoms: impl IntoIterator<Item = usize>) -> Self {
        Idempotent(atoms.into_iter().fold(0, |acc, a| acc | (1u64 << a)))
    }

    pub fn atoms(self) -> impl Iterator<Item = usize> {
        (0..MAX_ATOMS).filter(move |&a| self.0 >> a & 1 == 1)
    }

    pub fn contains(self, atom: usize) -> bool {
        atom < MAX_ATOMS && self.0 >> atom & 1 == 1
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub fn meet(self, other: Self) -> Self {
        Idempotent(self.0 & other.0)
    }

    pub fn join(self, other: Self) -> Self {
        Idempotent(self.0 | other.0)
    }

    /// `ef = 0`.
    pub fn is_orthogonal(self, other: Self) -> bool {
        self.0 & other.0 == 0
    }

    fn max_atom(self) -> Option<usize> {
        (self.0 != 0).then(|| 63 - self.0.leading_zeros() as usize)
    }
}

impl fmt::Display for Idempotent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let atoms: Vec<String> = self.atoms().map(|a| a.to_string()).collect();
        write!(f, "{{{}}}", atoms.join(","))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FiniteBooleanAlgebra {
    atoms: usize,
}

impl FiniteBooleanAlgebra {
    pub fn new(atoms: usize) -> Result<Self> {
        if atoms > MAX_ATOMS {
            return Err(Error::TooManyAtoms { atoms, max: MAX_ATOMS });
        }
        Ok(FiniteBooleanAlgebra { atoms })
    }

    pub fn atom_count(self) -> usize {
        self.atoms
    }

    pub fn zero(self) -> Idempotent {
        Idempotent(0)
    }

    pub fn one(self) -> Idempotent {
        Idempotent(if self.atoms == 64 { u64::MAX } else { (1u64 << self.atoms) - 1 })
    }

    pub fn complement(self, e: Idempotent) -> Idempotent {
        Idempotent(!e.0 & self.one().0)
    }

    pub fn contains(self, e: Idempotent) -> bool {
        e.0 & !self.one().0 == 0
    }

    /// Nonzero elements in increasing bitset order.
    pub fn nonzero_elements(self) -> impl Iterator<Item = Idempotent> {
        (1..=self.one().0).map(Idempotent)
    }

    fn check(self, e: Idempotent) -> Result<()> {
        if self.contains(e) {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange { index: e.max_atom().unwrap_or(0), len: self.atoms })
        }
    }
}

/// An element of the lattice ring, by atom coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LatticeRingElement {
    pub coords: Vec<BigInt>,
}

impl LatticeRingElement {
    pub fn new(coords: Vec<BigInt>) -> Self {
        LatticeRingElement { coords }
    }

    pub fn from_i64(coords: &[i64]) -> Self {
        Self::new(coords.iter().copied().map(BigInt::from).collect())
    }

    pub fn from_idempotent(e: Idempotent, k: usize) -> Self {
        Self::new((0..k).map(|a| if e.contains(a) { BigInt::one() } else { BigInt::zero() }).collect())
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    /// The idempotent this element equals, if it is a 0/1 vector.
    pub fn as_idempotent(&self) -> Option<Idempotent> {
        let mut bits = 0u64;
        for (a, x) in self.coords.iter().enumerate() {
            if x.is_one() {
                bits |= 1u64 << a;
            } else if !x.is_zero() {
                return None;
            }
        }
        Some(Idempotent(bits))
    }
}

fn check_same_len(x: &LatticeRingElement, y: &LatticeRingElement) -> Result<()> {
    if x.len() == y.len() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { left_rows: 1, left_cols: x.len(), right_rows: 1, right_cols: y.len() })
    }
}

pub fn s_add(x: &LatticeRingElement, y: &LatticeRingElement) -> Result<LatticeRingElement> {
    check_same_len(x, y)?;
    Ok(LatticeRingElement::new(x.coords.iter().zip(&y.coords).map(|(a, b)| a + b).collect()))
}

pub fn s_mul(x: &LatticeRingElement, y: &LatticeRingElement) -> Result<LatticeRingElement> {
    check_same_len(x, y)?;
    Ok(LatticeRingElement::new(x.coords.iter().zip(&y.coords).map(|(a, b)| a * b).collect()))
}

/// Collapses a formal sum `sum e_j n_j` to atom coordinates.
pub fn to_canonical(alg: FiniteBooleanAlgebra, terms: &[(Idempotent, BigInt)]) -> Result<LatticeRingElement> {
    let mut coords = vec![BigInt::zero(); alg.atom_count()];
    for (e, n) in terms {
        alg.check(*e)?;
        for a in e.atoms() {
            coords[a] += n;
        }
    }
    Ok(LatticeRingElement::new(coords))
}

/// A single generator `sum f_i m_i` with pairwise orthogonal `f_i`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OrthogonalDecomposition {
    pub pairs: Vec<(Idempotent, BigInt)>,
}

impl OrthogonalDecomposition {
    pub fn generator(&self, k: usize) -> LatticeRingElement {
        let mut coords = vec![BigInt::zero(); k];
        for (f, m) in &self.pairs {
            for a in f.atoms().filter(|&a| a < k) {
                coords[a] += m;
            }
        }
        LatticeRingElement::new(coords)
    }
}

/// Orthogonal decomposition of the ideal generated by `generators`.
///
/// Atom `a` gets `g_a = gcd |generators[j][a]|`; atoms with equal nonzero
/// `g_a` are grouped into one idempotent. Pairs are ordered by their
/// smallest atom.
pub fn decompose_ideal(alg: FiniteBooleanAlgebra, generators: &[LatticeRingElement]) -> Result<OrthogonalDecomposition> {
    let k = alg.atom_count();
    for g in generators {
        if g.len() != k {
            return Err(Error::DimensionMismatch { left_rows: 1, left_cols: k, right_rows: 1, right_cols: g.len() });
        }
    }
    let mut pairs: Vec<(Idempotent, BigInt)> = Vec::new();
    for a in 0..k {
        let g = generators.iter().fold(BigInt::zero(), |acc, x| acc.gcd(&x.coords[a]));
        if g.is_zero() {
            continue;
        }
        match pairs.iter_mut().find(|(_, m)| *m == g) {
            Some((f, _)) => *f = f.join(Idempotent::from_atoms([a])),
            None => pairs.push((Idempotent::from_atoms([a]), g)),
        }
    }
    Ok(OrthogonalDecomposition { pairs })
}

/// True when no two distinct orthogonal subfamilies of `set` have the same
/// sum.
pub fn satisfies_family_condition(set: &[Idempotent]) -> bool {
    let mut sums = HashSet::new();
    let mut ok = true;
    enumerate_orthogonal(set, 0, Idempotent(0), &mut |sum| ok &= sums.insert(sum));
    ok
}

// Visits the sum of every pairwise orthogonal subfamily of set[from..] that
// can be added to `acc`.
fn enumerate_orthogonal(set: &[Idempotent], from: usize, acc: Idempotent, visit: &mut impl FnMut(Idempotent)) {
    visit(acc);
    for i in from..set.len() {
        if set[i].is_orthogonal(acc) {
            enumerate_orthogonal(set, i + 1, acc.join(set[i]), visit);
        }
    }
}

/// Whether the atom-coordinate rows of `set` extend to a basis of `Z^k`.
pub fn is_primitive(set: &[Idempotent], k: usize) -> bool {
    if set.len() > k {
        return false;
    }
    if set.is_empty() {
        return true;
    }
    let rows: Vec<Vec<BigInt>> = set.iter().map(|&e| LatticeRingElement::from_idempotent(e, k).coords).collect();
    let m = IntMatrix::from_rows(rows).expect("rows of equal length");
    let hnf = hermite_normal_form(&m.transpose());
    let pivots = hnf.pivots();
    pivots.len() == set.len() && pivots.iter().all(|(_, _, v)| v.is_one())
}

fn check_order(alg: FiniteBooleanAlgebra, order: &[Idempotent]) -> Result<()> {
    let k = alg.atom_count();
    if k > MAX_FREE_BASIS_ATOMS {
        return Err(Error::TooManyAtoms { atoms: k, max: MAX_FREE_BASIS_ATOMS });
    }
    let expected = (1usize << k) - 1;
    let distinct: HashSet<_> = order.iter().collect();
    if order.len() != expected || distinct.len() != expected || order.iter().any(|&e| e.is_zero() || !alg.contains(e)) {
        return Err(Error::InvalidOrder(format!(
            "expected each of the {expected} nonzero idempotents exactly once, got {} entries",
            order.len()
        )));
    }
    Ok(())
}

/// Free basis of the lattice ring chosen greedily along `order`, which must
/// list every nonzero idempotent exactly once.
///
/// An idempotent is kept when the enlarged set still has distinct sums over
/// its orthogonal subfamilies and its coordinate rows still extend to a
/// basis of `Z^k`. The result has `k` elements and a unimodular coordinate
/// matrix.
pub fn free_basis(alg: FiniteBooleanAlgebra, order: &[Idempotent]) -> Result<Vec<Idempotent>> {
    check_order(alg, order)?;
    let k = alg.atom_count();
    let mut chosen = Vec::with_capacity(k);
    for &e in order {
        if chosen.len() == k {
            break;
        }
        chosen.push(e);
        if !(satisfies_family_condition(&chosen) && is_primitive(&chosen, k)) {
            chosen.pop();
        }
    }
    Ok(chosen)
}

/// The greedy scan using only the orthogonal-family condition. It can stop
/// with a set that is not a basis; kept for comparison.
pub fn free_basis_family_only(alg: FiniteBooleanAlgebra, order: &[Idempotent]) -> Result<Vec<Idempotent>> {
    check_order(alg, order)?;
    let mut chosen = Vec::new();
    for &e in order {
        chosen.push(e);
        if !satisfies_family_condition(&chosen) {
            chosen.pop();
        }
    }
    Ok(chosen)
}

/// Atom-coordinate matrix of a set of idempotents, one row each.
pub fn coordinate_matrix(set: &[Idempotent], k: usize) -> IntMatrix {
    IntMatrix::from_rows(set.iter().map(|&e| LatticeRingElement::from_idempotent(e, k).coords).collect())
        .unwrap_or_else(|_| IntMatrix::zeros(0, k))
}

/// Rank over the 2-element field of the coordinate rows.
pub fn rank_mod_two(set: &[Idempotent]) -> usize {
    let mut basis: Vec<u64> = Vec::new();
    for &e in set {
        let mut v = e.0;
        for &b in &basis {
            v = v.min(v ^ b);
        }
        if v != 0 {
            basis.push(v);
            basis.sort_unstable_by(|a, b| b.cmp(a));
        }
    }
    basis.len()
}

impl fmt::Display for LatticeRingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coords.iter().map(|x| x.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// `|x|` for every coordinate; convenient for ideal comparisons.
pub fn abs_coords(x: &LatticeRingElement) -> LatticeRingElement {
    LatticeRingElement::new(x.coords.iter().map(Signed::abs).collect())
}
