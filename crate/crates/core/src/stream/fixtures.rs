//! Named row-finite streams used by tests and the command line.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arith::Modulus;
use crate::error::{Error, Result};
use crate::matrix::{RowStream, SparseRow};
use crate::oracle::random_basis_mod_q;

/// Coefficient of a banded fixture: a fixed integer or the modulus `q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Coefficient {
    Value(BigInt),
    Q,
}

impl Coefficient {
    fn resolve(&self, modulus: &Modulus) -> BigInt {
        match self {
            Coefficient::Value(v) => v.clone(),
            Coefficient::Q => modulus.value().clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Fixture {
    /// `e_0, e_1, ...`
    Identity,
    /// Row `i` is `e_i + c e_{i+1}`.
    Banded(Coefficient),
    /// Row `i` is `e_i + c e_{i-1}`.
    Lower(Coefficient),
    /// Diagonal sum of random bases modulo `q` of size 1 to 3.
    Blocks(u64),
    /// Row 0 is `p e_0 + e_1`, row `i > 0` is `e_{i+1}`: column 0 never gets a pivot.
    NoPivotZero,
}

impl Fixture {
    pub fn stream(&self, modulus: &Modulus) -> RowStream {
        match self {
            Fixture::Identity => RowStream::from_fn(|i| Some(SparseRow::unit(i))),
            Fixture::Banded(c) => {
                let c = c.resolve(modulus);
                RowStream::from_fn(move |i| Some(SparseRow::from_pairs([(i, BigInt::one()), (i + 1, c.clone())])))
            }
            Fixture::Lower(c) => {
                let c = c.resolve(modulus);
                RowStream::from_fn(move |i| {
                    let mut row = SparseRow::unit(i);
                    if i > 0 {
                        row.set(i - 1, c.clone());
                    }
                    Some(row)
                })
            }
            Fixture::Blocks(seed) => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let modulus = modulus.clone();
                let mut queue: VecDeque<SparseRow> = VecDeque::new();
                let mut base = 0usize;
                RowStream::from_fn(move |_| {
                    if queue.is_empty() {
                        let size = rng.gen_range(1..=3);
                        let block = random_basis_mod_q(size, &modulus, rng.gen(), 3 * size);
                        for row in block.iter_rows() {
                            queue.push_back(SparseRow::from_pairs(
                                row.iter().enumerate().map(|(c, v)| (base + c, v.clone())),
                            ));
                        }
                        base += size;
                    }
                    queue.pop_front()
                })
            }
            Fixture::NoPivotZero => {
                let p = modulus.prime().clone();
                RowStream::from_fn(move |i| {
                    Some(if i == 0 {
                        SparseRow::from_pairs([(0, p.clone()), (1, BigInt::one())])
                    } else {
                        SparseRow::unit(i + 1)
                    })
                })
            }
        }
    }
}

impl FromStr for Fixture {
    type Err = Error;

    /// `identity`, `banded:<c>`, `lower:<c>`, `blocks:<seed>` or `nopivot0`,
    /// where `<c>` is an integer or the letter `q`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::parse(1, format!("unknown fixture {s:?}"));
        let coefficient = |v: &str| -> Result<Coefficient> {
            if v == "q" {
                Ok(Coefficient::Q)
            } else {
                v.parse().map(Coefficient::Value).map_err(|_| bad())
            }
        };
        match s.split_once(':') {
            None if s == "identity" => Ok(Fixture::Identity),
            None if s == "nopivot0" => Ok(Fixture::NoPivotZero),
            Some(("banded", c)) => Ok(Fixture::Banded(coefficient(c)?)),
            Some(("lower", c)) => Ok(Fixture::Lower(coefficient(c)?)),
            Some(("blocks", seed)) => seed.parse().map(Fixture::Blocks).map_err(|_| bad()),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for Fixture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let coefficient = |c: &Coefficient| match c {
            Coefficient::Q => "q".to_string(),
            Coefficient::Value(v) => v.to_string(),
        };
        match self {
            Fixture::Identity => f.write_str("identity"),
            Fixture::Banded(c) => write!(f, "banded:{}", coefficient(c)),
            Fixture::Lower(c) => write!(f, "lower:{}", coefficient(c)),
            Fixture::Blocks(seed) => write!(f, "blocks:{seed}"),
            Fixture::NoPivotZero => f.write_str("nopivot0"),
        }
    }
}
