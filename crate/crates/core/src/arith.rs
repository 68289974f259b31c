//! Arbitrary-precision integer primitives shared by both elimination engines:
//! prime-power moduli, symmetric residues, unit inverses and the
//! multi-integer extended gcd.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// A prime power modulus `q = p^nu`.
///
/// Construction rejects anything that is not a power of a single prime: for a
/// modulus with two distinct prime factors `Z/qZ` splits as a product ring
/// while `Z` does not, so no lifting statement can hold.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Modulus {
    p: BigInt,
    nu: u32,
    q: BigInt,
}

impl Modulus {
    /// Builds `p^nu`, checking that `p` is prime.
    pub fn new(p: impl Into<BigInt>, nu: u32) -> Result<Self> {
        let p = p.into();
        if !is_prime(&p) {
            return Err(Error::NotPrime { p });
        }
        Self::new_trusted(p, nu)
    }

    /// Builds `p^nu` without testing `p` for primality. Only the cheap
    /// sanity checks (`p >= 2`, `nu >= 1`) are applied.
    pub fn new_trusted(p: impl Into<BigInt>, nu: u32) -> Result<Self> {
        let p = p.into();
        if p < BigInt::from(2) {
            return Err(Error::NotPrime { p });
        }
        if nu == 0 {
            return Err(Error::ZeroExponent);
        }
        let q = num_traits::pow(p.clone(), nu as usize);
        Ok(Modulus { p, nu, q })
    }

    /// Factors `q` and accepts it only if it is `p^nu` for a single prime `p`.
    pub fn from_prime_power(q: impl Into<BigInt>) -> Result<Self> {
        let q = q.into();
        let reject = || Error::NotAPrimePower { q: q.clone() };
        if q < BigInt::from(2) {
            return Err(reject());
        }
        let p = smallest_prime_factor(&q).ok_or_else(reject)?;
        let mut rest = q.clone();
        let mut nu = 0u32;
        while rest.is_multiple_of(&p) {
            rest /= &p;
            nu += 1;
        }
        if !rest.is_one() {
            return Err(reject());
        }
        Ok(Modulus { p, nu, q })
    }

    pub fn prime(&self) -> &BigInt {
        &self.p
    }

    pub fn exponent(&self) -> u32 {
        self.nu
    }

    /// The full prime power `p^nu`.
    pub fn value(&self) -> &BigInt {
        &self.q
    }

    /// True when `x` is invertible modulo `q`, i.e. not divisible by `p`.
    pub fn is_unit(&self, x: &BigInt) -> bool {
        !x.is_multiple_of(&self.p)
    }

    /// True when `x` is divisible by `q` (zero included).
    pub fn divides(&self, x: &BigInt) -> bool {
        x.is_multiple_of(&self.q)
    }

    pub fn residue(&self, x: &BigInt) -> BigInt {
        symmetric_residue(x, &self.q)
    }
}

impl fmt::Display for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}^{}", self.p, self.nu)
    }
}

/// Symmetric remainder of `x` modulo `m`, in the range `(-m/2, m/2]`.
///
/// For even `m` the representative `m/2` is returned rather than `-m/2`.
///
/// # Panics
/// If `m < 1`.
pub fn symmetric_residue(x: &BigInt, m: &BigInt) -> BigInt {
    assert!(m.is_positive(), "symmetric_residue: modulus must be positive");
    let r = x.mod_floor(m);
    if (&r << 1u32) > *m {
        r - m
    } else {
        r
    }
}

/// Inverse of `u` modulo `q = p^nu`, reported as a symmetric residue.
pub fn unit_inverse(u: &BigInt, modulus: &Modulus) -> Result<BigInt> {
    let q = modulus.value();
    let (g, s, _) = extended_gcd(&u.mod_floor(q), q);
    if !g.is_one() {
        return Err(Error::NotAUnit { value: u.clone(), modulus: q.clone() });
    }
    Ok(symmetric_residue(&s, q))
}

/// Two-term extended Euclid: returns `(g, s, t)` with `s*a + t*b = g >= 0`.
pub fn extended_gcd(a: &BigInt, b: &BigInt) -> (BigInt, BigInt, BigInt) {
    let (mut old_r, mut r) = (a.clone(), b.clone());
    let (mut old_s, mut s) = (BigInt::one(), BigInt::zero());
    let (mut old_t, mut t) = (BigInt::zero(), BigInt::one());
    while !r.is_zero() {
        let quot = old_r.div_floor(&r);
        let next_r = &old_r - &quot * &r;
        old_r = std::mem::replace(&mut r, next_r);
        let next_s = &old_s - &quot * &s;
        old_s = std::mem::replace(&mut s, next_s);
        let next_t = &old_t - &quot * &t;
        old_t = std::mem::replace(&mut t, next_t);
    }
    if old_r.is_negative() {
        (-old_r, -old_s, -old_t)
    } else {
        (old_r, old_s, old_t)
    }
}

/// A gcd together with Bezout coefficients for the vector it came from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GcdCombination {
    pub gcd: BigInt,
    pub coefficients: Vec<BigInt>,
}

impl GcdCombination {
    /// Evaluates `sum coefficients[i] * values[i]`.
    pub fn evaluate(&self, values: &[BigInt]) -> BigInt {
        self.coefficients.iter().zip(values).map(|(c, v)| c * v).sum()
    }
}

/// Gcd of a vector together with a linear combination of its entries giving it.
///
/// The fold is left to right: after entry `i` the running gcd `g` is replaced
/// by `a*g + b*v[i]`, coefficient `i` becomes `b`, and every earlier
/// coefficient is rescaled by `a`. The output is deterministic for a fixed
/// input; coefficient size is not minimized.
pub fn mgcdex(values: &[BigInt]) -> GcdCombination {
    let mut gcd = BigInt::zero();
    let mut coefficients: Vec<BigInt> = Vec::with_capacity(values.len());
    for v in values {
        let (g, a, b) = extended_gcd(&gcd, v);
        for c in coefficients.iter_mut() {
            *c *= &a;
        }
        coefficients.push(b);
        gcd = g;
    }
    GcdCombination { gcd, coefficients }
}

const TRIAL_DIVISION_LIMIT: u64 = 1_000_000_000_000;

/// Primality test: trial division for small inputs, Miller-Rabin over the
/// first twelve primes beyond that (exact below 3.3e24).
pub fn is_prime(n: &BigInt) -> bool {
    if *n < BigInt::from(2) {
        return false;
    }
    match n.to_u64() {
        Some(small) if small < TRIAL_DIVISION_LIMIT => trial_division_prime(small),
        _ => miller_rabin(n),
    }
}

fn trial_division_prime(n: u64) -> bool {
    if n < 4 {
        return n >= 2;
    }
    if n.is_multiple_of(2) || n.is_multiple_of(3) {
        return false;
    }
    let mut d = 5u64;
    while d * d <= n {
        if n.is_multiple_of(d) || n.is_multiple_of(d + 2) {
            return false;
        }
        d += 6;
    }
    true
}

fn miller_rabin(n: &BigInt) -> bool {
    const BASES: [u32; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    let one = BigInt::one();
    let n_minus_one = n - &one;
    let mut d = n_minus_one.clone();
    let mut s = 0u32;
    while d.is_even() {
        d >>= 1u32;
        s += 1;
    }
    'bases: for base in BASES {
        let a = BigInt::from(base);
        if a.is_multiple_of(n) {
            continue;
        }
        let mut x = a.modpow(&d, n);
        if x == one || x == n_minus_one {
            continue;
        }
        for _ in 1..s {
            x = x.modpow(&BigInt::from(2), n);
            if x == n_minus_one {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

/// Smallest prime factor by trial division; `None` when `n` is too large to
/// factor this way and is not itself prime.
fn smallest_prime_factor(n: &BigInt) -> Option<BigInt> {
    if is_prime(n) {
        return Some(n.clone());
    }
    let mut d = BigInt::from(2);
    let limit = BigInt::from(TRIAL_DIVISION_LIMIT);
    while &d * &d <= *n && d < limit {
        if n.is_multiple_of(&d) {
            return Some(d);
        }
        d += 1;
    }
    None
}
