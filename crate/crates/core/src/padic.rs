//! Scalar p-adic data: valuations, unit parts, square classes of units, the
//! quadratic character and Hilbert symbols at every place of Q.

use std::fmt;
use std::ops::Mul;

use num::bigint::BigInt;
use num::{Integer, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rational::{is_prime, mod_pow, Rational};

/// An odd rational prime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OddPrime(u64);

impl OddPrime {
    pub fn new(p: u64) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if p == 2 {
            return Err(Error::EvenPrime(p));
        }
        Ok(OddPrime(p))
    }

    pub fn get(self) -> u64 {
        self.0
    }

    pub fn place(self) -> Place {
        Place::Finite(self.0)
    }

    /// Smallest positive integer that is a nonsquare mod p.
    pub fn least_nonsquare(self) -> u64 {
        (2..self.0)
            .find(|&u| legendre_u64(u, self.0) == -1)
            .expect("every odd prime has a nonsquare")
    }
}

impl fmt::Display for OddPrime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Serialize for OddPrime {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_u64(self.0)
    }
}

/// A place of Q.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Place {
    Finite(u64),
    Infinite,
}

impl Place {
    pub fn finite(p: u64) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        Ok(Place::Finite(p))
    }

    pub fn prime(self) -> Option<u64> {
        match self {
            Place::Finite(p) => Some(p),
            Place::Infinite => None,
        }
    }
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Finite(p) => write!(f, "{p}"),
            Place::Infinite => write!(f, "inf"),
        }
    }
}

impl Serialize for Place {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Class of a p-adic unit modulo squares.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum UnitClass {
    Square,
    Nonsquare,
}

impl UnitClass {
    pub fn from_sign(s: i8) -> Self {
        if s >= 0 {
            UnitClass::Square
        } else {
            UnitClass::Nonsquare
        }
    }

    pub fn sign(self) -> i8 {
        match self {
            UnitClass::Square => 1,
            UnitClass::Nonsquare => -1,
        }
    }

    /// Smallest positive integer representative of this class mod p.
    pub fn representative(self, p: OddPrime) -> u64 {
        match self {
            UnitClass::Square => 1,
            UnitClass::Nonsquare => p.least_nonsquare(),
        }
    }
}

impl Mul for UnitClass {
    type Output = UnitClass;
    fn mul(self, rhs: UnitClass) -> UnitClass {
        UnitClass::from_sign(self.sign() * rhs.sign())
    }
}

impl Serialize for UnitClass {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_i8(self.sign())
    }
}

fn bigint_valuation(n: &BigInt, p: u64) -> (i64, BigInt) {
    let pb = BigInt::from(p);
    let mut n = n.clone();
    let mut v = 0;
    loop {
        let (q, r) = n.div_rem(&pb);
        if !r.is_zero() {
            return (v, n);
        }
        n = q;
        v += 1;
    }
}

/// `x = p^v * u` with `u` a p-adic unit; returns `v`.
pub fn valuation(x: &Rational, p: u64) -> Result<i64> {
    Ok(split_unit(x, p)?.0)
}

/// The unit part `u` of `x = p^v * u`.
pub fn unit_part(x: &Rational, p: u64) -> Result<Rational> {
    Ok(split_unit(x, p)?.1)
}

pub fn split_unit(x: &Rational, p: u64) -> Result<(i64, Rational)> {
    if x.is_zero() {
        return Err(Error::ValuationOfZero);
    }
    let (vn, n) = bigint_valuation(x.numer(), p);
    let (vd, d) = bigint_valuation(x.denom(), p);
    Ok((vn - vd, Rational::new(n, d)))
}

fn legendre_u64(a: u64, p: u64) -> i8 {
    let a = a % p;
    if a == 0 {
        return 0;
    }
    if mod_pow(a, (p - 1) / 2, p) == 1 {
        1
    } else {
        -1
    }
}

/// Legendre symbol (n/p) for an odd prime p; 0 when p | n.
pub fn legendre(n: &BigInt, p: u64) -> i8 {
    let r = n.mod_floor(&BigInt::from(p)).to_u64().expect("residue fits");
    legendre_u64(r, p)
}

/// The quadratic character of a p-adic unit: +1 iff it is a square.
pub fn chi(u: &Rational, p: OddPrime) -> Result<UnitClass> {
    if u.is_zero() || valuation(u, p.get())? != 0 {
        return Err(Error::NotAUnit(u.to_string()));
    }
    let l = legendre(&(u.numer() * u.denom()), p.get());
    Ok(UnitClass::from_sign(l))
}

/// chi(-1) = (-1)^((p-1)/2).
pub fn chi_minus_one(p: OddPrime) -> UnitClass {
    if p.get() % 4 == 1 {
        UnitClass::Square
    } else {
        UnitClass::Nonsquare
    }
}

/// Odd rational unit at 2 reduced mod 8 (num * den^-1 = num * den mod 8).
fn mod8(u: &Rational) -> u32 {
    let prod = u.numer() * u.denom();
    prod.mod_floor(&BigInt::from(8)).to_u32().expect("small")
}

/// Local Hilbert symbol (a, b)_v.
pub fn hilbert(a: &Rational, b: &Rational, v: Place) -> Result<i8> {
    if a.is_zero() || b.is_zero() {
        return Err(Error::ZeroArgument);
    }
    match v {
        Place::Infinite => Ok(if a.is_negative() && b.is_negative() { -1 } else { 1 }),
        Place::Finite(2) => {
            let (alpha, u) = split_unit(a, 2)?;
            let (beta, w) = split_unit(b, 2)?;
            let (u, w) = (mod8(&u), mod8(&w));
            let eps = |x: u32| ((x - 1) / 2) % 2;
            let omega = |x: u32| ((x * x - 1) / 8) % 2;
            let e = eps(u) * eps(w)
                + (alpha.rem_euclid(2) as u32) * omega(w)
                + (beta.rem_euclid(2) as u32) * omega(u);
            Ok(if e % 2 == 0 { 1 } else { -1 })
        }
        Place::Finite(p) => {
            let (alpha, u) = split_unit(a, p)?;
            let (beta, w) = split_unit(b, p)?;
            let mut s: i8 = 1;
            if (alpha * beta).rem_euclid(2) == 1 && p % 4 == 3 {
                s = -s;
            }
            if beta.rem_euclid(2) == 1 {
                s *= legendre(&(u.numer() * u.denom()), p);
            }
            if alpha.rem_euclid(2) == 1 {
                s *= legendre(&(w.numer() * w.denom()), p);
            }
            Ok(s)
        }
    }
}

/// Primes at which a or b is not a unit, together with 2.
pub fn bad_primes(values: &[&Rational]) -> Vec<u64> {
    let mut ps = vec![2u64];
    for x in values {
        ps.extend(crate::rational::prime_factors(x.numer()));
        ps.extend(crate::rational::prime_factors(x.denom()));
    }
    ps.sort_unstable();
    ps.dedup();
    ps
}

/// Product of (a,b)_v over v in {2, primes dividing ab, inf}; all other
/// places contribute +1.
pub fn hilbert_product(a: &Rational, b: &Rational) -> Result<i8> {
    let mut s = hilbert(a, b, Place::Infinite)?;
    for p in bad_primes(&[a, b]) {
        s *= hilbert(a, b, Place::Finite(p))?;
    }
    Ok(s)
}
