//! Dense univariate polynomials and rational functions over Q.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num::{One, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::rational::{fmt_q, int, Rational};

/// Coefficients in ascending degree, no trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Polynomial {
    coeffs: Vec<Rational>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    pub fn constant(c: Rational) -> Self {
        Polynomial::new(vec![c])
    }

    pub fn one() -> Self {
        Polynomial::constant(Rational::one())
    }

    /// c X^d
    pub fn monomial(c: Rational, d: usize) -> Self {
        let mut v = vec![Rational::zero(); d + 1];
        v[d] = c;
        Polynomial::new(v)
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn coeff(&self, d: usize) -> Rational {
        self.coeffs.get(d).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports None.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        self.coeffs.iter().rev().fold(Rational::zero(), |acc, c| acc * x + c)
    }

    pub fn derivative(&self) -> Polynomial {
        Polynomial::new(self.coeffs.iter().enumerate().skip(1).map(|(d, c)| c * int(d as i64)).collect())
    }

    pub fn scale(&self, c: &Rational) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|x| x * c).collect())
    }

    /// X^d P(1/X), requiring d >= deg P.
    pub fn reversed(&self, d: usize) -> Polynomial {
        assert!(self.degree().is_none_or(|k| k <= d));
        Polynomial::new((0..=d).map(|i| self.coeff(d - i)).collect())
    }

    pub fn to_json(&self) -> Value {
        json!(self.coeffs.iter().map(fmt_q).collect::<Vec<_>>())
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self + &(-rhs)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::default();
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(d, c)| match d {
                0 => format!("{c}"),
                1 => format!("({c})X"),
                _ => format!("({c})X^{d}"),
            })
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

/// numerator / denominator with a monic denominator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DensityPolynomial {
    num: Polynomial,
    den: Polynomial,
}

impl DensityPolynomial {
    pub fn new(num: Polynomial, den: Polynomial) -> Result<Self> {
        let lead = den.coeffs().last().cloned().ok_or(Error::DenominatorVanishes)?;
        let inv = lead.recip();
        Ok(DensityPolynomial { num: num.scale(&inv), den: den.scale(&inv) })
    }

    pub fn from_poly(p: Polynomial) -> Self {
        DensityPolynomial { num: p, den: Polynomial::one() }
    }

    pub fn numerator(&self) -> &Polynomial {
        &self.num
    }

    pub fn denominator(&self) -> &Polynomial {
        &self.den
    }

    pub fn eval(&self, x: &Rational) -> Result<Rational> {
        let d = self.den.eval(x);
        if d.is_zero() {
            return Err(Error::DenominatorVanishes);
        }
        Ok(self.num.eval(x) / d)
    }

    pub fn mul(&self, other: &DensityPolynomial) -> DensityPolynomial {
        DensityPolynomial::new(&self.num * &other.num, &self.den * &other.den).expect("nonzero denominators")
    }

    pub fn to_json(&self) -> Value {
        json!({ "numerator": self.num.to_json(), "denominator": self.den.to_json() })
    }
}

impl fmt::Display for DensityPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == Polynomial::one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "[{}] / [{}]", self.num, self.den)
        }
    }
}

/// d/dX at X = 1 by the quotient rule.
pub fn derivative_at_1(a: &DensityPolynomial) -> Result<Rational> {
    let one = Rational::one();
    let d = a.den.eval(&one);
    if d.is_zero() {
        return Err(Error::DenominatorVanishes);
    }
    let n = a.num.eval(&one);
    let dn = a.num.derivative().eval(&one);
    let dd = a.den.derivative().eval(&one);
    Ok((dn * &d - n * dd) / (&d * &d))
}
