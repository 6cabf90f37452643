//! Closed forms for local densities against S_r = S_0 + H_{2r} as
//! polynomials in X = p^-r: the unary factor, the ternary formula for the
//! complement of a represented 1, their product and the twisted density.

use std::fmt;

use num::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gkmult::gross_keating_exponents;
use crate::padic::{chi_minus_one, OddPrime, UnitClass};
use crate::poly::{DensityPolynomial, Polynomial};
use crate::quadform::{jordan_diagonalize, represents_local, twisted_space, SymMat};
use crate::rational::{frac, int, pow_i, Rational};

/// `diag(eps1 p^a1, eps2 p^a2, eps3 p^a3)` with a1 <= a2 <= a3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct GKTriple {
    pub a: [u32; 3],
    pub eps: [UnitClass; 3],
    pub p: OddPrime,
}

impl GKTriple {
    pub fn new(a: [u32; 3], eps: [UnitClass; 3], p: OddPrime) -> Result<Self> {
        if !(a[0] <= a[1] && a[1] <= a[2]) {
            return Err(Error::UnorderedExponents(a));
        }
        Ok(GKTriple { a, eps, p })
    }

    /// Signs +1/-1 for the unit classes.
    pub fn from_signs(a: [u32; 3], eps: [i8; 3], p: OddPrime) -> Result<Self> {
        GKTriple::new(a, eps.map(UnitClass::from_sign), p)
    }

    pub fn diag(&self) -> Vec<Rational> {
        (0..3)
            .map(|i| int(self.eps[i].representative(self.p) as i64) * pow_i(self.p.get(), self.a[i] as i64))
            .collect()
    }

    pub fn matrix(&self) -> SymMat {
        SymMat::diag(&self.diag())
    }

    /// `diag(1, eps1 p^a1, eps2 p^a2, eps3 p^a3)`.
    pub fn with_unit(&self) -> SymMat {
        let mut d = vec![int(1)];
        d.extend(self.diag());
        SymMat::diag(&d)
    }

    /// chi(-eps1 eps2)
    pub fn eps(&self) -> UnitClass {
        chi_minus_one(self.p) * self.eps[0] * self.eps[1]
    }
}

impl fmt::Display for GKTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = |e: UnitClass| if e == UnitClass::Square { '+' } else { '-' };
        write!(
            f,
            "a=({},{},{}) eps=({}{}{}) p={}",
            self.a[0],
            self.a[1],
            self.a[2],
            s(self.eps[0]),
            s(self.eps[1]),
            s(self.eps[2]),
            self.p
        )
    }
}

/// Every ordered triple with a3 <= a3_max and all 8 unit-class patterns.
pub fn catalogue(p: OddPrime, a3_max: u32) -> Vec<GKTriple> {
    let mut out = Vec::new();
    for a3 in 0..=a3_max {
        for a2 in 0..=a3 {
            for a1 in 0..=a2 {
                for bits in 0..8u8 {
                    let eps = [0, 1, 2].map(|i| if bits >> i & 1 == 0 { 1 } else { -1 });
                    out.push(GKTriple::from_signs([a1, a2, a3], eps, p).unwrap());
                }
            }
        }
    }
    out
}

/// Sign attached to the ternary form by the parity pattern of its exponents.
pub fn chi_tilde(t: &GKTriple) -> i8 {
    let [a1, a2, a3] = t.a.map(|x| x % 2);
    let c = |i: usize, j: usize| (chi_minus_one(t.p) * t.eps[i] * t.eps[j]).sign();
    if a1 == a2 && a2 == a3 {
        1
    } else if a1 == a2 {
        c(0, 1)
    } else if a2 == a3 {
        c(1, 2)
    } else {
        c(0, 2)
    }
}

/// `1 + chi(eps0) p^-2 X`, the density of `<eps0>` in S_r.
pub fn unary_density_factor(eps0: UnitClass, p: OddPrime) -> DensityPolynomial {
    let c = int(eps0.sign() as i64) * pow_i(p.get(), -2);
    DensityPolynomial::from_poly(Polynomial::new(vec![Rational::one(), c]))
}

/// The bracketed double sum of the ternary formula (without the prefactor).
pub fn kitaoka_bracket(t: &GKTriple) -> Polynomial {
    let [a1, a2, a3] = t.a.map(|x| x as i64);
    let p = t.p.get();
    let ct = int(chi_tilde(t) as i64);
    let same = (a1 - a2) % 2 == 0;
    let top = if same { (a1 + a2) / 2 - 1 } else { (a1 + a2 - 1) / 2 };
    let mut s = Polynomial::default();
    for l in 0..=top {
        let pl = pow_i(p, l);
        for k in 0..=a1.min(l) {
            let lo = Polynomial::monomial(pl.clone(), (2 * l - k) as usize);
            let hi = Polynomial::monomial(&pl * &ct, (a1 + a2 + a3 + k - 2 * l) as usize);
            s = &(&s + &lo) + &hi;
        }
    }
    if same {
        let e = int(t.eps().sign() as i64);
        let geo = Polynomial::new(vec![Rational::one(); a1 as usize + 1]);
        let alt = Polynomial::new((0..=a3 - a2).map(|j| num::pow(e.clone(), j as usize)).collect());
        let head = Polynomial::monomial(pow_i(p, (a1 + a2) / 2), a2 as usize);
        s = &s + &(&(&head * &geo) * &alt);
    }
    s
}

/// `(1 - p^-2 X)(1 - p^-2 X^2)`
fn kitaoka_prefactor(p: OddPrime) -> Polynomial {
    let c = -pow_i(p.get(), -2);
    let a = Polynomial::new(vec![Rational::one(), c.clone()]);
    let b = Polynomial::new(vec![Rational::one(), Rational::zero(), c]);
    &a * &b
}

/// Density of the ternary form in H_{2r+4} as a polynomial in X = p^-r.
pub fn kitaoka_ternary_poly(t: &GKTriple) -> DensityPolynomial {
    DensityPolynomial::from_poly(&kitaoka_prefactor(t.p) * &kitaoka_bracket(t))
}

/// A(X) = (unary factor of the represented 1) x (ternary polynomial of the
/// complement), valid when T represents 1 over Z_p.
pub fn assemble_a(t: &SymMat, p: OddPrime) -> Result<DensityPolynomial> {
    check_rank4(t)?;
    let unimodular = jordan_diagonalize(t, p)?.unimodular();
    match unimodular.as_slice() {
        [] => return Err(Error::ReductionNeedsUnimodular),
        [UnitClass::Nonsquare] => return Err(Error::ClosedFormNeedsSquareUnit),
        _ => {}
    }
    let gk = gross_keating_exponents(t, p)?;
    Ok(unary_density_factor(gk.eps0, p).mul(&kitaoka_ternary_poly(&gk.triple)))
}

fn check_rank4(t: &SymMat) -> Result<()> {
    if t.n() != 4 {
        return Err(Error::RankViolation(format!("expected a rank-4 form (got {})", t.n())));
    }
    Ok(())
}

/// The two factors of the twisted density under the reduction formula:
/// the unary density of `<1>` in the twisted lattice and the density of the
/// complement in the ramified norm form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TwistedFactors {
    #[serde(serialize_with = "crate::rational::serialize_q")]
    pub unary: Rational,
    #[serde(serialize_with = "crate::rational::serialize_q")]
    pub complement: Rational,
    #[serde(serialize_with = "crate::rational::serialize_q")]
    pub total: Rational,
}

/// Closed-form factor values: unary `1 - p^-1`, complement
/// `2 (1 + p^-1)(p + 1)`; their product is `2 (1 - p^-2)(p + 1)`.
pub fn twisted_factors(p: OddPrime) -> TwistedFactors {
    let inv = frac(1, p.get() as i64);
    let pp1 = int(p.get() as i64 + 1);
    let unary = Rational::one() - &inv;
    let complement = int(2) * (Rational::one() + &inv) * &pp1;
    let total = &unary * &complement;
    TwistedFactors { unary, complement, total }
}

/// `2 (1 + chi(-1) p^-1)(p + 1)`, the complement value carrying chi(-1);
/// it agrees with [`twisted_factors`] only when p = 1 mod 4.
pub fn twisted_complement_with_chi(p: OddPrime) -> Rational {
    let c = int(chi_minus_one(p).sign() as i64);
    int(2) * (Rational::one() + c * frac(1, p.get() as i64)) * int(p.get() as i64 + 1)
}

/// Density of T in the twisted lattice `<1> + ramified norm form`:
/// `2 (1 - p^-2)(p + 1)` when the twisted space represents T, else 0.
pub fn twisted_density(t: &SymMat, p: OddPrime) -> Result<Rational> {
    check_rank4(t)?;
    if !t.is_nonsingular() {
        return Err(Error::Singular("twisted density"));
    }
    if !t.is_p_integral(p.get()) {
        return Err(Error::NotPIntegral { what: "twisted density", p: p.get() });
    }
    if !crate::quadform::represents_one_over_zp(t, p)? {
        return Err(Error::DoesNotRepresentOne(p.get()));
    }
    if represents_local(&twisted_space(p), t, p.place())? {
        Ok(twisted_factors(p).total)
    } else {
        Ok(Rational::zero())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counting::{count_solutions, density_at, CountJob, Strategy, DEFAULT_STATE_BUDGET};
    use crate::poly::derivative_at_1;
    use crate::quadform::hyperbolic_diag;

    fn p3() -> OddPrime {
        OddPrime::new(3).unwrap()
    }

    fn one() -> Rational {
        Rational::one()
    }

    #[test]
    fn unary_examples() {
        let a = unary_density_factor(UnitClass::Square, p3());
        assert_eq!(a.numerator().coeffs(), &[int(1), frac(1, 9)]);
        assert_eq!(a.eval(&one()).unwrap(), frac(10, 9));
        let b = unary_density_factor(UnitClass::Nonsquare, p3());
        assert_eq!(b.eval(&one()).unwrap(), frac(8, 9));
    }

    #[test]
    fn chi_tilde_rows() {
        let p = p3();
        for bits in 0..8 {
            let eps = [0, 1, 2].map(|i| if bits >> i & 1 == 0 { 1 } else { -1 });
            assert_eq!(chi_tilde(&GKTriple::from_signs([0, 0, 0], eps, p).unwrap()), 1);
        }
        assert_eq!(chi_tilde(&GKTriple::from_signs([0, 0, 1], [1, 1, 1], p).unwrap()), -1);
        // a1 odd-one-out: chi(-eps2 eps3)
        let t = GKTriple::from_signs([0, 1, 1], [1, -1, 1], p).unwrap();
        assert_eq!(chi_tilde(&t), 1);
        let t = GKTriple::from_signs([0, 1, 1], [1, 1, 1], p).unwrap();
        assert_eq!(chi_tilde(&t), -1);
        // a2 odd-one-out: chi(-eps1 eps3)
        let t = GKTriple::from_signs([0, 1, 2], [1, 1, -1], p).unwrap();
        assert_eq!(chi_tilde(&t), 1);
        assert!(GKTriple::from_signs([1, 0, 2], [1, 1, 1], p).is_err());
    }

    #[test]
    fn ternary_values_at_one() {
        let p = p3();
        let v = |a, e| kitaoka_ternary_poly(&GKTriple::from_signs(a, e, p).unwrap()).eval(&one()).unwrap();
        assert_eq!(v([0, 0, 0], [1, 1, 1]), frac(64, 81));
        assert_eq!(v([0, 0, 1], [1, 1, 1]), int(0));
        assert_eq!(v([0, 1, 1], [1, 1, 1]), int(0));
    }

    #[test]
    fn ternary_matches_oracle_at_level_one() {
        // t = 2 is one past the largest exponent for a3 <= 1
        let h4 = hyperbolic_diag(2);
        for t in catalogue(p3(), 1) {
            let job = CountJob::new(h4.clone(), t.matrix(), p3(), 2, Strategy::Mitm).unwrap();
            let oracle = density_at(&job, DEFAULT_STATE_BUDGET).unwrap().value;
            assert_eq!(kitaoka_ternary_poly(&t).eval(&one()).unwrap(), oracle, "{t}");
        }
    }

    #[test]
    fn bracket_functional_equation() {
        for p in [3u64, 5, 7] {
            for t in catalogue(OddPrime::new(p).unwrap(), 4) {
                let q = kitaoka_bracket(&t);
                let d = t.a.iter().sum::<u32>() as usize;
                assert_eq!(q.reversed(d), q.scale(&int(chi_tilde(&t) as i64)), "{t}");
            }
        }
    }

    #[test]
    fn vanishing_at_one_iff_sign_negative() {
        for p in [3u64, 5] {
            for t in catalogue(OddPrime::new(p).unwrap(), 4) {
                let v = kitaoka_ternary_poly(&t).eval(&one()).unwrap();
                assert_eq!(v.is_zero(), chi_tilde(&t) == -1, "{t}");
            }
        }
    }

    #[test]
    fn assembled_examples() {
        let p = p3();
        let a = assemble_a(&SymMat::diag_i64(&[1, 1, 1, 1]), p).unwrap();
        assert_eq!(a.eval(&one()).unwrap(), frac(640, 729));
        let a = assemble_a(&SymMat::diag_i64(&[1, 1, 1, 3]), p).unwrap();
        assert_eq!(a.eval(&one()).unwrap(), int(0));
        assert_eq!(derivative_at_1(&a).unwrap(), frac(-640, 729));
        assert_eq!(assemble_a(&SymMat::diag_i64(&[3, 3, 3, 9]), p), Err(Error::ReductionNeedsUnimodular));
        assert_eq!(assemble_a(&SymMat::diag_i64(&[2, 3, 3, 9]), p), Err(Error::ClosedFormNeedsSquareUnit));
    }

    #[test]
    fn reduction_formula_against_oracle() {
        // alpha(S, <1> + T~) = alpha(S, <1>) alpha(complement of a norm-1 vector, T~)
        // with S = <1,1,1,-1,1> and rank-1 complements to keep counts small
        let p = p3();
        let s: Vec<Rational> = [1, 1, 1, -1, 1].iter().map(|&x| int(x)).collect();
        for d in [[1], [2], [3], [6]] {
            let full = SymMat::diag_i64(&[1, d[0]]);
            let lhs = density_at(&CountJob::new(s.clone(), full, p, 2, Strategy::Mitm).unwrap(), DEFAULT_STATE_BUDGET)
                .unwrap()
                .value;
            let u = density_at(
                &CountJob::new(s.clone(), SymMat::diag_i64(&[1]), p, 2, Strategy::Mitm).unwrap(),
                DEFAULT_STATE_BUDGET,
            )
            .unwrap()
            .value;
            let comp = density_at(
                &CountJob::new(s[1..].to_vec(), SymMat::diag_i64(&d), p, 2, Strategy::Mitm).unwrap(),
                DEFAULT_STATE_BUDGET,
            )
            .unwrap()
            .value;
            assert_eq!(lhs, u * comp, "{d:?}");
        }
    }

    #[test]
    fn twisted_examples() {
        let p = p3();
        assert_eq!(twisted_density(&SymMat::diag_i64(&[1, 1, 1, 3]), p).unwrap(), frac(64, 9));
        assert_eq!(twisted_density(&SymMat::diag_i64(&[1, 1, 1, 1]), p).unwrap(), int(0));
        assert_eq!(twisted_complement_with_chi(p), frac(16, 3));
        assert_eq!(twisted_factors(p).complement, frac(32, 3));
        assert_eq!(twisted_complement_with_chi(OddPrime::new(5).unwrap()), twisted_factors(OddPrime::new(5).unwrap()).complement);
        assert_eq!(twisted_density(&SymMat::diag_i64(&[2, 3, 3, 9]), p), Err(Error::DoesNotRepresentOne(3)));
    }

    #[test]
    fn twisted_unary_factor_by_oracle() {
        for p in [3u64, 5, 7] {
            let op = OddPrime::new(p).unwrap();
            let job = CountJob::new(crate::quadform::twisted_diag(op), SymMat::diag_i64(&[1]), op, 2, Strategy::Mitm).unwrap();
            let r = count_solutions(&job).unwrap();
            let v = Rational::from_integer(r.into()) * pow_i(p, -8);
            assert_eq!(v, twisted_factors(op).unary, "p = {p}");
        }
    }
}
