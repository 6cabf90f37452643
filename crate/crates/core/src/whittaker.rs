//! Local Whittaker values and derivatives at the identity expressed through
//! densities, and the identity W'/W = (1/2) log p (p^2+1)(p-1) e_p(T).

use std::fmt;

use num::{Signed, Zero};
use serde::Serialize;
use serde_json::{json, Value};

use crate::counting::{density_oracle, OracleOptions, DEFAULT_STATE_BUDGET};
use crate::densities::{assemble_a, twisted_density};
use crate::error::{Error, Result};
use crate::gkmult::{e_p, gross_keating_exponents, GkValue};
use crate::padic::{OddPrime, Place};
use crate::poly::derivative_at_1;
use crate::quadform::{diff_set, represents_local, represents_one_over_zp, s0_space, s_r_diag, IncoherentCollection, SymMat};
use crate::rational::{fmt_q, frac, int, pow_i, Rational};

/// `coeff * log p`, kept symbolic.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct LogPMultiple {
    #[serde(serialize_with = "crate::rational::serialize_q")]
    pub coeff: Rational,
    pub p: OddPrime,
}

impl LogPMultiple {
    pub fn new(coeff: Rational, p: OddPrime) -> Self {
        LogPMultiple { coeff, p }
    }

    pub fn div_rational(&self, d: &Rational) -> Result<LogPMultiple> {
        if d.is_zero() {
            return Err(Error::DenominatorVanishes);
        }
        Ok(LogPMultiple::new(&self.coeff / d, self.p))
    }

    pub fn mul_rational(&self, c: &Rational) -> LogPMultiple {
        LogPMultiple::new(&self.coeff * c, self.p)
    }

    pub fn add(&self, other: &LogPMultiple) -> Result<LogPMultiple> {
        if self.p != other.p {
            return Err(Error::DimensionMismatch(format!("log {} and log {} do not combine", self.p, other.p)));
        }
        Ok(LogPMultiple::new(&self.coeff + &other.coeff, self.p))
    }
}

impl fmt::Display for LogPMultiple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} log {}", self.coeff, self.p)
    }
}

fn check_rank4(t: &SymMat) -> Result<()> {
    if t.n() != 4 {
        return Err(Error::RankViolation(format!("expected a rank-4 form (got {})", t.n())));
    }
    Ok(())
}

/// Density of T in S_r: the closed form at X = p^-r where it applies,
/// otherwise the counting oracle under `budget`. Zero for T not p-integral.
pub fn whittaker_value_budgeted(t: &SymMat, p: OddPrime, r: u32, budget: u128) -> Result<Rational> {
    check_rank4(t)?;
    if !t.is_nonsingular() {
        return Err(Error::Singular("Whittaker value"));
    }
    if !t.is_p_integral(p.get()) {
        return Ok(Rational::zero());
    }
    match assemble_a(t, p) {
        Ok(a) => a.eval(&pow_i(p.get(), -(r as i64))),
        Err(Error::ReductionNeedsUnimodular | Error::ClosedFormNeedsSquareUnit) => {
            let opts = OracleOptions { budget, ..Default::default() };
            Ok(density_oracle(&s_r_diag(r as usize), t, p, opts)?.value)
        }
        Err(e) => Err(e),
    }
}

pub fn whittaker_value(t: &SymMat, p: OddPrime, r: u32) -> Result<Rational> {
    whittaker_value_budgeted(t, p, r, DEFAULT_STATE_BUDGET)
}

/// `-log p * dA/dX` at X = 1, for T not represented by V(Q_p).
pub fn whittaker_derivative(t: &SymMat, p: OddPrime) -> Result<LogPMultiple> {
    check_rank4(t)?;
    if !t.is_nonsingular() {
        return Err(Error::Singular("Whittaker derivative"));
    }
    if !t.is_p_integral(p.get()) {
        return Err(Error::NotPIntegral { what: "Whittaker derivative", p: p.get() });
    }
    if represents_local(&s0_space(), t, p.place())? {
        return Err(Error::DerivativeNeedsDiff);
    }
    let a = assemble_a(t, p)?;
    Ok(LogPMultiple::new(-derivative_at_1(&a)?, p))
}

/// `p^-4` times the twisted density.
pub fn whittaker_twisted_value(t: &SymMat, p: OddPrime) -> Result<Rational> {
    Ok(pow_i(p.get(), -4) * twisted_density(t, p)?)
}

/// `(1 - p^-4)(1 - p^-2) / [p^-4 (1 - p^-2) 2 (p + 1)]`, which reduces to
/// `(p^2 + 1)(p - 1) / 2`.
pub fn volume_constant(p: OddPrime) -> Rational {
    let one = int(1);
    let num = (&one - pow_i(p.get(), -4)) * (&one - pow_i(p.get(), -2));
    let den = pow_i(p.get(), -4) * (&one - pow_i(p.get(), -2)) * int(2 * (p.get() as i64 + 1));
    num / den
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RatioReport {
    pub t: SymMat,
    pub p: OddPrime,
    /// coefficient of log p in W'/W
    #[serde(serialize_with = "crate::rational::serialize_q")]
    pub lhs_coeff: Rational,
    #[serde(serialize_with = "crate::rational::serialize_q")]
    pub rhs: Rational,
    pub equal: bool,
    pub e_p: GkValue,
    /// Diff for the split algebra
    pub diff: Vec<Place>,
    #[serde(serialize_with = "crate::rational::serialize_q")]
    pub volume_constant: Rational,
}

impl RatioReport {
    pub fn to_json(&self) -> Value {
        json!({
            "T": self.t.to_json(),
            "p": self.p.get(),
            "lhs_coeff": fmt_q(&self.lhs_coeff),
            "rhs": fmt_q(&self.rhs),
            "equal": self.equal,
            "e_p": self.e_p.to_json(),
            "diff": self.diff.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
            "volume_constant": fmt_q(&self.volume_constant),
        })
    }
}

/// Computes W'/W from the density side and (1/2)(p^2+1)(p-1) e_p(T) from
/// the multiplicity side and compares them.
pub fn verify_ratio_identity(t: &SymMat, p: OddPrime) -> Result<RatioReport> {
    check_rank4(t)?;
    if !t.is_nonsingular() {
        return Err(Error::Singular("ratio identity"));
    }
    if !t.is_p_integral(p.get()) {
        return Err(Error::NotPIntegral { what: "ratio identity", p: p.get() });
    }
    if !represents_one_over_zp(t, p)? {
        return Err(Error::DoesNotRepresentOne(p.get()));
    }
    let derivative = whittaker_derivative(t, p)?;
    let twisted = whittaker_twisted_value(t, p)?;
    if !twisted.is_positive() {
        return Err(Error::TwistedNeedsRepresentation);
    }
    let lhs = derivative.div_rational(&twisted)?;
    let gk = gross_keating_exponents(t, p)?;
    let e = e_p(gk.triple.a, p)?;
    let pp = p.get() as i64;
    let rhs = frac(1, 2) * int(pp * pp + 1) * int(pp - 1) * &e.value;
    let diff = diff_set(t, &IncoherentCollection::split())?.into_iter().collect();
    Ok(RatioReport {
        t: t.clone(),
        p,
        equal: lhs.coeff == rhs,
        lhs_coeff: lhs.coeff,
        rhs,
        e_p: e,
        diff,
        volume_constant: volume_constant(p),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::densities::{catalogue, chi_tilde};
    use crate::rational::frac;

    fn op(p: u64) -> OddPrime {
        OddPrime::new(p).unwrap()
    }

    #[test]
    fn values() {
        let p = op(3);
        assert_eq!(whittaker_value(&SymMat::diag_i64(&[1, 1, 1, 1]), p, 0).unwrap(), frac(640, 729));
        assert_eq!(whittaker_value(&SymMat::diag_i64(&[1, 1, 1, 3]), p, 0).unwrap(), int(0));
        let t = SymMat::diag_i64(&[1, 1, 1, 1]).scale(&frac(1, 3));
        assert_eq!(whittaker_value(&t, p, 0).unwrap(), int(0));
        // r = 1 evaluates at X = 1/3
        let v = whittaker_value(&SymMat::diag_i64(&[1, 1, 1, 1]), p, 1).unwrap();
        assert!(v > frac(640, 729));
    }

    #[test]
    fn derivatives() {
        let p = op(3);
        let d = whittaker_derivative(&SymMat::diag_i64(&[1, 1, 1, 3]), p).unwrap();
        assert_eq!(d.coeff, frac(640, 729));
        let d = whittaker_derivative(&SymMat::diag_i64(&[1, 1, 3, 27]), p).unwrap();
        let e = e_p([0, 1, 3], p).unwrap().value;
        assert_eq!(d.coeff, frac(8, 9) * frac(80, 81) * e);
        assert_eq!(whittaker_derivative(&SymMat::diag_i64(&[1, 1, 1, 1]), p), Err(Error::DerivativeNeedsDiff));
    }

    #[test]
    fn twisted_values() {
        let p = op(3);
        assert_eq!(whittaker_twisted_value(&SymMat::diag_i64(&[1, 1, 1, 3]), p).unwrap(), frac(64, 729));
        assert_eq!(whittaker_twisted_value(&SymMat::diag_i64(&[1, 1, 1, 1]), p).unwrap(), int(0));
    }

    #[test]
    fn ratio_witnesses() {
        let r = verify_ratio_identity(&SymMat::diag_i64(&[1, 1, 1, 3]), op(3)).unwrap();
        assert!(r.equal);
        assert_eq!(r.lhs_coeff, int(10));
        assert_eq!(r.diff, vec![Place::Finite(3)]);
        // (5, 5)_5 = +1, so diag(1,1,1,5) is represented at 5; a nonsquare unit is needed
        assert_eq!(verify_ratio_identity(&SymMat::diag_i64(&[1, 1, 1, 5]), op(5)), Err(Error::DerivativeNeedsDiff));
        let r = verify_ratio_identity(&SymMat::diag_i64(&[1, 1, 2, 5]), op(5)).unwrap();
        assert!(r.equal);
        assert_eq!(r.lhs_coeff, int(52));
    }

    #[test]
    fn ratio_holds_on_small_catalogue() {
        let p = op(3);
        let mut checked = 0;
        for tr in catalogue(p, 2).into_iter().filter(|t| chi_tilde(t) == -1) {
            let r = verify_ratio_identity(&tr.with_unit(), p).unwrap();
            assert!(r.equal, "{tr}: {} vs {}", r.lhs_coeff, r.rhs);
            checked += 1;
        }
        assert!(checked > 3);
    }

    #[test]
    fn ratio_preconditions() {
        let p = op(3);
        assert_eq!(verify_ratio_identity(&SymMat::diag_i64(&[1, 1, 1, 0]), p), Err(Error::Singular("ratio identity")));
        assert!(matches!(
            verify_ratio_identity(&SymMat::diag(&[frac(1, 3), int(1), int(1), int(1)]), p),
            Err(Error::NotPIntegral { .. })
        ));
        assert_eq!(verify_ratio_identity(&SymMat::diag_i64(&[2, 6, 3, 9]), p), Err(Error::DoesNotRepresentOne(3)));
        assert_eq!(verify_ratio_identity(&SymMat::diag_i64(&[1, 1, 1, 1]), p), Err(Error::DerivativeNeedsDiff));
    }

    #[test]
    fn volume_constant_reduces() {
        for p in [3i64, 5, 7, 11] {
            assert_eq!(volume_constant(op(p as u64)), frac((p * p + 1) * (p - 1), 2));
        }
    }

    #[test]
    fn log_multiples() {
        let a = LogPMultiple::new(int(3), op(3));
        assert_eq!(a.div_rational(&int(2)).unwrap().coeff, frac(3, 2));
        assert!(a.div_rational(&int(0)).is_err());
        assert!(a.add(&LogPMultiple::new(int(1), op(5))).is_err());
        assert_eq!(a.add(&a).unwrap().coeff, int(6));
        assert_eq!(a.to_string(), "3 log 3");
    }
}
