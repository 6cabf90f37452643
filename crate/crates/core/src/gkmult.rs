//! Splitting off a represented 1 (T ~ <1> + ternary) and the closed-form
//! Gross-Keating multiplicity of the ternary exponents.

use num::{One, Zero};
use serde::Serialize;
use serde_json::{json, Value};

use crate::densities::GKTriple;
use crate::error::{Error, Result};
use crate::padic::{chi, valuation, OddPrime, UnitClass};
use crate::quadform::{jordan_diagonalize, represents_one_over_zp, SymMat};
use crate::rational::{fmt_q, frac, int, is_integer, mod_inverse, residue, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GKNormalForm {
    pub triple: GKTriple,
    pub eps0: UnitClass,
    /// integral vector with witness^T T witness = 1 mod p^depth
    pub witness: Vec<i64>,
    pub depth: u32,
}

fn check_input(t: &SymMat, p: OddPrime) -> Result<()> {
    if t.n() != 4 {
        return Err(Error::RankViolation(format!("expected a rank-4 form (got {})", t.n())));
    }
    if !t.is_nonsingular() {
        return Err(Error::Singular("Gross-Keating normal form"));
    }
    if !t.is_p_integral(p.get()) {
        return Err(Error::NotPIntegral { what: "Gross-Keating normal form", p: p.get() });
    }
    if !represents_one_over_zp(t, p)? {
        return Err(Error::DoesNotRepresentOne(p.get()));
    }
    Ok(())
}

/// Square root of a square unit u modulo p^depth, by search mod p and Hensel.
fn sqrt_mod_power(u: u64, p: u64, depth: u32) -> u64 {
    let mut r = (1..p).find(|&r| r * r % p == u % p).expect("u is a square mod p");
    let mut m = p;
    for _ in 1..depth {
        m *= p;
        // r <- r - (r^2 - u) / (2r) mod m
        let r2 = (r as u128 * r as u128 % m as u128) as u64;
        let diff = (r2 + m - u % m) % m;
        let inv = mod_inverse(2 * r % m, m).expect("2r is a unit");
        r = (r + m - (diff as u128 * inv as u128 % m as u128) as u64) % m;
    }
    r
}

/// Finds the lexicographically smallest x mod p with x^T T x a nonzero
/// square, rescales it so the value is 1 to depth max(a)+2, splits off its
/// orthogonal complement and Jordan-diagonalizes that.
pub fn gross_keating_exponents(t: &SymMat, p: OddPrime) -> Result<GKNormalForm> {
    check_input(t, p)?;
    let pp = p.get();
    let depth = jordan_diagonalize(t, p)?.max_exponent() + 2;
    let modulus = pp.pow(depth);
    let qx = |x: &[i64]| t.eval(&x.iter().map(|&v| int(v)).collect::<Vec<_>>());
    let mut x = [0i64; 4];
    let found = 'search: loop {
        let v = qx(&x);
        if let Some(r) = residue(&v, pp) {
            if r != 0 && chi(&int(r as i64), p)? == UnitClass::Square {
                break 'search true;
            }
        }
        // odometer with the first coordinate most significant
        let mut k = 3;
        loop {
            x[k] += 1;
            if x[k] < pp as i64 {
                break;
            }
            x[k] = 0;
            if k == 0 {
                break 'search false;
            }
            k -= 1;
        }
    };
    if !found {
        return Err(Error::DoesNotRepresentOne(pp));
    }
    let u = residue(&qx(&x), modulus).expect("p-integral");
    let r = sqrt_mod_power(u, pp, depth);
    let rinv = mod_inverse(r, modulus).expect("unit") as i64;
    let witness: Vec<i64> = x.iter().map(|&v| (v * rinv).rem_euclid(modulus as i64)).collect();
    let w: Vec<Rational> = witness.iter().map(|&v| int(v)).collect();
    let qw = t.eval(&w);
    debug_assert_eq!(residue(&qw, modulus), Some(1));

    // w_j = e_j - (e_j^T T w / Q(w)) w for j != i0, with w_{i0} a unit
    let i0 = witness.iter().position(|&v| v % pp as i64 != 0).expect("nonzero mod p");
    let tw: Vec<Rational> = (0..4).map(|j| (0..4).map(|k| t.get(j, k) * &w[k]).sum()).collect();
    let basis: Vec<Vec<Rational>> = (0..4)
        .filter(|&j| j != i0)
        .map(|j| {
            let c = &tw[j] / &qw;
            (0..4).map(|k| if k == j { Rational::one() } else { Rational::zero() } - &c * &w[k]).collect()
        })
        .collect();
    let comp = t.gram_of(&basis);
    let jd = jordan_diagonalize(&comp, p)?;
    let triple = GKTriple::new(
        [jd.terms[0].a, jd.terms[1].a, jd.terms[2].a],
        [jd.terms[0].eps, jd.terms[1].eps, jd.terms[2].eps],
        p,
    )?;
    let eps0 = chi(&crate::padic::unit_part(&qw, pp)?, p)?;
    Ok(GKNormalForm { triple, eps0, witness, depth })
}

/// Exact value of the closed form together with whether it is an integer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GkValue {
    #[serde(serialize_with = "crate::rational::serialize_q")]
    pub value: Rational,
    pub integral: bool,
}

impl GkValue {
    /// An integer when integral, otherwise a "num/den" string.
    pub fn to_json(&self) -> Value {
        match crate::rational::to_i64(&self.value) {
            Some(v) => json!(v),
            None => json!(fmt_q(&self.value)),
        }
    }

    pub fn render(&self) -> String {
        if self.integral {
            self.value.numer().to_string()
        } else {
            fmt_q(&self.value)
        }
    }
}

/// Closed form for the multiplicity attached to exponents a1 <= a2 <= a3.
/// When a1 + a2 is even the last term carries a factor 1/2, so the value may
/// be a half-integer; that case is flagged rather than rounded.
pub fn e_p(a: [u32; 3], p: OddPrime) -> Result<GkValue> {
    if !(a[0] <= a[1] && a[1] <= a[2]) {
        return Err(Error::UnorderedExponents(a));
    }
    let [a1, a2, a3] = a.map(|x| x as i64);
    let pp = p.get() as i64;
    let pw = |i: i64| int(pp.pow(i as u32));
    let mut s = Rational::zero();
    for i in 0..a1 {
        s += int((i + 1) * (a1 + a2 + a3 - 3 * i)) * pw(i);
    }
    if (a1 + a2) % 2 == 0 {
        for i in a1..=(a1 + a2 - 2) / 2 {
            s += int((a1 + 1) * (2 * a1 + a2 + a3 - 4 * i)) * pw(i);
        }
        s += frac((a1 + 1) * (a3 - a2 + 1), 2) * pw((a1 + a2) / 2);
    } else {
        for i in a1..=(a1 + a2 - 1) / 2 {
            s += int((a1 + 1) * (2 * a1 + a2 + a3 - 4 * i)) * pw(i);
        }
    }
    let integral = is_integer(&s);
    Ok(GkValue { value: s, integral })
}

/// [`e_p`] when the caller certifies the derivative regime; a half-integral
/// value is then an error.
pub fn e_p_certified(a: [u32; 3], p: OddPrime) -> Result<Rational> {
    let v = e_p(a, p)?;
    if !v.integral {
        return Err(Error::NonIntegralMultiplicity(fmt_q(&v.value)));
    }
    Ok(v.value)
}

/// Transversal intersection: ord_p det T = 1.
pub fn transversal(t: &SymMat, p: OddPrime) -> Result<bool> {
    check_input(t, p)?;
    Ok(valuation(&t.det(), p.get())? == 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counting::{count_solutions, CountJob, Strategy};
    use crate::densities::catalogue;

    fn p3() -> OddPrime {
        OddPrime::new(3).unwrap()
    }

    #[test]
    fn normal_forms() {
        let g = gross_keating_exponents(&SymMat::diag_i64(&[1, 1, 1, 3]), p3()).unwrap();
        assert_eq!(g.triple.a, [0, 0, 1]);
        assert_eq!(g.eps0, UnitClass::Square);
        let g = gross_keating_exponents(&SymMat::diag_i64(&[1, 1, 1, 1]), p3()).unwrap();
        assert_eq!(g.triple.a, [0, 0, 0]);
        let t = SymMat::diag_i64(&[2, 2, 3, 3]);
        let g = gross_keating_exponents(&t, p3()).unwrap();
        assert_eq!(g.triple.a, [0, 1, 1]);
        assert_eq!(g.witness.iter().map(|v| v % 3).collect::<Vec<_>>(), vec![1, 1, 0, 0]);
        let w: Vec<Rational> = g.witness.iter().map(|&v| int(v)).collect();
        assert_eq!(residue(&t.eval(&w), 27), Some(1));
        assert_eq!(
            gross_keating_exponents(&SymMat::diag_i64(&[2, 6, 3, 9]), p3()),
            Err(Error::DoesNotRepresentOne(3))
        );
    }

    /// Per-scale (rank, product of unit classes): a complete Z_p invariant
    /// for p odd.
    fn jordan_invariants(d: &[Rational]) -> Vec<(u32, usize, UnitClass)> {
        let j = jordan_diagonalize(&SymMat::diag(d), p3()).unwrap();
        let mut out: Vec<(u32, usize, UnitClass)> = Vec::new();
        for t in j.terms {
            match out.last_mut() {
                Some(last) if last.0 == t.a => {
                    last.1 += 1;
                    last.2 = last.2 * t.eps;
                }
                _ => out.push((t.a, 1, t.eps)),
            }
        }
        out
    }

    #[test]
    fn normal_form_is_equivalent() {
        for d in [[2, 2, 3, 3], [1, 2, 3, 6], [2, 5, 3, 9], [5, 7, 9, 27]] {
            let t = SymMat::diag_i64(&d);
            let g = gross_keating_exponents(&t, p3()).unwrap();
            let mut nd = vec![int(1)];
            nd.extend(g.triple.diag());
            let orig: Vec<Rational> = d.iter().map(|&x| int(x)).collect();
            assert_eq!(jordan_invariants(&orig), jordan_invariants(&nd), "{d:?}");
            let s: Vec<Rational> = [1, 1, 2, 3, 6].iter().map(|&x| int(x)).collect();
            let a = CountJob::new(s.clone(), t.clone(), p3(), 1, Strategy::Mitm).unwrap();
            let b = CountJob::new(s, SymMat::diag(&nd), p3(), 1, Strategy::Mitm).unwrap();
            assert_eq!(count_solutions(&a).unwrap(), count_solutions(&b).unwrap(), "{d:?}");
        }
        // a non-diagonal input
        let t = SymMat::from_i64(&[&[2, 1, 0, 0], &[1, 2, 0, 0], &[0, 0, 1, 0], &[0, 0, 0, 9]]).unwrap();
        let g = gross_keating_exponents(&t, p3()).unwrap();
        assert_eq!(g.triple.a, [0, 1, 2]);
    }

    #[test]
    fn closed_form_anchors() {
        let v = |a, p: u64| e_p(a, OddPrime::new(p).unwrap()).unwrap();
        assert_eq!(v([0, 0, 1], 3).value, int(1));
        assert_eq!(v([0, 1, 1], 3).value, int(2));
        assert_eq!(v([1, 1, 1], 3).value, int(6));
        for p in [3, 5, 7] {
            assert_eq!(v([0, 0, 3], p).value, int(2));
            assert_eq!(v([1, 1, 1], p).value, int(3 + p as i64));
        }
        assert!(!v([0, 0, 0], 3).integral);
        assert_eq!(e_p([1, 0, 2], p3()), Err(Error::UnorderedExponents([1, 0, 2])));
        assert!(matches!(e_p_certified([0, 0, 0], p3()), Err(Error::NonIntegralMultiplicity(_))));
    }

    #[test]
    fn transversality() {
        assert!(transversal(&SymMat::diag_i64(&[1, 1, 1, 3]), p3()).unwrap());
        assert!(!transversal(&SymMat::diag_i64(&[1, 1, 3, 3]), p3()).unwrap());
        assert!(!transversal(&SymMat::diag_i64(&[1, 1, 1, 1]), p3()).unwrap());
    }

    #[test]
    fn table_properties() {
        for p in [3u64, 5, 7] {
            let op = OddPrime::new(p).unwrap();
            for t in catalogue(op, 6).into_iter().filter(|t| t.eps == [UnitClass::Square; 3]) {
                let e = e_p(t.a, op).unwrap().value;
                assert_eq!(e == int(1), t.a.iter().sum::<u32>() == 1, "{t}");
                for i in 0..3 {
                    let mut b = t.a;
                    b[i] += 1;
                    if b[0] <= b[1] && b[1] <= b[2] {
                        assert!(e_p(b, op).unwrap().value > e, "{:?} -> {b:?}", t.a);
                    }
                }
            }
        }
    }
}
