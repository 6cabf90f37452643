//! Decision procedures for intersection points: block structure of the
//! fundamental matrix, isolation, component counts through a supersingular
//! point, the reduced quadratic spaces over F_p, and the proper-intersection
//! sum.

use std::collections::BTreeSet;
use std::fmt;

use num::Zero;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::gkmult::{e_p, gross_keating_exponents};
use crate::padic::OddPrime;
use crate::quadform::{represents_one_over_zp, SymMat};
use crate::rational::{mod_pow, Rational};

/// Block sizes n_1, ..., n_r with sum 4.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BlockSpec {
    sizes: Vec<usize>,
}

impl BlockSpec {
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        if sizes.iter().any(|&n| !(1..=4).contains(&n)) || sizes.iter().sum::<usize>() != 4 {
            return Err(Error::InvalidBlockSpec(format!("{sizes:?} must be positive and sum to 4")));
        }
        Ok(BlockSpec { sizes })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }
}

/// The diagonal blocks of T along the given partition.
pub fn extract_blocks(t: &SymMat, spec: &BlockSpec) -> Result<Vec<SymMat>> {
    if t.n() != 4 {
        return Err(Error::InvalidBlockSpec(format!("matrix has rank {} not 4", t.n())));
    }
    let mut start = 0;
    let mut out = Vec::with_capacity(spec.sizes.len());
    for &n in &spec.sizes {
        out.push(t.principal_block(start, n));
        start += n;
    }
    Ok(out)
}

/// Whether T has exactly the given diagonal blocks.
pub fn admissible(t: &SymMat, spec: &BlockSpec, blocks: &[SymMat]) -> Result<bool> {
    Ok(extract_blocks(t, spec)? == blocks)
}

/// Nonsingular and representing 1 over Z_p.
pub fn is_isolated(t: &SymMat, p: OddPrime) -> Result<bool> {
    if !t.is_p_integral(p.get()) {
        return Err(Error::NotPIntegral { what: "isolation test", p: p.get() });
    }
    if !t.is_nonsingular() {
        return Ok(false);
    }
    represents_one_over_zp(t, p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ComponentLabel {
    Isolated,
    OneLine,
    TwoLines,
    PPlusOneLines,
}

impl fmt::Display for ComponentLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ComponentLabel::Isolated => "isolated",
            ComponentLabel::OneLine => "one_line",
            ComponentLabel::TwoLines => "two_lines",
            ComponentLabel::PPlusOneLines => "p_plus_one_lines",
        };
        f.write_str(s)
    }
}

/// Flags describing the reduced space m attached to the point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct MData {
    pub represents_one: bool,
    pub has_radical_line: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComponentClassification {
    pub label: ComponentLabel,
    pub case_ref: String,
    /// number of components through the point (0 when isolated)
    pub lines: u64,
}

impl ComponentClassification {
    fn new(label: ComponentLabel, case_ref: &str, p: OddPrime) -> Self {
        let lines = match label {
            ComponentLabel::Isolated => 0,
            ComponentLabel::OneLine => 1,
            ComponentLabel::TwoLines => 2,
            ComponentLabel::PPlusOneLines => p.get() + 1,
        };
        ComponentClassification { label, case_ref: case_ref.into(), lines }
    }

    pub fn to_json(&self, rank: u32, dim: u32, m: MData, p: OddPrime) -> Value {
        json!({
            "rank": rank,
            "dim": dim,
            "represents_one": m.represents_one,
            "has_radical_line": m.has_radical_line,
            "p": p.get(),
            "label": self.label,
            "case": self.case_ref,
            "lines": self.lines,
        })
    }
}

/// Decision table keyed by the rank of T mod p, dim m and the flags of m.
pub fn classify_component(rank: u32, dim: u32, m: MData, p: OddPrime) -> Result<ComponentClassification> {
    use ComponentLabel::*;
    let bad = |s: &str| Err(Error::InconsistentCase(s.into()));
    if rank > 3 {
        return bad("the rank of T mod p is at most 3");
    }
    if dim > 3 {
        return bad("m has dimension at most 3");
    }
    if rank > dim {
        return bad("the rank of T mod p cannot exceed dim m");
    }
    let c = |label, case: &str| Ok(ComponentClassification::new(label, case, p));
    if m.represents_one {
        if rank == 0 {
            return bad("a form vanishing mod p does not represent 1");
        }
        return c(Isolated, "T represents 1: point of proper intersection");
    }
    match (rank, dim) {
        (0, 0) => c(PPlusOneLines, "p | T, m = 0: every one of the p+1 distinguished components"),
        (0, 1) => c(OneLine, "p | T, m a null line: a unique distinguished component"),
        (0, _) => bad("p | T forces dim m <= 1"),
        (1, 1) if !m.has_radical_line => {
            c(TwoLines, "rank 1, m an anisotropic line not representing 1: two of the p+1 components")
        }
        (1, 1) => bad("a rank-1 form on a line has no radical"),
        (1, 2) if m.has_radical_line => c(OneLine, "rank 1, m a plane with radical line: one of the p+1 components"),
        (1, 2) => bad("rank 1 on a plane has a radical line"),
        (1, _) => bad("rank 1 forces dim m <= 2"),
        (2, _) => bad("a form of rank 2 mod p represents 1"),
        (3, _) => bad("a form of rank 3 mod p represents 1"),
        _ => unreachable!("rank <= 3 checked above"),
    }
}

/// F_{p^2} = F_p[delta] / (delta^2 - u), u the least nonsquare mod p.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Fp2 {
    pub p: u64,
    pub u: u64,
}

/// a + b delta
pub type Fp2Elem = (u64, u64);

impl Fp2 {
    pub fn new(p: OddPrime) -> Self {
        Fp2 { p: p.get(), u: p.least_nonsquare() }
    }

    pub fn mul(&self, x: Fp2Elem, y: Fp2Elem) -> Fp2Elem {
        let p = self.p;
        ((x.0 * y.0 + self.u * (x.1 * y.1 % p)) % p, (x.0 * y.1 + x.1 * y.0) % p)
    }

    pub fn pow(&self, mut x: Fp2Elem, mut e: u64) -> Fp2Elem {
        let mut acc = (1, 0);
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, x);
            }
            x = self.mul(x, x);
            e >>= 1;
        }
        acc
    }

    /// Frobenius x -> x^p.
    pub fn sigma(&self, x: Fp2Elem) -> Fp2Elem {
        self.pow(x, self.p)
    }

    pub fn norm(&self, x: Fp2Elem) -> u64 {
        let n = self.mul(x, self.sigma(x));
        debug_assert_eq!(n.1, 0);
        n.0
    }

    pub fn elements(&self) -> impl Iterator<Item = Fp2Elem> + '_ {
        (0..self.p).flat_map(move |a| (0..self.p).map(move |b| (a, b)))
    }
}

/// A quadratic form over F_p given by a symmetric Gram matrix, q(x) = x^T G x.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FiniteFieldQuadSpace {
    pub p: u64,
    pub gram: Vec<Vec<u64>>,
}

impl FiniteFieldQuadSpace {
    pub fn diag(p: OddPrime, d: &[i64]) -> Self {
        let n = d.len();
        let pp = p.get() as i64;
        let gram = (0..n)
            .map(|i| (0..n).map(|j| if i == j { d[i].rem_euclid(pp) as u64 } else { 0 }).collect())
            .collect();
        FiniteFieldQuadSpace { p: p.get(), gram }
    }

    pub fn rank(&self) -> usize {
        self.gram.len()
    }

    pub fn eval(&self, x: &[u64]) -> u64 {
        let n = self.rank();
        let mut s = 0;
        for i in 0..n {
            for j in 0..n {
                s = (s + self.gram[i][j] * x[i] % self.p * x[j]) % self.p;
            }
        }
        s
    }

    /// All values q(x), x in F_p^n.
    pub fn values(&self) -> BTreeSet<u64> {
        let n = self.rank();
        let mut x = vec![0u64; n];
        let mut out = BTreeSet::new();
        loop {
            out.insert(self.eval(&x));
            let mut k = 0;
            loop {
                if k == n {
                    return out;
                }
                x[k] += 1;
                if x[k] < self.p {
                    break;
                }
                x[k] = 0;
                k += 1;
            }
        }
    }

    pub fn represents(&self, c: u64) -> bool {
        self.values().contains(&(c % self.p))
    }

    /// Square of e_1 e_2 e_3 in the Clifford algebra of a diagonal ternary
    /// form: -d1 d2 d3. A nonsquare means the even Clifford algebra has
    /// center F_{p^2}.
    pub fn odd_center_square(&self) -> Option<u64> {
        if self.rank() != 3 {
            return None;
        }
        let p = self.p;
        let prod = self.gram[0][0] * self.gram[1][1] % p * self.gram[2][2] % p;
        Some((p - prod) % p)
    }
}

fn is_square_mod(x: u64, p: u64) -> bool {
    x % p == 0 || mod_pow(x, (p - 1) / 2, p) == 1
}

pub fn is_nonsquare_mod(x: u64, p: u64) -> bool {
    !is_square_mod(x, p)
}

/// `<-1> + (-norm form)`, the norm written as `<1, -u>`: Gram diag(-1, -1, -u).
pub fn reduced_superspecial_space(p: OddPrime) -> FiniteFieldQuadSpace {
    let u = p.least_nonsquare() as i64;
    FiniteFieldQuadSpace::diag(p, &[-1, -1, -u])
}

/// q(a) = -a a^sigma on the trace-zero line spanned by delta; the value at
/// delta is u.
pub fn reduced_distinguished_space(p: OddPrime) -> FiniteFieldQuadSpace {
    let f = Fp2::new(p);
    let delta = (0, 1);
    let prod = f.mul(delta, f.sigma(delta));
    let q = (f.p - prod.0) % f.p;
    FiniteFieldQuadSpace { p: f.p, gram: vec![vec![q]] }
}

/// (#{mu in F_{p^2} : mu mu^sigma = -1}, |P^1(F_{p^2})|), both by enumeration.
pub fn incidence_counts(p: OddPrime) -> (u64, u64) {
    let f = Fp2::new(p);
    let minus_one = f.p - 1;
    let fiber = f.elements().filter(|&x| f.norm(x) == minus_one).count() as u64;
    let q = f.p * f.p;
    let nonzero_pairs = {
        let elems: Vec<Fp2Elem> = f.elements().collect();
        let mut c = 0u64;
        for x in &elems {
            for y in &elems {
                if *x != (0, 0) || *y != (0, 0) {
                    c += 1;
                }
            }
        }
        c
    };
    (fiber, nonzero_pairs / (q - 1))
}

/// Sum of e_p(T) * count over intersection points with fundamental matrix T;
/// the counts come from the caller.
pub fn proper_intersection_sum(entries: &[(SymMat, u64)], p: OddPrime) -> Result<Rational> {
    let mut total = Rational::zero();
    for (t, count) in entries {
        if t.n() != 4 || !is_isolated(t, p)? {
            return Err(Error::NotIsolated(t.to_string()));
        }
        let gk = gross_keating_exponents(t, p)?;
        total += e_p(gk.triple.a, p)?.value * Rational::from_integer((*count).into());
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn op(p: u64) -> OddPrime {
        OddPrime::new(p).unwrap()
    }

    #[test]
    fn blocks() {
        let t = SymMat::diag_i64(&[1, 1, 1, 3]);
        let b = extract_blocks(&t, &BlockSpec::new(vec![1, 1, 1, 1]).unwrap()).unwrap();
        assert_eq!(b.len(), 4);
        assert_eq!(b[3], SymMat::diag_i64(&[3]));
        let whole = extract_blocks(&t, &BlockSpec::new(vec![4]).unwrap()).unwrap();
        assert_eq!(whole, vec![t.clone()]);
        let m = SymMat::from_i64(&[&[2, 1, 0, 5], &[1, 2, 7, 0], &[0, 7, 4, 1], &[5, 0, 1, 4]]).unwrap();
        let spec = BlockSpec::new(vec![2, 2]).unwrap();
        let b = extract_blocks(&m, &spec).unwrap();
        assert_eq!(b[0], SymMat::from_i64(&[&[2, 1], &[1, 2]]).unwrap());
        assert_eq!(b[1], SymMat::from_i64(&[&[4, 1], &[1, 4]]).unwrap());
        assert!(admissible(&m, &spec, &b).unwrap());
        assert!(BlockSpec::new(vec![2, 1]).is_err());
        assert!(BlockSpec::new(vec![0, 4]).is_err());
    }

    #[test]
    fn isolation_examples() {
        assert!(is_isolated(&SymMat::diag_i64(&[1, 1, 1, 3]), op(3)).unwrap());
        assert!(!is_isolated(&SymMat::diag_i64(&[2, 6, 3, 9]), op(3)).unwrap());
        assert!(!is_isolated(&SymMat::diag_i64(&[1, 1, 1, 0]), op(3)).unwrap());
    }

    /// x mod 27 with x^T T x = 1 mod 27, T integral.
    fn brute_represents_one(t: &SymMat) -> bool {
        let mut x = [0i64; 4];
        loop {
            let v: Vec<Rational> = x.iter().map(|&a| int(a)).collect();
            if crate::rational::residue(&t.eval(&v), 27) == Some(1) {
                return true;
            }
            let mut k = 0;
            loop {
                if k == 4 {
                    return false;
                }
                x[k] += 1;
                if x[k] < 27 {
                    break;
                }
                x[k] = 0;
                k += 1;
            }
        }
    }

    #[test]
    fn isolation_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut done = 0;
        while done < 200 {
            // bias toward multiples of 3 so every branch shows up
            let mut e = [0i64; 10];
            for x in e.iter_mut() {
                *x = rng.gen_range(-4..=4) * if rng.gen_bool(0.6) { 3 } else { 1 };
            }
            let r = [[e[0], e[1], e[2], e[3]], [e[1], e[4], e[5], e[6]], [e[2], e[5], e[7], e[8]], [e[3], e[6], e[8], e[9]]];
            let t = SymMat::from_i64(&[&r[0], &r[1], &r[2], &r[3]]).unwrap();
            if !t.is_nonsingular() {
                continue;
            }
            assert_eq!(is_isolated(&t, op(3)).unwrap(), brute_represents_one(&t), "{t}");
            done += 1;
        }
    }

    #[test]
    fn classification_examples() {
        let p = op(3);
        let none = MData::default();
        let c = classify_component(0, 0, none, p).unwrap();
        assert_eq!((c.label, c.lines), (ComponentLabel::PPlusOneLines, 4));
        let c = classify_component(1, 1, none, p).unwrap();
        assert_eq!(c.label, ComponentLabel::TwoLines);
        let c = classify_component(1, 2, MData { has_radical_line: true, ..none }, p).unwrap();
        assert_eq!(c.label, ComponentLabel::OneLine);
        assert_eq!(classify_component(0, 1, none, p).unwrap().label, ComponentLabel::OneLine);
        let one = MData { represents_one: true, has_radical_line: false };
        assert_eq!(classify_component(3, 3, one, p).unwrap().label, ComponentLabel::Isolated);
        assert!(classify_component(4, 4, none, p).is_err());
        assert!(classify_component(2, 1, one, p).is_err());
        assert!(classify_component(0, 2, none, p).is_err());
    }

    #[test]
    fn classification_is_total() {
        let p = op(5);
        let mut labelled = 0;
        for rank in 0..=4 {
            for dim in 0..=4 {
                for bits in 0..4 {
                    let m = MData { represents_one: bits & 1 == 1, has_radical_line: bits & 2 == 2 };
                    match classify_component(rank, dim, m, p) {
                        Ok(_) => labelled += 1,
                        Err(Error::InconsistentCase(_)) => {}
                        Err(e) => panic!("unexpected {e}"),
                    }
                }
            }
        }
        assert!(labelled > 0);
    }

    #[test]
    fn reduced_spaces() {
        for p in [3u64, 5, 7, 11] {
            let s = reduced_superspecial_space(op(p));
            assert_eq!(s.values(), (0..p).collect(), "p = {p}");
            assert!(is_nonsquare_mod(s.odd_center_square().unwrap(), p));
        }
        let s = reduced_superspecial_space(op(3));
        assert_eq!(s.gram, vec![vec![2, 0, 0], vec![0, 2, 0], vec![0, 0, 1]]);
        for p in [3u64, 5, 7, 11, 13] {
            let d = reduced_distinguished_space(op(p));
            assert!(!d.represents(1), "p = {p}");
        }
        assert_eq!(reduced_distinguished_space(op(3)).gram, vec![vec![2]]);
        assert_eq!(reduced_distinguished_space(op(3)).values(), BTreeSet::from([0, 2]));
        let v5 = reduced_distinguished_space(op(5)).values();
        assert_eq!(v5, BTreeSet::from([0, 2, 3]));
    }

    #[test]
    fn frobenius_is_conjugation() {
        let f = Fp2::new(op(7));
        for x in f.elements() {
            assert_eq!(f.sigma(x), (x.0, (7 - x.1) % 7));
        }
    }

    #[test]
    fn incidences() {
        assert_eq!(incidence_counts(op(3)), (4, 10));
        assert_eq!(incidence_counts(op(5)), (6, 26));
        for p in [7u64, 11, 13, 17, 19, 23] {
            assert_eq!(incidence_counts(op(p)), (p + 1, p * p + 1));
        }
    }

    #[test]
    fn intersection_sums() {
        let p = op(3);
        assert_eq!(proper_intersection_sum(&[(SymMat::diag_i64(&[1, 1, 1, 3]), 2)], p).unwrap(), int(2));
        let e = [(SymMat::diag_i64(&[1, 1, 3, 3]), 1), (SymMat::diag_i64(&[1, 1, 1, 3]), 3)];
        assert_eq!(proper_intersection_sum(&e, p).unwrap(), int(5));
        assert_eq!(proper_intersection_sum(&[], p).unwrap(), int(0));
        assert!(matches!(
            proper_intersection_sum(&[(SymMat::diag_i64(&[2, 6, 3, 9]), 1)], p),
            Err(Error::NotIsolated(_))
        ));
    }
}
