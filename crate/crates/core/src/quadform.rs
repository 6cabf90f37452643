//! Symmetric matrices over Q, Jordan splittings over Z_p (p odd), local
//! invariants of quadratic spaces and local representation questions.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num::{One, Signed, Zero};
use serde::Serialize;
use serde_json::{json, Value};

use crate::clifford::QuaternionAlgebra;
use crate::error::{Error, Result};
use crate::padic::{chi, hilbert, split_unit, valuation, OddPrime, Place, UnitClass};
use crate::rational::{fmt_q, int, parse_q, pow_i, prime_factors, Rational};

/// Exact symmetric n x n matrix, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SymMat {
    n: usize,
    entries: Vec<Rational>,
}

impl SymMat {
    pub fn new(n: usize, entries: Vec<Rational>) -> Result<Self> {
        if n == 0 || entries.len() != n * n {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {n}x{n} matrix",
                entries.len()
            )));
        }
        for i in 0..n {
            for j in 0..i {
                if entries[i * n + j] != entries[j * n + i] {
                    return Err(Error::NotSymmetric);
                }
            }
        }
        Ok(SymMat { n, entries })
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch("rows of unequal length".into()));
        }
        SymMat::new(n, rows.into_iter().flatten().collect())
    }

    pub fn from_i64(rows: &[&[i64]]) -> Result<Self> {
        SymMat::from_rows(rows.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect())
    }

    pub fn diag(d: &[Rational]) -> Self {
        let n = d.len();
        let mut entries = vec![Rational::zero(); n * n];
        for (i, x) in d.iter().enumerate() {
            entries[i * n + i] = x.clone();
        }
        SymMat { n, entries }
    }

    pub fn diag_i64(d: &[i64]) -> Self {
        SymMat::diag(&d.iter().map(|&x| int(x)).collect::<Vec<_>>())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.entries[i * self.n + j]
    }

    pub fn rows(&self) -> Vec<Vec<Rational>> {
        self.entries.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    pub fn diagonal(&self) -> Vec<Rational> {
        (0..self.n).map(|i| self.get(i, i).clone()).collect()
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| i == j || self.get(i, j).is_zero()))
    }

    pub fn det(&self) -> Rational {
        let n = self.n;
        let mut a = self.entries.clone();
        let mut det = Rational::one();
        for c in 0..n {
            let Some(piv) = (c..n).find(|&r| !a[r * n + c].is_zero()) else {
                return Rational::zero();
            };
            if piv != c {
                for k in 0..n {
                    a.swap(piv * n + k, c * n + k);
                }
                det = -det;
            }
            let pv = a[c * n + c].clone();
            det *= &pv;
            for r in c + 1..n {
                if a[r * n + c].is_zero() {
                    continue;
                }
                let f = &a[r * n + c] / &pv;
                for k in c..n {
                    let sub = &f * &a[c * n + k];
                    a[r * n + k] -= sub;
                }
            }
        }
        det
    }

    pub fn is_nonsingular(&self) -> bool {
        !self.det().is_zero()
    }

    /// All entries have denominators prime to p.
    pub fn is_p_integral(&self, p: u64) -> bool {
        self.entries.iter().all(|x| {
            let d = x.denom();
            (d % p) != num::BigInt::zero()
        })
    }

    pub fn scale(&self, c: &Rational) -> SymMat {
        SymMat { n: self.n, entries: self.entries.iter().map(|x| x * c).collect() }
    }

    pub fn direct_sum(&self, other: &SymMat) -> SymMat {
        let n = self.n + other.n;
        let mut entries = vec![Rational::zero(); n * n];
        for i in 0..self.n {
            for j in 0..self.n {
                entries[i * n + j] = self.get(i, j).clone();
            }
        }
        for i in 0..other.n {
            for j in 0..other.n {
                entries[(self.n + i) * n + self.n + j] = other.get(i, j).clone();
            }
        }
        SymMat { n, entries }
    }

    pub fn principal_block(&self, start: usize, len: usize) -> SymMat {
        let mut entries = Vec::with_capacity(len * len);
        for i in start..start + len {
            for j in start..start + len {
                entries.push(self.get(i, j).clone());
            }
        }
        SymMat { n: len, entries }
    }

    pub fn bilinear(&self, x: &[Rational], y: &[Rational]) -> Rational {
        let mut s = Rational::zero();
        for i in 0..self.n {
            if x[i].is_zero() {
                continue;
            }
            for j in 0..self.n {
                if !y[j].is_zero() {
                    s += &x[i] * self.get(i, j) * &y[j];
                }
            }
        }
        s
    }

    /// x^T A x
    pub fn eval(&self, x: &[Rational]) -> Rational {
        self.bilinear(x, x)
    }

    /// Gram matrix of the given vectors: `G_ij = b_i^T A b_j`.
    pub fn gram_of(&self, basis: &[Vec<Rational>]) -> SymMat {
        let k = basis.len();
        let mut entries = vec![Rational::zero(); k * k];
        for i in 0..k {
            for j in i..k {
                let v = self.bilinear(&basis[i], &basis[j]);
                entries[j * k + i] = v.clone();
                entries[i * k + j] = v;
            }
        }
        SymMat { n: k, entries }
    }

    /// Orthogonal basis over Q by symmetric elimination; returns the diagonal.
    /// Zero entries appear only for singular input.
    pub fn diagonalize_rational(&self) -> Vec<Rational> {
        let n = self.n;
        let mut a = self.entries.clone();
        let mut out = Vec::with_capacity(n);
        for c in 0..n {
            if a[c * n + c].is_zero() {
                if let Some(j) = (c + 1..n).find(|&j| !a[j * n + j].is_zero()) {
                    swap_basis(&mut a, n, c, j);
                } else if let Some(j) = (c + 1..n).find(|&j| !a[c * n + j].is_zero()) {
                    add_basis(&mut a, n, c, j, &Rational::one());
                }
            }
            let pv = a[c * n + c].clone();
            if !pv.is_zero() {
                for j in c + 1..n {
                    if !a[c * n + j].is_zero() {
                        let f = -(&a[c * n + j] / &pv);
                        add_basis(&mut a, n, j, c, &f);
                    }
                }
            }
            out.push(pv);
        }
        out
    }

    /// (number of positive, number of negative) eigenvalue signs.
    pub fn signature(&self) -> (usize, usize) {
        let d = self.diagonalize_rational();
        (d.iter().filter(|x| x.is_positive()).count(), d.iter().filter(|x| x.is_negative()).count())
    }

    pub fn to_json(&self) -> Value {
        json!({
            "n": self.n,
            "entries": self.rows().iter().map(|r| r.iter().map(fmt_q).collect::<Vec<_>>()).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = |m: &str| Error::Parse(format!("matrix JSON: {m}"));
        let n = v.get("n").and_then(Value::as_u64).ok_or_else(|| bad("missing integer \"n\""))? as usize;
        let rows = v.get("entries").and_then(Value::as_array).ok_or_else(|| bad("missing \"entries\""))?;
        if rows.len() != n {
            return Err(bad("row count differs from n"));
        }
        let mut out = Vec::with_capacity(n);
        for r in rows {
            let r = r.as_array().ok_or_else(|| bad("row is not an array"))?;
            let mut row = Vec::with_capacity(r.len());
            for x in r {
                let q = match x {
                    Value::String(s) => parse_q(s)?,
                    Value::Number(k) => parse_q(&k.to_string())?,
                    _ => return Err(bad("entry must be a \"num/den\" string")),
                };
                row.push(q);
            }
            out.push(row);
        }
        SymMat::from_rows(out)
    }

    /// Parses `d:1,1,1,3` (diagonal) or an inline JSON matrix object.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("d:") {
            let d = rest.split(',').map(parse_q).collect::<Result<Vec<_>>>()?;
            if d.is_empty() {
                return Err(Error::Parse("empty diagonal".into()));
            }
            return Ok(SymMat::diag(&d));
        }
        let v: Value = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        SymMat::from_json(&v)
    }
}

impl fmt::Display for SymMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_diagonal() {
            let d: Vec<String> = self.diagonal().iter().map(|x| x.to_string()).collect();
            return write!(f, "diag({})", d.join(","));
        }
        let rows: Vec<String> = self
            .rows()
            .iter()
            .map(|r| format!("[{}]", r.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")))
            .collect();
        write!(f, "[{}]", rows.join(","))
    }
}

impl Serialize for SymMat {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

/// Basis change e_a <-> e_b applied to the Gram matrix in place.
fn swap_basis(a: &mut [Rational], n: usize, i: usize, j: usize) {
    for k in 0..n {
        a.swap(i * n + k, j * n + k);
    }
    for k in 0..n {
        a.swap(k * n + i, k * n + j);
    }
}

/// Basis change e_i <- e_i + f e_j applied to the Gram matrix in place.
fn add_basis(a: &mut [Rational], n: usize, i: usize, j: usize, f: &Rational) {
    for k in 0..n {
        let add = f * &a[j * n + k];
        a[i * n + k] += add;
    }
    for k in 0..n {
        let add = f * &a[k * n + j];
        a[k * n + i] += add;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct JordanTerm {
    pub a: u32,
    pub eps: UnitClass,
}

/// `T ~ diag(eps_0 p^a_0, ..., eps_{n-1} p^a_{n-1})` over Z_p with the
/// exponents nondecreasing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct JordanDiagonal {
    pub p: OddPrime,
    pub terms: Vec<JordanTerm>,
}

impl JordanDiagonal {
    pub fn exponents(&self) -> Vec<u32> {
        self.terms.iter().map(|t| t.a).collect()
    }

    pub fn max_exponent(&self) -> u32 {
        self.terms.iter().map(|t| t.a).max().unwrap_or(0)
    }

    pub fn unimodular(&self) -> Vec<UnitClass> {
        self.terms.iter().filter(|t| t.a == 0).map(|t| t.eps).collect()
    }

    /// Integral diagonal representatives `u p^a` with u in {1, least nonsquare}.
    pub fn to_diag(&self) -> Vec<Rational> {
        self.terms
            .iter()
            .map(|t| int(t.eps.representative(self.p) as i64) * pow_i(self.p.get(), t.a as i64))
            .collect()
    }
}

/// Diagonal entries (p-integral rationals) of a Jordan splitting of T over
/// Z_p, in order of nondecreasing valuation.
pub fn jordan_entries(t: &SymMat, p: OddPrime) -> Result<Vec<Rational>> {
    if !t.is_nonsingular() {
        return Err(Error::Singular("Jordan form"));
    }
    if !t.is_p_integral(p.get()) {
        return Err(Error::NotPIntegral { what: "Jordan form", p: p.get() });
    }
    let n = t.n;
    let mut a = t.entries.clone();
    let vals = |x: &Rational| if x.is_zero() { i64::MAX } else { valuation(x, p.get()).unwrap() };
    let mut out = Vec::with_capacity(n);
    for c in 0..n {
        let mut best: Option<(i64, bool, usize, usize)> = None;
        for i in c..n {
            for j in i..n {
                let v = vals(&a[i * n + j]);
                if v == i64::MAX {
                    continue;
                }
                // smaller valuation first, then diagonal over off-diagonal
                let key = (v, i != j, i, j);
                if best.as_ref().is_none_or(|b| key < *b) {
                    best = Some(key);
                }
            }
        }
        let (_, off, i, j) = best.expect("nonsingular block has a nonzero entry");
        if off {
            // 2 a_ij is a unit multiple of the minimum since p is odd
            add_basis(&mut a, n, i, j, &Rational::one());
        }
        swap_basis(&mut a, n, c, i);
        let pv = a[c * n + c].clone();
        for k in c + 1..n {
            if !a[c * n + k].is_zero() {
                let f = -(&a[c * n + k] / &pv);
                add_basis(&mut a, n, k, c, &f);
            }
        }
        out.push(pv);
    }
    out.sort_by_key(|x| valuation(x, p.get()).unwrap());
    Ok(out)
}

/// Jordan splitting of a nonsingular p-integral form over Z_p.
pub fn jordan_diagonalize(t: &SymMat, p: OddPrime) -> Result<JordanDiagonal> {
    let entries = jordan_entries(t, p)?;
    let terms = entries
        .iter()
        .map(|x| {
            let (v, u) = split_unit(x, p.get())?;
            Ok(JordanTerm { a: v as u32, eps: chi(&u, p)? })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(JordanDiagonal { p, terms })
}

/// Whether x^T T x = 1 has a solution over Z_p: the unimodular Jordan part
/// must have rank at least 2 (a nondegenerate binary form over F_p takes every
/// nonzero value, then Hensel), or rank 1 with square unit.
pub fn represents_one_over_zp(t: &SymMat, p: OddPrime) -> Result<bool> {
    let u = jordan_diagonalize(t, p)?.unimodular();
    Ok(match u.len() {
        0 => false,
        1 => u[0] == UnitClass::Square,
        _ => true,
    })
}

/// Whether x is a square in Q_v.
pub fn is_local_square(x: &Rational, v: Place) -> bool {
    assert!(!x.is_zero());
    match v {
        Place::Infinite => x.is_positive(),
        Place::Finite(p) => {
            let (e, u) = split_unit(x, p).unwrap();
            if e % 2 != 0 {
                return false;
            }
            let prod = u.numer() * u.denom();
            if p == 2 {
                let r: num::BigInt = num::Integer::mod_floor(&prod, &num::BigInt::from(8));
                r == num::BigInt::one()
            } else {
                crate::padic::legendre(&prod, p) == 1
            }
        }
    }
}

fn square_class_reps(p: u64) -> Vec<Rational> {
    if p == 2 {
        [1, 3, 5, 7, 2, 6, 10, 14].iter().map(|&x| int(x)).collect()
    } else {
        let b = OddPrime::new(p).unwrap().least_nonsquare() as i64;
        let p = p as i64;
        vec![int(1), int(b), int(p), int(p * b)]
    }
}

/// prod_{i<j} (d_i, d_j)_v
pub fn hasse_of_diag(d: &[Rational], v: Place) -> i8 {
    let mut s = 1;
    let mut prefix = Rational::one();
    for (k, x) in d.iter().enumerate() {
        if k > 0 {
            s *= hilbert(&prefix, x, v).expect("nonzero diagonal");
        }
        prefix *= x;
    }
    s
}

/// Whether a nondegenerate form over Q_v (v finite) with the given rank,
/// determinant and Hasse invariant exists. Decided by enumerating diagonal
/// forms over square-class representatives; rank, determinant class and
/// Hasse invariant classify forms over Q_v.
fn form_exists(p: u64, rank: usize, det: &Rational, hasse: i8) -> bool {
    let v = Place::Finite(p);
    if rank == 0 {
        return is_local_square(det, v) && hasse == 1;
    }
    let reps = square_class_reps(p);
    let mut idx = vec![0usize; rank - 1];
    loop {
        let mut d: Vec<Rational> = idx.iter().map(|&i| reps[i].clone()).collect();
        let prod: Rational = d.iter().fold(Rational::one(), |acc, x| acc * x);
        d.push(det / prod);
        if hasse_of_diag(&d, v) == hasse {
            return true;
        }
        let mut k = 0;
        loop {
            if k == idx.len() {
                return false;
            }
            idx[k] += 1;
            if idx[k] < reps.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// A nonsingular quadratic space over Q with invariants computed on
/// construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadSpace {
    gram: SymMat,
    diag: Vec<Rational>,
    det: Rational,
    signature: (usize, usize),
    hasse: BTreeMap<Place, i8>,
}

impl QuadSpace {
    pub fn new(gram: SymMat) -> Result<Self> {
        let diag = gram.diagonalize_rational();
        if diag.iter().any(Zero::is_zero) {
            return Err(Error::Singular("quadratic space"));
        }
        let det = diag.iter().fold(Rational::one(), |a, x| a * x);
        let signature =
            (diag.iter().filter(|x| x.is_positive()).count(), diag.iter().filter(|x| x.is_negative()).count());
        let mut hasse = BTreeMap::new();
        hasse.insert(Place::Infinite, hasse_of_diag(&diag, Place::Infinite));
        for p in crate::padic::bad_primes(&diag.iter().collect::<Vec<_>>()) {
            hasse.insert(Place::Finite(p), hasse_of_diag(&diag, Place::Finite(p)));
        }
        Ok(QuadSpace { gram, diag, det, signature, hasse })
    }

    pub fn from_diag(d: &[Rational]) -> Result<Self> {
        QuadSpace::new(SymMat::diag(d))
    }

    pub fn from_diag_i64(d: &[i64]) -> Result<Self> {
        QuadSpace::new(SymMat::diag_i64(d))
    }

    pub fn rank(&self) -> usize {
        self.gram.n
    }

    pub fn gram(&self) -> &SymMat {
        &self.gram
    }

    /// A rational diagonalization of the form.
    pub fn diagonal(&self) -> &[Rational] {
        &self.diag
    }

    pub fn det(&self) -> &Rational {
        &self.det
    }

    pub fn signature(&self) -> (usize, usize) {
        self.signature
    }

    pub fn hasse(&self, v: Place) -> i8 {
        // every diagonal entry is a unit at an odd prime outside the support
        self.hasse.get(&v).copied().unwrap_or(1)
    }

    pub fn det_is_square(&self, v: Place) -> bool {
        is_local_square(&self.det, v)
    }

    /// Places where some local invariant may be nontrivial.
    pub fn support(&self) -> Vec<Place> {
        self.hasse.keys().copied().collect()
    }

    pub fn direct_sum(&self, other: &QuadSpace) -> QuadSpace {
        QuadSpace::new(self.gram.direct_sum(&other.gram)).expect("sum of nonsingular spaces")
    }

    /// Witt index over Q_v: split off hyperbolic planes while the remaining
    /// invariants allow it.
    pub fn witt_index(&self, v: Place) -> usize {
        match v {
            Place::Infinite => self.signature.0.min(self.signature.1),
            Place::Finite(p) => {
                let (mut n, mut d, mut s) = (self.rank(), self.det.clone(), self.hasse(v));
                let mut idx = 0;
                while n >= 2 {
                    // V = H + W: det W = -det V, hasse V = hasse W * (-1, det W)
                    let dw = -d.clone();
                    let sw = s * hilbert(&int(-1), &dw, v).unwrap();
                    if !form_exists(p, n - 2, &dw, sw) {
                        break;
                    }
                    idx += 1;
                    n -= 2;
                    d = dw;
                    s = sw;
                }
                idx
            }
        }
    }

    /// Witt index over Q, the minimum of the local indices.
    pub fn witt_index_rational(&self) -> usize {
        let mut places = self.support();
        if !places.contains(&Place::Finite(2)) {
            places.push(Place::Finite(2));
        }
        places.into_iter().map(|v| self.witt_index(v)).min().unwrap_or(0)
    }
}

/// Whether the rank-5 space S represents the nonsingular form T over Q_v.
///
/// Finite v: S represents T iff S = T + W for a form W of rank 5 - rank T,
/// whose determinant and Hasse invariant are then forced; such a W exists
/// iff the enumeration in `form_exists` finds one. For rank T = 4 this is
/// the single check that T + <det T det S> and S have equal Hasse
/// invariants. v = infinity: signature containment.
pub fn represents_local(s: &QuadSpace, t: &SymMat, v: Place) -> Result<bool> {
    if s.rank() != 5 {
        return Err(Error::RankViolation(format!("ambient space must have rank 5 (got {})", s.rank())));
    }
    if t.n() > 4 {
        return Err(Error::RankViolation(format!("target must have rank 1..4 (got {})", t.n())));
    }
    let tq = QuadSpace::new(t.clone()).map_err(|_| Error::Singular("local representation"))?;
    Ok(represents_space(s, &tq, v))
}

fn represents_space(s: &QuadSpace, t: &QuadSpace, v: Place) -> bool {
    match v {
        Place::Infinite => t.signature.0 <= s.signature.0 && t.signature.1 <= s.signature.1,
        Place::Finite(p) => {
            let dw = s.det() / t.det();
            let sw = s.hasse(v) * t.hasse(v) * hilbert(t.det(), &dw, v).unwrap();
            form_exists(p, s.rank() - t.rank(), &dw, sw)
        }
    }
}

/// `<1, 1, -1, 1, -1>`, the level-zero space with its hyperbolic planes split.
pub fn s0_diag() -> Vec<Rational> {
    [1, 1, -1, 1, -1].iter().map(|&x| int(x)).collect()
}

/// S_0 plus r further hyperbolic planes.
pub fn s_r_diag(r: usize) -> Vec<Rational> {
    let mut d = s0_diag();
    d.extend(hyperbolic_diag(r));
    d
}

/// Split form of rank 2m as m copies of `<1, -1>`.
pub fn hyperbolic_diag(m: usize) -> Vec<Rational> {
    (0..m).flat_map(|_| [int(1), int(-1)]).collect()
}

/// Reduced norm form of the maximal order in the ramified quaternion
/// algebra over Q_p: `<1, -beta, p, -p beta>` with beta the least nonsquare.
pub fn ramified_norm_diag(p: OddPrime) -> Vec<Rational> {
    let b = p.least_nonsquare() as i64;
    let q = p.get() as i64;
    vec![int(1), int(-b), int(q), int(-q * b)]
}

/// The twisted lattice `<1> + ramified norm form`: same determinant class as
/// S_0, opposite Hasse invariant at p.
pub fn twisted_diag(p: OddPrime) -> Vec<Rational> {
    let mut d = vec![int(1)];
    d.extend(ramified_norm_diag(p));
    d
}

pub fn s0_space() -> QuadSpace {
    QuadSpace::from_diag(&s0_diag()).unwrap()
}

pub fn twisted_space(p: OddPrime) -> QuadSpace {
    QuadSpace::from_diag(&twisted_diag(p)).unwrap()
}

/// Local data attached to an indefinite quaternion algebra B: V_B at every
/// finite place and a positive definite rank-5 space at infinity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncoherentCollection {
    pub algebra: QuaternionAlgebra,
    finite: QuadSpace,
    infinite: QuadSpace,
}

impl IncoherentCollection {
    pub fn new(algebra: QuaternionAlgebra) -> Result<Self> {
        if !algebra.is_indefinite() {
            return Err(Error::InvalidDiscriminant(algebra.discriminant(), "algebra must be split at infinity"));
        }
        Ok(IncoherentCollection {
            finite: algebra.vb_space(),
            infinite: QuadSpace::from_diag_i64(&[1, 1, 1, 1, 1]).unwrap(),
            algebra,
        })
    }

    pub fn split() -> Self {
        IncoherentCollection::new(QuaternionAlgebra::split()).unwrap()
    }

    pub fn with_discriminant(d: u64) -> Result<Self> {
        IncoherentCollection::new(QuaternionAlgebra::with_discriminant(d)?)
    }

    pub fn local_space(&self, v: Place) -> &QuadSpace {
        match v {
            Place::Infinite => &self.infinite,
            Place::Finite(_) => &self.finite,
        }
    }
}

/// Places where the collection fails to represent T. Finite places are
/// searched among primes dividing 2 D(B) det(2T); elsewhere both sides are
/// unimodular and nothing fails. Infinity is included exactly for
/// signatures (3,1) and (1,3).
pub fn diff_set(t: &SymMat, c: &IncoherentCollection) -> Result<BTreeSet<Place>> {
    if t.n() != 4 {
        return Err(Error::RankViolation(format!("Diff needs a rank-4 target (got {})", t.n())));
    }
    let det2 = t.scale(&int(2)).det();
    if det2.is_zero() {
        return Err(Error::Singular("Diff"));
    }
    let tq = QuadSpace::new(t.clone())?;
    let mut primes: BTreeSet<u64> = BTreeSet::from([2]);
    primes.extend(prime_factors(&num::BigInt::from(c.algebra.discriminant())));
    primes.extend(prime_factors(det2.numer()));
    primes.extend(prime_factors(det2.denom()));
    let mut out = BTreeSet::new();
    for p in primes {
        let v = Place::Finite(p);
        if !represents_space(c.local_space(v), &tq, v) {
            out.insert(v);
        }
    }
    if matches!(tq.signature(), (3, 1) | (1, 3)) {
        out.insert(Place::Infinite);
    }
    Ok(out)
}
