//! Quaternion algebras over Q, the rank-5 space V_B, the 4-dimensional spin
//! representation of a split rank-5 form, and the involution-type tables.

use std::collections::BTreeSet;
use std::fmt;

use num::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::padic::{bad_primes, hilbert, Place};
use crate::quadform::QuadSpace;
use crate::rational::{int, prime_factors, Rational};

/// The algebra with basis 1, i, j, k = ij and i^2 = a, j^2 = b, ij = -ji.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QuaternionAlgebra {
    pub a: Rational,
    pub b: Rational,
}

impl QuaternionAlgebra {
    pub fn new(a: Rational, b: Rational) -> Result<Self> {
        if a.is_zero() || b.is_zero() {
            return Err(Error::ZeroArgument);
        }
        Ok(QuaternionAlgebra { a, b })
    }

    pub fn from_i64(a: i64, b: i64) -> Result<Self> {
        QuaternionAlgebra::new(int(a), int(b))
    }

    /// M_2(Q), as (1, 1).
    pub fn split() -> Self {
        QuaternionAlgebra { a: int(1), b: int(1) }
    }

    /// Hamilton quaternions (-1, -1).
    pub fn definite() -> Self {
        QuaternionAlgebra { a: int(-1), b: int(-1) }
    }

    pub fn ramified_places(&self) -> BTreeSet<Place> {
        let mut out = BTreeSet::new();
        if hilbert(&self.a, &self.b, Place::Infinite).unwrap() == -1 {
            out.insert(Place::Infinite);
        }
        for p in bad_primes(&[&self.a, &self.b]) {
            if hilbert(&self.a, &self.b, Place::Finite(p)).unwrap() == -1 {
                out.insert(Place::Finite(p));
            }
        }
        out
    }

    /// Product of the finite ramified primes.
    pub fn discriminant(&self) -> u64 {
        self.ramified_places().iter().filter_map(|v| v.prime()).product()
    }

    pub fn is_indefinite(&self) -> bool {
        !(self.a.is_negative() && self.b.is_negative())
    }

    /// Some indefinite algebra ramified exactly at the primes of `d`, found by
    /// searching small structure constants.
    pub fn with_discriminant(d: u64) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidDiscriminant(d, "must be positive"));
        }
        let primes = prime_factors(&num::BigInt::from(d));
        if primes.iter().product::<u64>() != d {
            return Err(Error::InvalidDiscriminant(d, "must be squarefree"));
        }
        if primes.len() % 2 == 1 {
            return Err(Error::InvalidDiscriminant(d, "an indefinite algebra has an even number of ramified primes"));
        }
        let want: BTreeSet<Place> = primes.iter().map(|&p| Place::Finite(p)).collect();
        let bound = 4 * d as i64 + 8;
        for m in 1..=bound {
            for x in -m..=m {
                for (a, b) in [(x, m), (x, -m), (m, x), (-m, x)] {
                    if a == 0 || b == 0 {
                        continue;
                    }
                    let alg = QuaternionAlgebra::from_i64(a, b)?;
                    if alg.ramified_places() == want {
                        return Ok(alg);
                    }
                }
            }
        }
        Err(Error::InvalidDiscriminant(d, "no small structure constants found"))
    }

    /// Diagonal of the reduced norm on 1, i, j, k.
    pub fn norm_form_diag(&self) -> Vec<Rational> {
        vec![int(1), -self.a.clone(), -self.b.clone(), &self.a * &self.b]
    }

    /// `<1>` plus the reduced norm form.
    pub fn vb_space(&self) -> QuadSpace {
        let mut d = vec![int(1)];
        d.extend(self.norm_form_diag());
        QuadSpace::from_diag(&d).expect("nonzero structure constants")
    }
}

impl fmt::Display for QuaternionAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.a, self.b)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Quaternion {
    pub algebra: QuaternionAlgebra,
    pub x: [Rational; 4],
}

impl Quaternion {
    pub fn new(algebra: &QuaternionAlgebra, x: [Rational; 4]) -> Self {
        Quaternion { algebra: algebra.clone(), x }
    }

    pub fn from_i64(algebra: &QuaternionAlgebra, x: [i64; 4]) -> Self {
        Quaternion::new(algebra, x.map(int))
    }

    pub fn basis(algebra: &QuaternionAlgebra, k: usize) -> Self {
        let mut x = [0; 4];
        x[k] = 1;
        Quaternion::from_i64(algebra, x)
    }
}

pub fn quat_mul(x: &Quaternion, y: &Quaternion) -> Result<Quaternion> {
    if x.algebra != y.algebra {
        return Err(Error::MismatchedAlgebras);
    }
    let (a, b) = (&x.algebra.a, &x.algebra.b);
    let ab = a * b;
    let [x0, x1, x2, x3] = &x.x;
    let [y0, y1, y2, y3] = &y.x;
    let z0 = x0 * y0 + a * x1 * y1 + b * x2 * y2 - &ab * x3 * y3;
    let z1 = x0 * y1 + x1 * y0 - b * x2 * y3 + b * x3 * y2;
    let z2 = x0 * y2 + x2 * y0 + a * x1 * y3 - a * x3 * y1;
    let z3 = x0 * y3 + x3 * y0 + x1 * y2 - x2 * y1;
    Ok(Quaternion::new(&x.algebra, [z0, z1, z2, z3]))
}

/// Main involution: negate the pure part.
pub fn quat_conj(x: &Quaternion) -> Quaternion {
    let [x0, x1, x2, x3] = &x.x;
    Quaternion::new(&x.algebra, [x0.clone(), -x1.clone(), -x2.clone(), -x3.clone()])
}

pub fn quat_norm(x: &Quaternion) -> Rational {
    let (a, b) = (&x.algebra.a, &x.algebra.b);
    let [x0, x1, x2, x3] = &x.x;
    x0 * x0 - a * x1 * x1 - b * x2 * x2 + a * b * x3 * x3
}

pub fn quat_trace(x: &Quaternion) -> Rational {
    int(2) * &x.x[0]
}

pub type Mat4 = [[i64; 4]; 4];

fn mat_mul(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut c = [[0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            c[i][j] = (0..4).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    c
}

fn transpose(a: &Mat4) -> Mat4 {
    let mut c = [[0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            c[i][j] = a[j][i];
        }
    }
    c
}

fn scalar(c: i64) -> Mat4 {
    let mut m = [[0; 4]; 4];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = c;
    }
    m
}

fn unit(entries: &[(usize, usize, i64)]) -> Mat4 {
    let mut m = [[0; 4]; 4];
    for &(i, j, v) in entries {
        m[i - 1][j - 1] = v;
    }
    m
}

/// Basis of the split rank-5 space: two hyperbolic pairs (e0, f0), (e1, f1)
/// and an anisotropic v0 with v0^2 = 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Generator {
    E0,
    E1,
    V0,
    F0,
    F1,
}

impl Generator {
    pub const ALL: [Generator; 5] = [Generator::E0, Generator::E1, Generator::V0, Generator::F0, Generator::F1];
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Generator::E0 => "e0",
            Generator::E1 => "e1",
            Generator::V0 => "v0",
            Generator::F0 => "f0",
            Generator::F1 => "f1",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpinGenerators {
    pub e0: Mat4,
    pub e1: Mat4,
    pub v0: Mat4,
    pub f0: Mat4,
    pub f1: Mat4,
    pub j: Mat4,
}

impl SpinGenerators {
    pub fn get(&self, g: Generator) -> &Mat4 {
        match g {
            Generator::E0 => &self.e0,
            Generator::E1 => &self.e1,
            Generator::V0 => &self.v0,
            Generator::F0 => &self.f0,
            Generator::F1 => &self.f1,
        }
    }

    pub fn word(&self, w: &[Generator]) -> Mat4 {
        w.iter().fold(scalar(1), |acc, g| mat_mul(&acc, self.get(*g)))
    }
}

pub fn spin_generators() -> SpinGenerators {
    SpinGenerators {
        e0: unit(&[(2, 1, 1), (3, 4, 1)]),
        e1: unit(&[(3, 2, -1), (4, 1, 1)]),
        v0: unit(&[(1, 1, 1), (2, 2, -1), (3, 3, 1), (4, 4, -1)]),
        f0: unit(&[(1, 2, 1), (4, 3, 1)]),
        f1: unit(&[(1, 4, 1), (2, 3, -1)]),
        j: unit(&[(1, 3, 1), (2, 4, 1), (3, 1, -1), (4, 2, -1)]),
    }
}

/// Gram matrix on (e0, e1, v0, f0, f1) as quadratic-form coefficients:
/// q(x) = x_v0^2 + x_e0 x_f0 + x_e1 x_f1.
pub fn spin_gram() -> [[i64; 5]; 5] {
    let mut g = [[0; 5]; 5];
    g[0][3] = 1;
    g[3][0] = 1;
    g[1][4] = 1;
    g[4][1] = 1;
    g[2][2] = 1;
    g
}

/// Value of xy + yx for basis vectors x, y under the Gram reading above.
pub fn polar(x: Generator, y: Generator) -> i64 {
    let g = spin_gram();
    let (i, j) = (x as usize, y as usize);
    if i == j {
        2 * g[i][i]
    } else {
        g[i][j]
    }
}

fn word_name(w: &[Generator]) -> String {
    if w.is_empty() {
        return "1".into();
    }
    w.iter().map(|g| g.to_string()).collect::<Vec<_>>().join("*")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SpinCheck {
    pub relations_checked: usize,
    pub words_checked: usize,
}

/// Checks every pairwise relation xy + yx = polar(x, y) on the generators and,
/// for each word w, J sigma(w)^T J^-1 = sigma(reverse w).
pub fn check_spin_compatibility(words: &[Vec<Generator>]) -> Result<SpinCheck> {
    let s = spin_generators();
    let mut relations = 0;
    for (a, &x) in Generator::ALL.iter().enumerate() {
        for &y in &Generator::ALL[a..] {
            let xy = mat_mul(s.get(x), s.get(y));
            let yx = mat_mul(s.get(y), s.get(x));
            let mut sum = [[0; 4]; 4];
            for i in 0..4 {
                for j in 0..4 {
                    sum[i][j] = xy[i][j] + yx[i][j];
                }
            }
            if sum != scalar(polar(x, y)) {
                return Err(Error::RelationFailure(format!("{x}*{y} + {y}*{x}")));
            }
            relations += 1;
        }
    }
    // J^-1 = -J
    let j_inv = s.j.map(|r| r.map(|x| -x));
    for w in words {
        let lhs = mat_mul(&mat_mul(&s.j, &transpose(&s.word(w))), &j_inv);
        let rev: Vec<Generator> = w.iter().rev().copied().collect();
        if lhs != s.word(&rev) {
            return Err(Error::RelationFailure(word_name(w)));
        }
    }
    Ok(SpinCheck { relations_checked: relations, words_checked: words.len() })
}

pub fn random_words<R: Rng>(rng: &mut R, count: usize, max_len: usize) -> Vec<Vec<Generator>> {
    (0..count)
        .map(|_| {
            let len = rng.gen_range(1..=max_len);
            (0..len).map(|_| Generator::ALL[rng.gen_range(0..5)]).collect()
        })
        .collect()
}

/// [`random_words`] from a ChaCha8 stream seeded with `seed`.
pub fn seeded_words(seed: u64, count: usize, max_len: usize) -> Vec<Vec<Generator>> {
    random_words(&mut ChaCha8Rng::seed_from_u64(seed), count, max_len)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum InvolutionType {
    Main,
    Neben,
}

/// Type of the tensor product of two involutions: like types give neben,
/// mixed types give main.
pub fn involution_tensor_type(t1: InvolutionType, t2: InvolutionType) -> InvolutionType {
    use InvolutionType::*;
    match (t1, t2) {
        (Main, Neben) | (Neben, Main) => Main,
        (Main, Main) | (Neben, Neben) => Neben,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RealQuaternionType {
    Split,
    Division,
}

/// How tau behaves under the main involution (tau' = conj_sign tau) and the
/// sign of tau^2 when tau is pure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TauDescriptor {
    pub conj_sign: i8,
    pub square_sign: Option<i8>,
}

/// Positivity of x -> tau^-1 x' tau on a real quaternion algebra: over
/// M_2(R) tau must be pure with tau^2 < 0; over the Hamilton quaternions tau
/// must be central.
pub fn positive_involution_criterion(kind: RealQuaternionType, tau: TauDescriptor) -> Result<bool> {
    if !matches!(tau.conj_sign, 1 | -1) || tau.square_sign.is_some_and(|s| !matches!(s, 1 | -1)) {
        return Err(Error::InconsistentCase("signs must be +1 or -1".into()));
    }
    match (kind, tau.conj_sign) {
        (RealQuaternionType::Split, -1) => match tau.square_sign {
            Some(s) => Ok(s == -1),
            None => Err(Error::InconsistentCase("a pure element over M_2(R) needs the sign of its square".into())),
        },
        (RealQuaternionType::Split, _) => match tau.square_sign {
            Some(-1) => Err(Error::InconsistentCase("a real scalar has positive square".into())),
            _ => Ok(false),
        },
        (RealQuaternionType::Division, 1) => match tau.square_sign {
            Some(-1) => Err(Error::InconsistentCase("a real scalar has positive square".into())),
            _ => Ok(true),
        },
        (RealQuaternionType::Division, _) => match tau.square_sign {
            Some(1) => Err(Error::InconsistentCase("pure Hamilton quaternions have negative square".into())),
            _ => Ok(false),
        },
    }
}
