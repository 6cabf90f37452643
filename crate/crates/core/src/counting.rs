//! Brute-force local densities: count x in M_{m,n}(Z/p^t) with
//! x^T diag(s) x = T mod p^t, either naively or by meeting in the middle.

use std::collections::HashMap;

use num::{BigInt, Zero};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::padic::OddPrime;
use crate::quadform::{jordan_diagonalize, SymMat};
use crate::rational::{fmt_q, parse_q, pow_i, residue, Rational};

/// Default cap on enumerated states (see [`estimate_states`]).
pub const DEFAULT_STATE_BUDGET: u128 = 1_000_000_000;

/// Largest dense count table, in entries.
const DENSE_LIMIT: u64 = 1 << 25;

/// Upper-triangle entries tracked per partial sum; allows n <= 5.
const MAX_K: usize = 15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Naive,
    Mitm,
}

impl std::str::FromStr for Strategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "naive" => Ok(Strategy::Naive),
            "mitm" => Ok(Strategy::Mitm),
            _ => Err(Error::Parse(format!("unknown strategy {s:?} (naive|mitm)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountJob {
    pub s_diag: Vec<Rational>,
    pub target: SymMat,
    pub p: OddPrime,
    pub t: u32,
    pub strategy: Strategy,
}

impl CountJob {
    pub fn new(s_diag: Vec<Rational>, target: SymMat, p: OddPrime, t: u32, strategy: Strategy) -> Result<Self> {
        let (m, n) = (s_diag.len(), target.n());
        if m < n {
            return Err(Error::DimensionMismatch(format!("need m >= n (m = {m}, n = {n})")));
        }
        if n > 5 {
            return Err(Error::DimensionMismatch(format!("targets of rank {n} > 5 are not supported")));
        }
        if t == 0 {
            return Err(Error::DimensionMismatch("modulus exponent t must be >= 1".into()));
        }
        if s_diag.iter().any(Zero::is_zero) {
            return Err(Error::Singular("counting job (zero diagonal entry)"));
        }
        let pi = |x: &Rational| x.denom() % p.get() != BigInt::zero();
        if !s_diag.iter().all(pi) || !target.is_p_integral(p.get()) {
            return Err(Error::NotPIntegral { what: "counting job", p: p.get() });
        }
        modulus(p, t)?;
        Ok(CountJob { s_diag, target, p, t, strategy })
    }

    pub fn m(&self) -> usize {
        self.s_diag.len()
    }

    pub fn n(&self) -> usize {
        self.target.n()
    }

    /// t (mn - n(n+1)/2)
    pub fn normalization_exponent(&self) -> u64 {
        let (m, n) = (self.m() as u64, self.n() as u64);
        self.t as u64 * (m * n - n * (n + 1) / 2)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "s": self.s_diag.iter().map(fmt_q).collect::<Vec<_>>(),
            "T": self.target.to_json(),
            "p": self.p.get(),
            "t": self.t,
            "strategy": self.strategy,
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = |m: &str| Error::Parse(format!("job JSON: {m}"));
        let s = v.get("s").and_then(Value::as_array).ok_or_else(|| bad("missing \"s\""))?;
        let s_diag = s
            .iter()
            .map(|x| match x {
                Value::String(s) => parse_q(s),
                Value::Number(k) => parse_q(&k.to_string()),
                _ => Err(bad("entries of \"s\" must be rationals")),
            })
            .collect::<Result<Vec<_>>>()?;
        let target = SymMat::from_json(v.get("T").ok_or_else(|| bad("missing \"T\""))?)?;
        let p = OddPrime::new(v.get("p").and_then(Value::as_u64).ok_or_else(|| bad("missing \"p\""))?)?;
        let t = v.get("t").and_then(Value::as_u64).ok_or_else(|| bad("missing \"t\""))? as u32;
        let strategy = match v.get("strategy").and_then(Value::as_str) {
            Some(s) => s.parse()?,
            None => Strategy::Mitm,
        };
        CountJob::new(s_diag, target, p, t, strategy)
    }
}

fn modulus(p: OddPrime, t: u32) -> Result<u64> {
    let q = (p.get() as u128).checked_pow(t).filter(|&q| q < (1 << 31));
    q.map(|q| q as u64).ok_or(Error::ModulusTooLarge(p.get(), t))
}

fn rows_split(m: usize) -> (usize, usize) {
    (m / 2, m - m / 2)
}

/// States visited: q^{mn} naively, q^{nL} + q^{nR} for the two halves.
pub fn estimate_states(job: &CountJob) -> u128 {
    let q = (job.p.get() as u128).pow(job.t);
    let pow = |e: usize| q.checked_pow(e as u32).unwrap_or(u128::MAX);
    let n = job.n();
    match job.strategy {
        Strategy::Naive => pow(job.m() * n),
        Strategy::Mitm => {
            let (l, r) = rows_split(job.m());
            pow(l * n).saturating_add(pow(r * n))
        }
    }
}

pub fn count_solutions(job: &CountJob) -> Result<u128> {
    count_solutions_with_budget(job, DEFAULT_STATE_BUDGET)
}

pub fn count_solutions_with_budget(job: &CountJob, budget: u128) -> Result<u128> {
    let estimated = estimate_states(job);
    if estimated > budget {
        return Err(Error::StateBudgetExceeded { estimated, budget });
    }
    let prob = Problem::new(job)?;
    Ok(match job.strategy {
        Strategy::Naive => prob.naive(),
        Strategy::Mitm => prob.mitm(TableMode::Auto(DENSE_LIMIT)),
    })
}

/// Residue data shared by both counters.
struct Problem {
    q: u64,
    n: usize,
    k: usize,
    /// (i, j) with i <= j, (0, 0) first
    pairs: Vec<(usize, usize)>,
    s: Vec<u64>,
    target: [u32; MAX_K],
}

impl Problem {
    fn new(job: &CountJob) -> Result<Self> {
        let q = modulus(job.p, job.t)?;
        let n = job.n();
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
        let res = |x: &Rational| residue(x, q).ok_or(Error::NotPIntegral { what: "counting job", p: job.p.get() });
        let s = job.s_diag.iter().map(res).collect::<Result<Vec<_>>>()?;
        let mut target = [0u32; MAX_K];
        for (e, &(i, j)) in pairs.iter().enumerate() {
            target[e] = res(job.target.get(i, j))? as u32;
        }
        Ok(Problem { q, n, k: pairs.len(), pairs, s, target })
    }

    fn naive(&self) -> u128 {
        let (q, n, m) = (self.q, self.n, self.s.len());
        let mut x = vec![0u64; m * n];
        let mut count = 0u128;
        loop {
            let ok = self.pairs.iter().enumerate().all(|(e, &(i, j))| {
                let g = (0..m).fold(0u64, |acc, r| (acc + self.s[r] * (x[r * n + i] * x[r * n + j] % q)) % q);
                g == self.target[e] as u64
            });
            count += ok as u128;
            let mut d = 0;
            loop {
                if d == x.len() {
                    return count;
                }
                x[d] += 1;
                if x[d] < q {
                    break;
                }
                x[d] = 0;
                d += 1;
            }
        }
    }

    /// Contribution s v v^T (upper triangle) of every vector v in (Z/q)^n.
    fn row_table(&self, s: u64) -> RowTable {
        let (q, n) = (self.q, self.n);
        let count = (q as usize).pow(n as u32);
        let mut contrib = vec![[0u32; MAX_K]; count];
        let mut v = vec![0u64; n];
        for c in contrib.iter_mut() {
            for (e, &(i, j)) in self.pairs.iter().enumerate() {
                c[e] = (s * (v[i] * v[j] % q) % q) as u32;
            }
            for d in v.iter_mut() {
                *d += 1;
                if *d < q {
                    break;
                }
                *d = 0;
            }
        }
        let mut buckets = vec![Vec::new(); q as usize];
        for (idx, c) in contrib.iter().enumerate() {
            buckets[c[0] as usize].push(idx as u32);
        }
        RowTable { contrib, buckets }
    }

    fn mitm(&self, mode: TableMode) -> u128 {
        let m = self.s.len();
        let (l, _) = rows_split(m);
        let mut cache: HashMap<u64, usize> = HashMap::new();
        let mut tables: Vec<RowTable> = Vec::new();
        let rows: Vec<usize> = self
            .s
            .iter()
            .map(|&s| {
                *cache.entry(s).or_insert_with(|| {
                    tables.push(self.row_table(s));
                    tables.len() - 1
                })
            })
            .collect();
        let rows: Vec<&RowTable> = rows.iter().map(|&i| &tables[i]).collect();
        let (left, right) = rows.split_at(l);
        let qk = (self.q as u128).pow(self.k as u32);
        let limit = match mode {
            TableMode::Auto(l) => l as u128,
            TableMode::Bytes => 0,
        };
        if qk <= limit {
            let mut table = vec![0u64; qk as usize];
            self.walk(left, None, &mut |acc| table[self.key(acc, 0) as usize] += 1);
            self.stream(right, None, &|acc| {
                let r = self.residual(acc);
                table[self.key(&r, 0) as usize]
            })
        } else if qk / self.q as u128 <= limit {
            // partition on the (0,0) entry so each dense table drops one digit
            let mut table = vec![0u64; (qk / self.q as u128) as usize];
            let mut total = 0u128;
            for c in 0..self.q as u32 {
                table.iter_mut().for_each(|x| *x = 0);
                self.walk(left, Some(c), &mut |acc| table[self.key(acc, 1) as usize] += 1);
                let need = (self.target[0] + self.q as u32 - c) % self.q as u32;
                total += self.stream(right, Some(need), &|acc| {
                    let r = self.residual(acc);
                    table[self.key(&r, 1) as usize]
                });
            }
            total
        } else if qk <= u64::MAX as u128 && mode != TableMode::Bytes {
            let mut table: HashMap<u64, u64> = HashMap::new();
            self.walk(left, None, &mut |acc| *table.entry(self.key(acc, 0)).or_insert(0) += 1);
            self.stream(right, None, &|acc| {
                let r = self.residual(acc);
                table.get(&self.key(&r, 0)).copied().unwrap_or(0)
            })
        } else {
            let mut table: HashMap<Vec<u32>, u64> = HashMap::new();
            self.walk(left, None, &mut |acc| *table.entry(acc[..self.k].to_vec()).or_insert(0) += 1);
            self.stream(right, None, &|acc| {
                let r = self.residual(acc);
                table.get(&r[..self.k]).copied().unwrap_or(0)
            })
        }
    }

    /// Mixed-radix packing of entries `skip..k`.
    fn key(&self, acc: &[u32; MAX_K], skip: usize) -> u64 {
        let mut key = 0u64;
        for e in (skip..self.k).rev() {
            key = key * self.q + acc[e] as u64;
        }
        key
    }

    fn residual(&self, acc: &[u32; MAX_K]) -> [u32; MAX_K] {
        let q = self.q as u32;
        let mut r = [0u32; MAX_K];
        for e in 0..self.k {
            r[e] = (self.target[e] + q - acc[e]) % q;
        }
        r
    }

    fn add(&self, acc: &[u32; MAX_K], c: &[u32; MAX_K]) -> [u32; MAX_K] {
        let q = self.q as u32;
        let mut out = [0u32; MAX_K];
        for e in 0..self.k {
            let s = acc[e] + c[e];
            out[e] = if s >= q { s - q } else { s };
        }
        out
    }

    /// Calls `leaf` on every partial sum over `rows`; with `restrict = Some(c)`
    /// only sums whose (0,0) entry is c.
    fn walk(&self, rows: &[&RowTable], restrict: Option<u32>, leaf: &mut dyn FnMut(&[u32; MAX_K])) {
        self.walk_from(rows, [0u32; MAX_K], restrict, leaf);
    }

    fn walk_from(
        &self,
        rows: &[&RowTable],
        acc: [u32; MAX_K],
        restrict: Option<u32>,
        leaf: &mut dyn FnMut(&[u32; MAX_K]),
    ) {
        match rows {
            [] => {
                if restrict.is_none_or(|c| acc[0] == c) {
                    leaf(&acc);
                }
            }
            [last] => match restrict {
                Some(c) => {
                    let q = self.q as u32;
                    let need = (c + q - acc[0]) % q;
                    for &v in &last.buckets[need as usize] {
                        leaf(&self.add(&acc, &last.contrib[v as usize]));
                    }
                }
                None => {
                    for c in &last.contrib {
                        leaf(&self.add(&acc, c));
                    }
                }
            },
            [first, rest @ ..] => {
                for c in &first.contrib {
                    self.walk_from(rest, self.add(&acc, c), restrict, leaf);
                }
            }
        }
    }

    /// Sum of `lookup` over all partial sums of `rows`, split across threads
    /// by the first row's vector; integer addition keeps it schedule-free.
    fn stream(&self, rows: &[&RowTable], restrict: Option<u32>, lookup: &(dyn Fn(&[u32; MAX_K]) -> u64 + Sync)) -> u128 {
        match rows {
            [] => {
                let mut total = 0u128;
                self.walk(rows, restrict, &mut |acc| total += lookup(acc) as u128);
                total
            }
            [only] => {
                let q = self.q as u32;
                let idx: Vec<u32> = match restrict {
                    Some(c) => only.buckets[c as usize % q as usize].clone(),
                    None => (0..only.contrib.len() as u32).collect(),
                };
                idx.par_iter().map(|&v| lookup(&only.contrib[v as usize]) as u128).sum()
            }
            [first, rest @ ..] => (0..first.contrib.len())
                .into_par_iter()
                .map(|v| {
                    let mut total = 0u128;
                    self.walk_from(rest, first.contrib[v], restrict, &mut |acc| total += lookup(acc) as u128);
                    total
                })
                .sum(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum TableMode {
    /// dense tables up to the given size, then packed-word hashing
    Auto(u64),
    /// hash on the unpacked residue vector regardless of size
    Bytes,
}

struct RowTable {
    contrib: Vec<[u32; MAX_K]>,
    /// vector indices grouped by their (0,0) contribution
    buckets: Vec<Vec<u32>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DensityResult {
    pub raw_count: u128,
    pub t_used: u32,
    pub normalization_exponent: u64,
    #[serde(serialize_with = "crate::rational::serialize_q")]
    pub value: Rational,
    pub stabilized: bool,
}

impl DensityResult {
    pub fn to_json(&self) -> Value {
        let raw = match u64::try_from(self.raw_count) {
            Ok(r) => json!(r),
            Err(_) => json!(self.raw_count.to_string()),
        };
        json!({
            "raw_count": raw,
            "t": self.t_used,
            "normalization_exponent": self.normalization_exponent,
            "value": fmt_q(&self.value),
            "stabilized": self.stabilized,
        })
    }
}

/// Normalized count at a single modulus.
pub fn density_at(job: &CountJob, budget: u128) -> Result<DensityResult> {
    let raw = count_solutions_with_budget(job, budget)?;
    let e = job.normalization_exponent();
    let value = Rational::from_integer(BigInt::from(raw)) * pow_i(job.p.get(), -(e as i64));
    Ok(DensityResult { raw_count: raw, t_used: job.t, normalization_exponent: e, value, stabilized: false })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleOptions {
    /// defaults to the largest Jordan exponent of T plus one
    pub t_start: Option<u32>,
    /// defaults to t_start + 2
    pub t_max: Option<u32>,
    pub strategy: Strategy,
    pub budget: u128,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions { t_start: None, t_max: None, strategy: Strategy::Mitm, budget: DEFAULT_STATE_BUDGET }
    }
}

/// Normalized counts at t_start, t_start + 1, ... until two consecutive
/// values agree.
pub fn density_oracle(s_diag: &[Rational], t: &SymMat, p: OddPrime, opts: OracleOptions) -> Result<DensityResult> {
    let t_start = match opts.t_start {
        Some(t0) => t0,
        None => jordan_diagonalize(t, p)?.max_exponent() + 1,
    };
    let t_max = opts.t_max.unwrap_or(t_start + 2).max(t_start + 1);
    let mut partial: Vec<(u32, String)> = Vec::new();
    let mut prev: Option<DensityResult> = None;
    for tt in t_start..=t_max {
        let job = CountJob::new(s_diag.to_vec(), t.clone(), p, tt, opts.strategy)?;
        let r = match density_at(&job, opts.budget) {
            Ok(r) => r,
            Err(Error::StateBudgetExceeded { .. }) if prev.is_some() => {
                return Err(Error::NoStabilization { t_max: tt - 1, partial });
            }
            Err(e) => return Err(e),
        };
        partial.push((tt, fmt_q(&r.value)));
        if let Some(pr) = &prev {
            if pr.value == r.value {
                return Ok(DensityResult { stabilized: true, ..r });
            }
        }
        prev = Some(r);
    }
    Err(Error::NoStabilization { t_max, partial })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadform::s0_diag;
    use crate::rational::{frac, int};
    use super::Strategy;
    use proptest::prelude::*;

    fn p3() -> OddPrime {
        OddPrime::new(3).unwrap()
    }

    fn ints(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| int(x)).collect()
    }

    fn job(s: &[i64], t: SymMat, p: u64, tt: u32, strategy: Strategy) -> CountJob {
        CountJob::new(ints(s), t, OddPrime::new(p).unwrap(), tt, strategy).unwrap()
    }

    #[test]
    fn small_counts() {
        for st in [Strategy::Naive, Strategy::Mitm] {
            assert_eq!(count_solutions(&job(&[1], SymMat::diag_i64(&[1]), 3, 1, st)).unwrap(), 2);
            // -1 is not a square mod 3, so only (0, 0)
            assert_eq!(count_solutions(&job(&[1, 1], SymMat::diag_i64(&[0]), 3, 1, st)).unwrap(), 1);
            assert_eq!(count_solutions(&job(&[1, 2], SymMat::diag_i64(&[0]), 3, 1, st)).unwrap(), 5);
        }
    }

    #[test]
    fn job_validation() {
        let p = p3();
        assert!(CountJob::new(ints(&[1]), SymMat::diag_i64(&[1, 1]), p, 1, Strategy::Naive).is_err());
        assert!(CountJob::new(vec![frac(1, 3)], SymMat::diag_i64(&[1]), p, 1, Strategy::Naive).is_err());
        assert!(CountJob::new(ints(&[1]), SymMat::diag_i64(&[1]), p, 40, Strategy::Naive).is_err());
        let big = job(&[1, 1, 1, 1, 1], SymMat::diag_i64(&[1, 1, 1, 1]), 3, 3, Strategy::Naive);
        assert!(matches!(count_solutions(&big), Err(Error::StateBudgetExceeded { .. })));
    }

    #[test]
    fn job_json_roundtrip() {
        let j = job(&[1, -1, 2], SymMat::diag_i64(&[1, 3]), 5, 2, Strategy::Naive);
        assert_eq!(CountJob::from_json(&j.to_json()).unwrap(), j);
    }

    #[test]
    fn unary_oracle_values() {
        let d = density_oracle(&s0_diag(), &SymMat::diag_i64(&[1]), p3(), OracleOptions::default()).unwrap();
        assert_eq!(d.value, frac(10, 9));
        assert!(d.stabilized);
        let d = density_oracle(&s0_diag(), &SymMat::diag_i64(&[2]), p3(), OracleOptions::default()).unwrap();
        assert_eq!(d.value, frac(8, 9));
    }

    #[test]
    fn no_stabilization_reports_partial_table() {
        let opts = OracleOptions { t_start: Some(1), t_max: Some(2), ..Default::default() };
        // <1,1> against <3>: values at t = 1 and t = 2 differ
        let r = density_oracle(&ints(&[1, 1]), &SymMat::diag_i64(&[3]), p3(), opts);
        match r {
            Err(Error::NoStabilization { partial, .. }) => assert_eq!(partial.len(), 2),
            other => panic!("expected NoStabilization, got {other:?}"),
        }
    }

    #[test]
    fn every_table_layout_matches_naive() {
        let t = SymMat::from_i64(&[&[1, 1], &[1, 2]]).unwrap();
        for (s, p, tt) in [(&[1, 2, 1][..], 3, 2), (&[1, 1, 3, 2][..], 3, 1), (&[1, -1, 5][..], 5, 1)] {
            let j = job(s, t.clone(), p, tt, Strategy::Naive);
            let naive = count_solutions(&j).unwrap();
            let prob = Problem::new(&j).unwrap();
            let q = prob.q;
            // full dense, partitioned dense, packed hash, vector hash
            for mode in [TableMode::Auto(q * q * q), TableMode::Auto(q * q), TableMode::Auto(1), TableMode::Bytes] {
                assert_eq!(prob.mitm(mode), naive, "{s:?} p={p} t={tt} {mode:?}");
            }
        }
    }

    #[test]
    fn counts_invariant_under_equivalence() {
        let a = SymMat::from_i64(&[&[2, 1], &[1, 2]]).unwrap();
        let b = SymMat::from_i64(&[&[2, 3], &[3, 6]]).unwrap();
        for st in [Strategy::Naive, Strategy::Mitm] {
            let x = count_solutions(&job(&[1, 1, 2], a.clone(), 3, 2, st)).unwrap();
            let y = count_solutions(&job(&[1, 1, 2], b.clone(), 3, 2, st)).unwrap();
            assert_eq!(x, y);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn mitm_equals_naive(
            s in prop::collection::vec(prop::sample::select(vec![1i64, 2, 3, -1, 6, 5]), 1..=5),
            d in prop::collection::vec(-9i64..=9, 3),
            n in 1usize..=2,
            p in prop::sample::select(vec![3u64, 5]),
            t in 1u32..=2,
        ) {
            let m = s.len();
            prop_assume!(m >= n);
            let tm = if n == 1 { SymMat::diag_i64(&[d[0]]) } else {
                SymMat::from_i64(&[&[d[0], d[1]], &[d[1], d[2]]]).unwrap()
            };
            let q = p.pow(t) as u128;
            prop_assume!(q.pow((m * n) as u32) <= 1_000_000);
            let a = count_solutions(&job(&s, tm.clone(), p, t, Strategy::Naive)).unwrap();
            let b = count_solutions(&job(&s, tm, p, t, Strategy::Mitm)).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
