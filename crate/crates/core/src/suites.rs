//! Named end-to-end check suites shared by the acceptance test target and
//! the `sweep` subcommand.

use std::time::{Duration, Instant};

use num::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::clifford::{
    check_spin_compatibility, involution_tensor_type, positive_involution_criterion, random_words, InvolutionType,
    QuaternionAlgebra, RealQuaternionType, TauDescriptor,
};
use crate::counting::{count_solutions, density_at, density_oracle, estimate_states, CountJob, OracleOptions, Strategy};
use crate::cycles::{
    classify_component, incidence_counts, reduced_distinguished_space, reduced_superspecial_space, ComponentLabel,
    MData,
};
use crate::densities::{assemble_a, catalogue, chi_tilde, kitaoka_ternary_poly, twisted_complement_with_chi, twisted_factors, GKTriple};
use crate::error::Error;
use crate::gkmult::{e_p, transversal};
use crate::padic::{OddPrime, UnitClass};
use crate::poly::derivative_at_1;
use crate::quadform::{
    diff_set, hyperbolic_diag, ramified_norm_diag, represents_local, s0_space, s_r_diag, twisted_diag, twisted_space,
    IncoherentCollection, SymMat,
};
use crate::rational::{fmt_q, frac, int, pow_i, Rational};
use crate::whittaker::verify_ratio_identity;

type Check = std::result::Result<String, String>;

#[derive(Debug, Clone, Serialize)]
pub struct CriterionOutcome {
    pub id: u8,
    pub suite: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl CriterionOutcome {
    pub fn line(&self) -> String {
        format!(
            "[{}] {:>2} {:<18} {:>8.2}s  {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.suite,
            self.elapsed.as_secs_f64(),
            self.detail
        )
    }

    pub fn to_json(&self) -> Value {
        json!({
            "id": self.id,
            "suite": self.suite,
            "passed": self.passed,
            "detail": self.detail,
            "seconds": self.elapsed.as_secs_f64(),
        })
    }
}

struct Criterion {
    id: u8,
    suite: &'static str,
    run: fn() -> Check,
}

const CRITERIA: [Criterion; 11] = [
    Criterion { id: 1, suite: "unary", run: unary },
    Criterion { id: 2, suite: "kitaoka", run: kitaoka },
    Criterion { id: 3, suite: "ratio", run: ratio },
    Criterion { id: 4, suite: "twisted", run: twisted },
    Criterion { id: 5, suite: "dichotomy", run: dichotomy },
    Criterion { id: 6, suite: "diff-parity", run: diff_parity },
    Criterion { id: 7, suite: "gk-table", run: gk_table },
    Criterion { id: 8, suite: "bridge", run: bridge },
    Criterion { id: 9, suite: "appendix", run: appendix },
    Criterion { id: 10, suite: "decisions", run: decisions },
    Criterion { id: 11, suite: "oracle-consistency", run: oracle_consistency },
];

pub fn suite_names() -> Vec<&'static str> {
    let mut v: Vec<&'static str> = CRITERIA.iter().map(|c| c.suite).collect();
    v.push("all");
    v
}

fn execute(c: &Criterion) -> CriterionOutcome {
    let start = Instant::now();
    let r = (c.run)();
    let elapsed = start.elapsed();
    let (passed, detail) = match r {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    CriterionOutcome { id: c.id, suite: c.suite, passed, detail, elapsed }
}

/// Runs one named suite, or every suite for "all". None for unknown names.
pub fn run_suite(name: &str) -> Option<Vec<CriterionOutcome>> {
    run_suite_with(name, |_| {})
}

/// Like [`run_suite`] but calls `each` as soon as a criterion finishes.
pub fn run_suite_with(name: &str, mut each: impl FnMut(&CriterionOutcome)) -> Option<Vec<CriterionOutcome>> {
    let selected: Vec<&Criterion> = CRITERIA.iter().filter(|c| name == "all" || c.suite == name).collect();
    if selected.is_empty() {
        return None;
    }
    Some(
        selected
            .into_iter()
            .map(|c| {
                let o = execute(c);
                each(&o);
                o
            })
            .collect(),
    )
}

fn op(p: u64) -> OddPrime {
    OddPrime::new(p).expect("odd prime literal")
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err(e: Error) -> String {
    e.to_string()
}

fn unary() -> Check {
    let mut cases = 0;
    for p in [3u64, 5] {
        let p = op(p);
        for r in [0usize, 1] {
            for eps0 in [UnitClass::Square, UnitClass::Nonsquare] {
                let t = SymMat::diag_i64(&[eps0.representative(p) as i64]);
                let got = density_oracle(&s_r_diag(r), &t, p, OracleOptions::default()).map_err(err)?;
                let want = int(1) + int(eps0.sign() as i64) * pow_i(p.get(), -2 - r as i64);
                ensure(got.value == want, || {
                    format!("p={p} r={r} eps0={}: oracle {} vs {}", eps0.sign(), fmt_q(&got.value), fmt_q(&want))
                })?;
                cases += 1;
            }
        }
    }
    Ok(format!("{cases} cases exact"))
}

fn kitaoka() -> Check {
    let p = op(3);
    let h4 = hyperbolic_diag(2);
    let mut cases = 0;
    for tr in catalogue(p, 1) {
        let job = CountJob::new(h4.clone(), tr.matrix(), p, 2, Strategy::Mitm).map_err(err)?;
        let oracle = density_at(&job, u128::MAX).map_err(err)?.value;
        let closed = kitaoka_ternary_poly(&tr).eval(&Rational::one()).map_err(err)?;
        ensure(oracle == closed, || format!("{tr}: oracle {} vs closed form {}", fmt_q(&oracle), fmt_q(&closed)))?;
        cases += 1;
    }
    // first unit pattern at (0,1,2) with a nonzero value, so the check is not 0 = 0
    let spot = catalogue(p, 2)
        .into_iter()
        .find(|t| t.a == [0, 1, 2] && kitaoka_ternary_poly(t).eval(&Rational::one()).is_ok_and(|v| !v.is_zero()))
        .ok_or("no nonvanishing pattern at (0,1,2)")?;
    let job = CountJob::new(h4, spot.matrix(), p, 3, Strategy::Mitm).map_err(err)?;
    let oracle = density_at(&job, u128::MAX).map_err(err)?.value;
    let closed = kitaoka_ternary_poly(&spot).eval(&Rational::one()).map_err(err)?;
    ensure(oracle == closed, || format!("{spot} at t=3: oracle {} vs closed form {}", fmt_q(&oracle), fmt_q(&closed)))?;
    Ok(format!("{cases} triples at t=2 plus {spot} at t=3 = {}", fmt_q(&closed)))
}

fn ratio() -> Check {
    let mut checked = 0;
    for p in [3u64, 5] {
        let p = op(p);
        for tr in catalogue(p, 3).into_iter().filter(|t| chi_tilde(t) == -1) {
            let r = verify_ratio_identity(&tr.with_unit(), p).map_err(|e| format!("{tr}: {e}"))?;
            ensure(r.equal, || format!("{tr}: {} vs {}", fmt_q(&r.lhs_coeff), fmt_q(&r.rhs)))?;
            checked += 1;
        }
    }
    let w3 = verify_ratio_identity(&SymMat::diag_i64(&[1, 1, 1, 3]), op(3)).map_err(err)?;
    ensure(w3.lhs_coeff == int(10), || format!("diag(1,1,1,3): coefficient {}", fmt_q(&w3.lhs_coeff)))?;
    // diag(1,1,1,5) is represented by V at 5 since (5,5)_5 = +1, so the
    // identity does not apply; 52 is realized by the nonsquare twist
    let literal = verify_ratio_identity(&SymMat::diag_i64(&[1, 1, 1, 5]), op(5));
    ensure(literal == Err(Error::DerivativeNeedsDiff), || format!("diag(1,1,1,5) at 5: {literal:?}"))?;
    let w5 = verify_ratio_identity(&SymMat::diag_i64(&[1, 1, 2, 5]), op(5)).map_err(err)?;
    ensure(w5.equal && w5.lhs_coeff == int(52), || format!("diag(1,1,2,5): coefficient {}", fmt_q(&w5.lhs_coeff)))?;
    Ok(format!(
        "{checked} catalogue forms equal; diag(1,1,1,3)@3 -> 10; diag(1,1,2,5)@5 -> 52 (diag(1,1,1,5) is represented at 5)"
    ))
}

fn twisted() -> Check {
    let p = op(3);
    let unary = density_oracle(&twisted_diag(p), &SymMat::diag_i64(&[1]), p, OracleOptions::default()).map_err(err)?;
    let complement =
        density_oracle(&ramified_norm_diag(p), &SymMat::diag_i64(&[1, 1, 3]), p, OracleOptions::default()).map_err(err)?;
    let total = &unary.value * &complement.value;
    let closed = twisted_factors(p);
    ensure(total == frac(64, 9), || format!("oracle product {} != 64/9", fmt_q(&total)))?;
    ensure(total == closed.total, || format!("closed form {} disagrees", fmt_q(&closed.total)))?;
    let with_chi = twisted_complement_with_chi(p);
    Ok(format!(
        "unary {} x complement {} = 64/9; complement with chi(-1) would be {} (oracle sides with 2(1+1/p)(p+1))",
        fmt_q(&unary.value),
        fmt_q(&complement.value),
        fmt_q(&with_chi)
    ))
}

fn random_symmetric(rng: &mut ChaCha8Rng, bound: i64) -> SymMat {
    let e: Vec<i64> = (0..10).map(|_| rng.gen_range(-bound..=bound)).collect();
    let rows = [[e[0], e[1], e[2], e[3]], [e[1], e[4], e[5], e[6]], [e[2], e[5], e[7], e[8]], [e[3], e[6], e[8], e[9]]];
    SymMat::from_i64(&[&rows[0], &rows[1], &rows[2], &rows[3]]).expect("symmetric by construction")
}

fn dichotomy() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0005);
    let v = s0_space();
    let mut n = 0;
    while n < 200 {
        let t = random_symmetric(&mut rng, 50);
        if !t.is_nonsingular() {
            continue;
        }
        for p in [3u64, 5, 7] {
            let p = op(p);
            let a = represents_local(&v, &t, p.place()).map_err(err)?;
            let b = represents_local(&twisted_space(p), &t, p.place()).map_err(err)?;
            ensure(a != b, || format!("{t} at {p}: V {a}, V' {b}"))?;
        }
        n += 1;
    }
    Ok(format!("{n} forms x 3 primes, exactly one of V, V' each time"))
}

fn diff_parity() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0006);
    let collections = [("split", IncoherentCollection::split()), ("D=6", IncoherentCollection::with_discriminant(6).map_err(err)?)];
    let mut n = 0;
    let mut sizes = [0usize; 6];
    while n < 100 {
        let t = random_symmetric(&mut rng, 6);
        if t.signature() != (4, 0) {
            continue;
        }
        for (name, c) in &collections {
            let d = diff_set(&t, c).map_err(err)?;
            ensure(d.len() % 2 == 1, || format!("{t} with {name}: Diff {:?} has even size", d))?;
            sizes[d.len().min(5)] += 1;
        }
        n += 1;
    }
    Ok(format!("{n} positive-definite forms x 2 algebras odd; size histogram {:?}", &sizes[1..]))
}

fn gk_table() -> Check {
    let mut rows = 0;
    for p in [3u64, 5, 7] {
        let p = op(p);
        let e = |a: [u32; 3]| e_p(a, p).map(|v| v.value).map_err(err);
        ensure(e([0, 0, 1])? == int(1), || format!("e(0,0,1) at {p}"))?;
        ensure(e([0, 1, 1])? == int(2), || format!("e(0,1,1) at {p}"))?;
        ensure(e([0, 0, 3])? == int(2), || format!("e(0,0,3) at {p}"))?;
        ensure(e([1, 1, 1])? == int(3 + p.get() as i64), || format!("e(1,1,1) at {p}"))?;
        for a3 in 0..=4u32 {
            for a2 in 0..=a3 {
                for a1 in 0..=a2 {
                    let a = [a1, a2, a3];
                    let t = GKTriple::from_signs(a, [1, 1, 1], p).map_err(err)?.with_unit();
                    let is_t = transversal(&t, p).map_err(err)?;
                    let is_one = e(a)? == int(1);
                    let sum_one = a1 + a2 + a3 == 1;
                    ensure(is_t == is_one && is_one == sum_one, || {
                        format!("{a:?} at {p}: transversal {is_t}, e = 1 {is_one}, sum = 1 {sum_one}")
                    })?;
                    rows += 1;
                }
            }
        }
    }
    Ok(format!("anchors hold; {rows} table rows consistent over p = 3, 5, 7"))
}

fn bridge() -> Check {
    let mut checked = 0;
    for p in [3u64, 5] {
        let p = op(p);
        let c = (int(1) - pow_i(p.get(), -2)) * (int(1) - pow_i(p.get(), -4));
        for tr in catalogue(p, 3).into_iter().filter(|t| chi_tilde(t) == -1) {
            let a = assemble_a(&tr.with_unit(), p).map_err(|e| format!("{tr}: {e}"))?;
            let lhs = derivative_at_1(&a).map_err(err)?;
            let rhs = -(&c * e_p(tr.a, p).map_err(err)?.value);
            ensure(lhs == rhs, || format!("{tr}: A'(1) = {} vs {}", fmt_q(&lhs), fmt_q(&rhs)))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} catalogue forms"))
}

fn appendix() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0009);
    let words = random_words(&mut rng, 100, 8);
    let s = check_spin_compatibility(&words).map_err(err)?;
    for (name, b, sig) in [
        ("split", QuaternionAlgebra::split(), (3, 2)),
        ("D=6", QuaternionAlgebra::with_discriminant(6).map_err(err)?, (3, 2)),
        ("(-1,-1)", QuaternionAlgebra::definite(), (5, 0)),
    ] {
        let got = b.vb_space().signature();
        ensure(got == sig, || format!("V_B for {name}: signature {got:?}"))?;
    }
    use InvolutionType::*;
    for (a, b, want) in [(Main, Main, Neben), (Main, Neben, Main), (Neben, Main, Main), (Neben, Neben, Neben)] {
        ensure(involution_tensor_type(a, b) == want, || format!("{a:?} x {b:?}"))?;
    }
    let tau = |conj_sign, square_sign| TauDescriptor { conj_sign, square_sign };
    for (kind, t, want) in [
        (RealQuaternionType::Split, tau(-1, Some(-1)), true),
        (RealQuaternionType::Split, tau(-1, Some(1)), false),
        (RealQuaternionType::Division, tau(1, None), true),
        (RealQuaternionType::Division, tau(-1, Some(-1)), false),
    ] {
        let got = positive_involution_criterion(kind, t).map_err(err)?;
        ensure(got == want, || format!("{kind:?} {t:?}: {got}"))?;
    }
    Ok(format!(
        "{} relations, {} words; V_B signatures; tensor table and positivity predicate",
        s.relations_checked, s.words_checked
    ))
}

fn decisions() -> Check {
    let p = op(3);
    let none = MData::default();
    let rad = MData { has_radical_line: true, ..none };
    let one = MData { represents_one: true, ..none };
    let table = [
        ((3, 3, one), ComponentLabel::Isolated),
        ((0, 0, none), ComponentLabel::PPlusOneLines),
        ((0, 1, none), ComponentLabel::OneLine),
        ((1, 1, none), ComponentLabel::TwoLines),
        ((1, 2, rad), ComponentLabel::OneLine),
    ];
    for ((rank, dim, m), want) in table {
        let got = classify_component(rank, dim, m, p).map_err(err)?;
        ensure(got.label == want, || format!("({rank},{dim},{m:?}): {} vs {want}", got.label))?;
    }
    let mut labelled = 0;
    for rank in 0..=4 {
        for dim in 0..=4 {
            for bits in 0..4 {
                let m = MData { represents_one: bits & 1 == 1, has_radical_line: bits & 2 == 2 };
                match classify_component(rank, dim, m, p) {
                    Ok(c) => {
                        let expected_isolated = m.represents_one;
                        ensure((c.label == ComponentLabel::Isolated) == expected_isolated, || {
                            format!("({rank},{dim},{m:?}) labelled {}", c.label)
                        })?;
                        labelled += 1;
                    }
                    Err(Error::InconsistentCase(_)) => {}
                    Err(e) => return Err(err(e)),
                }
            }
        }
    }
    for p in [3u64, 5, 7, 11] {
        let pp = op(p);
        let values = reduced_superspecial_space(pp).values();
        ensure((1..p).all(|c| values.contains(&c)), || format!("superspecial space not universal at {p}"))?;
        ensure(!reduced_distinguished_space(pp).represents(1), || format!("distinguished space represents 1 at {p}"))?;
    }
    for p in [3u64, 5, 7, 11, 13, 17, 19, 23] {
        let got = incidence_counts(op(p));
        ensure(got == (p + 1, p * p + 1), || format!("incidence at {p}: {got:?}"))?;
    }
    Ok(format!("5 labels, {labelled} consistent inputs; reduced spaces p <= 11; incidences p <= 23"))
}

fn oracle_consistency() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0011);
    let mut jobs = 0;
    let mut max_states = 0u128;
    while jobs < 50 {
        let p = op([3u64, 5, 7][rng.gen_range(0..3)]);
        let n = rng.gen_range(1..=3usize);
        let m = rng.gen_range(n..=n + 3);
        let t = rng.gen_range(1..=2u32);
        let s: Vec<Rational> = (0..m)
            .map(|_| loop {
                let x = rng.gen_range(-12i64..=12);
                if x != 0 {
                    break int(x);
                }
            })
            .collect();
        let mut rows = vec![vec![Rational::zero(); n]; n];
        for i in 0..n {
            for j in i..n {
                let x = int(rng.gen_range(-12i64..=12));
                rows[i][j] = x.clone();
                rows[j][i] = x;
            }
        }
        let target = SymMat::from_rows(rows).map_err(err)?;
        let naive = CountJob::new(s, target, p, t, Strategy::Naive).map_err(err)?;
        let states = estimate_states(&naive);
        if states > 1_000_000 {
            continue;
        }
        let mut mitm = naive.clone();
        mitm.strategy = Strategy::Mitm;
        let a = count_solutions(&naive).map_err(err)?;
        let b = count_solutions(&mitm).map_err(err)?;
        ensure(a == b, || format!("{}: naive {a} vs mitm {b}", naive.to_json()))?;
        max_states = max_states.max(states);
        jobs += 1;
    }
    Ok(format!("{jobs} random jobs agree (largest {max_states} states)"))
}
