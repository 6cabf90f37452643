use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every variant names the precondition or check that failed so callers (and
/// the CLI) can surface it verbatim.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("valuation of zero undefined")]
    ValuationOfZero,
    #[error("chi requires a p-adic unit (got {0})")]
    NotAUnit(String),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("odd prime required (got {0})")]
    EvenPrime(u64),
    #[error("Hilbert symbol arguments must be nonzero")]
    ZeroArgument,
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("{0} requires nonsingular input")]
    Singular(&'static str),
    #[error("{what} requires p-integral input (p = {p})")]
    NotPIntegral { what: &'static str, p: u64 },
    #[error("form does not represent 1 over Z_{0}")]
    DoesNotRepresentOne(u64),
    #[error("exponents must satisfy 0 <= a1 <= a2 <= a3 (got {0:?})")]
    UnorderedExponents([u32; 3]),
    #[error("rank violation: {0}")]
    RankViolation(String),
    #[error("state budget exceeded: estimated {estimated} states, budget {budget}")]
    StateBudgetExceeded { estimated: u128, budget: u128 },
    #[error("modulus p^t = {0}^{1} is too large for residue arithmetic")]
    ModulusTooLarge(u64, u32),
    #[error("density did not stabilize by t = {t_max}; partial values: {partial:?}")]
    NoStabilization { t_max: u32, partial: Vec<(u32, String)> },
    #[error("reduction formula requires a unimodular entry (p divides T)")]
    ReductionNeedsUnimodular,
    #[error("Kitaoka closed form requires represented 1 (no closed form in scope; use the counting oracle)")]
    ClosedFormNeedsSquareUnit,
    #[error("derivative identity requires Diff(T) to contain p (T is represented by V(Q_p))")]
    DerivativeNeedsDiff,
    #[error("twisted density requires T to be represented by V'(Q_p)")]
    TwistedNeedsRepresentation,
    #[error("denominator vanishes at X = 1")]
    DenominatorVanishes,
    #[error("inconsistent case descriptor: {0}")]
    InconsistentCase(String),
    #[error("quaternions belong to different algebras")]
    MismatchedAlgebras,
    #[error("spin relation failure on word {0}")]
    RelationFailure(String),
    #[error("invalid block specification: {0}")]
    InvalidBlockSpec(String),
    #[error("not an isolated intersection: {0}")]
    NotIsolated(String),
    #[error("invalid quaternion discriminant {0}: {1}")]
    InvalidDiscriminant(u64, &'static str),
    #[error("non-integral Gross-Keating value {0} under a certified hypothesis")]
    NonIntegralMultiplicity(String),
    #[error("parse error: {0}")]
    Parse(String),
}
