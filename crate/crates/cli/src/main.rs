use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use qflab::clifford::{check_spin_compatibility, seeded_words};
use qflab::counting::{density_at, density_oracle, CountJob, OracleOptions, Strategy, DEFAULT_STATE_BUDGET};
use qflab::cycles::{classify_component, is_isolated, MData};
use qflab::densities::{assemble_a, chi_tilde, kitaoka_ternary_poly, GKTriple};
use qflab::gkmult::{e_p, transversal};
use qflab::quadform::{diff_set, s_r_diag, IncoherentCollection};
use qflab::rational::{fmt_q, parse_q, pow_i};
use qflab::suites::{run_suite_with, suite_names};
use qflab::whittaker::{verify_ratio_identity, whittaker_value_budgeted};
use qflab::{Error, OddPrime, Rational, SymMat};

/// println! that stops quietly when stdout is closed (e.g. piped into head)
macro_rules! say {
    ($($arg:tt)*) => {{
        let _ = writeln!(std::io::stdout().lock(), $($arg)*);
    }};
}

#[derive(Parser)]
#[command(name = "qflab", version, about = "Exact local densities and Gross-Keating multiplicities")]
struct Cli {
    /// key = value file supplying defaults (state_budget, strategy, format)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// cap on enumerated states for the counting oracle (also QFLAB_STATE_BUDGET)
    #[arg(long, global = true)]
    state_budget: Option<u128>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Density of a rank-4 form in S_r
    Density(DensityArgs),
    /// Normalized solution count of S[x] = T mod p^t
    Oracle(OracleArgs),
    /// Ternary closed form for diag(eps_i p^a_i)
    Kitaoka(KitaokaArgs),
    /// Gross-Keating multiplicity e_p
    Gk(GkArgs),
    /// Derivative/twisted ratio against (1/2)(p^2+1)(p-1) e_p
    Ratio(PT),
    /// Places where the incoherent collection fails to represent T
    Diff(DiffArgs),
    /// Whether T represents 1 over Z_p
    Isolated(PT),
    /// Component count through a supersingular point
    Classify(ClassifyArgs),
    /// Spin representation relations and symplectic compatibility
    CliffordCheck(CliffordArgs),
    /// Run a named acceptance suite
    Sweep(SweepArgs),
}

#[derive(Args)]
struct PT {
    #[arg(long)]
    p: u64,
    /// "d:1,1,1,3", inline JSON, or a JSON file
    #[arg(long = "T")]
    t: String,
}

#[derive(Args)]
struct DensityArgs {
    #[command(flatten)]
    pt: PT,
    #[arg(long, default_value_t = 0)]
    r: u32,
    #[arg(long, conflicts_with = "oracle")]
    closed: bool,
    #[arg(long)]
    oracle: bool,
}

#[derive(Args)]
struct OracleArgs {
    /// diagonal of S, comma separated
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    s: Vec<String>,
    #[arg(long = "T")]
    t: String,
    #[arg(long)]
    p: u64,
    /// fixed exponent; without it the value is iterated until stable
    #[arg(long = "t")]
    level: Option<u32>,
    #[arg(long)]
    strategy: Option<Strategy>,
}

#[derive(Args)]
struct KitaokaArgs {
    #[arg(long)]
    p: u64,
    #[arg(long, value_delimiter = ',')]
    a: Vec<u32>,
    /// +1 / -1 per entry
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    eps: Vec<i8>,
    /// evaluation point, e.g. 1 or 1/9
    #[arg(long)]
    at: Option<String>,
}

#[derive(Args)]
struct GkArgs {
    #[arg(long)]
    p: u64,
    #[arg(long, value_delimiter = ',', required_unless_present = "table")]
    a: Vec<u32>,
    /// emit every triple with a3 <= --max as CSV
    #[arg(long)]
    table: bool,
    #[arg(long, default_value_t = 4)]
    max: u32,
}

#[derive(Args)]
struct DiffArgs {
    #[arg(long = "T")]
    t: String,
    /// quaternion discriminant, 1 for the split algebra
    #[arg(long, default_value_t = 1)]
    disc: u64,
}

#[derive(Args)]
struct ClassifyArgs {
    #[arg(long)]
    rank: u32,
    #[arg(long)]
    dim: u32,
    #[arg(long, value_delimiter = ',')]
    flags: Vec<Flag>,
    #[arg(long, default_value_t = 3)]
    p: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Flag {
    RepresentsOne,
    HasRadicalLine,
}

#[derive(Args)]
struct CliffordArgs {
    #[arg(long, default_value_t = 100)]
    words: usize,
    #[arg(long, default_value_t = 8)]
    max_len: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    suite: String,
    #[arg(long)]
    format: Option<Format>,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Default)]
struct Config {
    state_budget: Option<u128>,
    strategy: Option<Strategy>,
    format: Option<Format>,
}

enum Failure {
    Usage(String),
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(_)
            | Error::NotPrime(_)
            | Error::EvenPrime(_)
            | Error::NotSymmetric
            | Error::DimensionMismatch(_)
            | Error::UnorderedExponents(_)
            | Error::InvalidBlockSpec(_)
            | Error::InvalidDiscriminant(..) => Failure::Usage(e.to_string()),
            _ => Failure::Check(e.to_string()),
        }
    }
}

type Outcome = Result<bool, Failure>;

fn load_config(path: Option<&PathBuf>) -> Result<Config, Failure> {
    let Some(path) = path else { return Ok(Config::default()) };
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let table: toml::Table = text.parse().map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let mut c = Config::default();
    for (k, v) in table {
        let bad = || Failure::Usage(format!("config key {k}: unexpected value {v}"));
        match k.as_str() {
            "state_budget" => c.state_budget = Some(v.as_integer().filter(|n| *n > 0).ok_or_else(bad)? as u128),
            "strategy" => c.strategy = Some(v.as_str().ok_or_else(bad)?.parse().map_err(|_| bad())?),
            "format" => {
                c.format = Some(Format::from_str(v.as_str().ok_or_else(bad)?, true).map_err(|_| bad())?);
            }
            _ => return Err(Failure::Usage(format!("unknown config key {k}"))),
        }
    }
    Ok(c)
}

fn state_budget(cli: Option<u128>, config: &Config) -> Result<u128, Failure> {
    if let Some(b) = cli {
        return Ok(b);
    }
    if let Ok(v) = std::env::var("QFLAB_STATE_BUDGET") {
        return v.trim().parse().map_err(|_| Failure::Usage(format!("QFLAB_STATE_BUDGET={v} is not an integer")));
    }
    Ok(config.state_budget.unwrap_or(DEFAULT_STATE_BUDGET))
}

fn prime(p: u64) -> Result<OddPrime, Failure> {
    Ok(OddPrime::new(p)?)
}

fn matrix(arg: &str) -> Result<SymMat, Failure> {
    let trimmed = arg.trim_start();
    if trimmed.starts_with("d:") || trimmed.starts_with('{') || trimmed.starts_with('[') {
        return Ok(SymMat::parse(arg)?);
    }
    let text = std::fs::read_to_string(arg).map_err(|e| Failure::Usage(format!("{arg}: {e}")))?;
    Ok(SymMat::parse(&text)?)
}

fn emit(v: &Value) {
    say!("{}", serde_json::to_string(v).expect("serializable"));
}

fn density(a: &DensityArgs, budget: u128, strategy: Strategy) -> Outcome {
    let p = prime(a.pt.p)?;
    let t = matrix(&a.pt.t)?;
    let (method, value) = if a.closed {
        let x = pow_i(p.get(), -(a.r as i64));
        ("closed", assemble_a(&t, p)?.eval(&x)?)
    } else if a.oracle {
        let opts = OracleOptions { strategy, budget, ..Default::default() };
        ("oracle", density_oracle(&s_r_diag(a.r as usize), &t, p, opts)?.value)
    } else {
        ("auto", whittaker_value_budgeted(&t, p, a.r, budget)?)
    };
    emit(&json!({ "T": t.to_json(), "p": p.get(), "r": a.r, "method": method, "value": fmt_q(&value) }));
    Ok(true)
}

fn oracle(a: &OracleArgs, budget: u128, strategy: Strategy) -> Outcome {
    let p = prime(a.p)?;
    let s = a.s.iter().map(|x| parse_q(x)).collect::<Result<Vec<Rational>, _>>()?;
    let t = matrix(&a.t)?;
    let strategy = a.strategy.unwrap_or(strategy);
    let result = match a.level {
        Some(level) => density_at(&CountJob::new(s, t, p, level, strategy)?, budget)?,
        None => density_oracle(&s, &t, p, OracleOptions { strategy, budget, ..Default::default() })?,
    };
    emit(&result.to_json());
    Ok(true)
}

fn kitaoka(a: &KitaokaArgs) -> Outcome {
    let p = prime(a.p)?;
    let (Ok(exps), Ok(eps)) = (<[u32; 3]>::try_from(a.a.as_slice()), <[i8; 3]>::try_from(a.eps.as_slice())) else {
        return Err(Failure::Usage("--a and --eps take three entries each".into()));
    };
    if eps.iter().any(|e| !matches!(e, 1 | -1)) {
        return Err(Failure::Usage("--eps entries must be 1 or -1".into()));
    }
    let triple = GKTriple::from_signs(exps, eps, p)?;
    let poly = kitaoka_ternary_poly(&triple);
    let mut out = json!({
        "p": p.get(),
        "a": exps,
        "eps": eps,
        "chi_tilde": chi_tilde(&triple),
        "polynomial": poly.to_json(),
    });
    if let Some(x) = &a.at {
        let x = parse_q(x)?;
        out["at"] = json!(fmt_q(&x));
        out["value"] = json!(fmt_q(&poly.eval(&x)?));
    }
    emit(&out);
    Ok(true)
}

fn gk(a: &GkArgs) -> Outcome {
    let p = prime(a.p)?;
    if a.table {
        say!("a1,a2,a3,e_p,integral,transversal");
        for a3 in 0..=a.max {
            for a2 in 0..=a3 {
                for a1 in 0..=a2 {
                    let v = e_p([a1, a2, a3], p)?;
                    let t = GKTriple::from_signs([a1, a2, a3], [1, 1, 1], p)?.with_unit();
                    say!("{a1},{a2},{a3},{},{},{}", v.render(), v.integral, transversal(&t, p)?);
                }
            }
        }
        return Ok(true);
    }
    let Ok(exps) = <[u32; 3]>::try_from(a.a.as_slice()) else {
        return Err(Failure::Usage("--a takes three entries".into()));
    };
    say!("{}", e_p(exps, p)?.render());
    Ok(true)
}

fn ratio(a: &PT) -> Outcome {
    let report = verify_ratio_identity(&matrix(&a.t)?, prime(a.p)?)?;
    emit(&report.to_json());
    Ok(report.equal)
}

fn diff(a: &DiffArgs) -> Outcome {
    let t = matrix(&a.t)?;
    let c = if a.disc == 1 { IncoherentCollection::split() } else { IncoherentCollection::with_discriminant(a.disc)? };
    let d = diff_set(&t, &c)?;
    let sig = t.signature();
    let mut out = json!({
        "T": t.to_json(),
        "disc": a.disc,
        "signature": [sig.0, sig.1],
        "diff": d.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
        "odd": d.len() % 2 == 1,
    });
    if matches!(sig, (2, 2) | (0, 4)) {
        out["warning"] = json!(format!("signature {sig:?}: the archimedean place is never counted for this signature"));
    }
    emit(&out);
    Ok(true)
}

fn isolated(a: &PT) -> Outcome {
    let t = matrix(&a.t)?;
    let p = prime(a.p)?;
    emit(&json!({ "T": t.to_json(), "p": p.get(), "isolated": is_isolated(&t, p)? }));
    Ok(true)
}

fn classify(a: &ClassifyArgs) -> Outcome {
    let p = prime(a.p)?;
    let mut m = MData::default();
    for f in &a.flags {
        match f {
            Flag::RepresentsOne => m.represents_one = true,
            Flag::HasRadicalLine => m.has_radical_line = true,
        }
    }
    let c = classify_component(a.rank, a.dim, m, p)?;
    emit(&c.to_json(a.rank, a.dim, m, p));
    Ok(true)
}

fn clifford_check(a: &CliffordArgs) -> Outcome {
    let words = seeded_words(a.seed, a.words, a.max_len.max(1));
    match check_spin_compatibility(&words) {
        Ok(s) => {
            emit(&json!({ "ok": true, "relations_checked": s.relations_checked, "words_checked": s.words_checked }));
            Ok(true)
        }
        Err(e) => {
            emit(&json!({ "ok": false, "failure": e.to_string() }));
            Ok(false)
        }
    }
}

fn sweep(a: &SweepArgs, config: &Config) -> Outcome {
    let format = a.format.or(config.format).unwrap_or(Format::Text);
    if format == Format::Csv {
        say!("id,suite,passed,seconds,detail");
    }
    let outcomes = run_suite_with(&a.suite, |o| match format {
        Format::Text => say!("{}", o.line()),
        Format::Csv => say!("{},{},{},{:.3},\"{}\"", o.id, o.suite, o.passed, o.elapsed.as_secs_f64(), o.detail.replace('"', "'")),
        Format::Json => {}
    })
    .ok_or_else(|| Failure::Usage(format!("unknown suite {}; expected one of {}", a.suite, suite_names().join(", "))))?;
    if format == Format::Json {
        emit(&Value::Array(outcomes.iter().map(|o| o.to_json()).collect()));
    }
    Ok(outcomes.iter().all(|o| o.passed))
}

fn run(cli: &Cli) -> Outcome {
    let config = load_config(cli.config.as_ref())?;
    let budget = state_budget(cli.state_budget, &config)?;
    let strategy = config.strategy.unwrap_or(Strategy::Mitm);
    match &cli.command {
        Command::Density(a) => density(a, budget, strategy),
        Command::Oracle(a) => oracle(a, budget, strategy),
        Command::Kitaoka(a) => kitaoka(a),
        Command::Gk(a) => gk(a),
        Command::Ratio(a) => ratio(a),
        Command::Diff(a) => diff(a),
        Command::Isolated(a) => isolated(a),
        Command::Classify(a) => classify(a),
        Command::CliffordCheck(a) => clifford_check(a),
        Command::Sweep(a) => sweep(a, &config),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Check(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(m)) => {
            eprintln!("usage error: {m}");
            ExitCode::from(2)
        }
    }
}
