//! `nsnorm`: command-line access to the exact NS-norm library.
//!
//! Every command reads JSON (a file path, inline JSON, or stdin) and writes one
//! JSON document to stdout. Exit codes: 0 success, 1 a `verify` check failed
//! or an internal error, 2 an enumeration or pivot budget was exceeded, 3 the
//! input or arguments were invalid.

use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use nsnorm::constructions::{self, BmImage, NsgElement};
use nsnorm::games::{self, PermGame, XorDGame};
use nsnorm::tensor::{self, Dims, Tensor4};
use nsnorm::values::{self, Budget, CorrelationMatrix, DEFAULT_MAX_STRATEGIES};
use nsnorm::{Error, LpError, Rational};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

const DECIMAL_DIGITS: usize = 20;

#[derive(Parser, Debug)]
#[command(name = "nsnorm", version, about = "Exact non-signalling norms, values and games")]
struct Cli {
    /// Cap on worker threads (default: all cores).
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    threads: Option<u16>,
    /// Largest number of strategies an enumeration may visit.
    #[arg(long, global = true, env = "NSNORM_MAX_STRATEGIES", default_value_t = DEFAULT_MAX_STRATEGIES,
          value_parser = positive_u128)]
    max_strategies: u128,
    /// Largest number of simplex pivots per LP.
    #[arg(long, global = true, env = "NSNORM_MAX_PIVOTS", default_value_t = nsnorm::lp::DEFAULT_MAX_PIVOTS,
          value_parser = positive_usize)]
    max_pivots: usize,
    /// Write the result here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

fn positive<T: std::str::FromStr + PartialEq + From<u8>>(s: &str) -> std::result::Result<T, String>
where
    T::Err: std::fmt::Display,
{
    match s.parse::<T>() {
        Ok(v) if v == T::from(0) => Err("must be positive".into()),
        Ok(v) => Ok(v),
        Err(e) => Err(e.to_string()),
    }
}

fn positive_u128(s: &str) -> std::result::Result<u128, String> {
    positive(s)
}

fn positive_usize(s: &str) -> std::result::Result<usize, String> {
    positive(s)
}

#[derive(Args, Debug, Clone)]
struct Input {
    /// JSON file, inline JSON, or `-` for stdin (the default).
    input: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Norms of a tensor (or, for `nsg`, of a matrix with constant row sums).
    Norm {
        kind: NormKind,
        #[command(flatten)]
        input: Input,
    },
    /// Values of a Bell functional over L, NS or by the DNS LP.
    Value {
        kind: ValueKind,
        #[command(flatten)]
        input: Input,
    },
    /// Set membership tests.
    Member {
        kind: MemberKind,
        #[command(flatten)]
        input: Input,
        /// Scale for `colocal` (default 9·max(n1, n2)).
        #[arg(long)]
        scale: Option<Rational>,
    },
    /// Completes a non-negative tensor with ‖P‖_NS ≤ 1 to a dominating point of ‖P‖_NS·NS.
    CompleteSnos {
        #[command(flatten)]
        input: Input,
    },
    /// Splits an ANS tensor or an NSG matrix into two normalized legs.
    Decompose {
        kind: DecomposeKind,
        #[command(flatten)]
        input: Input,
    },
    /// The map T from ANS to the direct-sum model, or its inverse.
    Map {
        kind: MapKind,
        #[command(flatten)]
        input: Input,
    },
    /// Norms of an n × n correlation matrix.
    Corr {
        kind: CorrKind,
        #[command(flatten)]
        input: Input,
    },
    /// Generate permutation and XOR-d games, and compute their values.
    #[command(subcommand)]
    Game(GameCommand),
    /// Seeded experiments with JSON or CSV reports.
    #[command(subcommand)]
    Experiment(ExperimentCommand),
    /// Runs every applicable invariant on a tensor.
    Verify {
        #[command(flatten)]
        input: Input,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum NormKind {
    Ns,
    Bns1,
    Bns2,
    Dual1,
    Dual2,
    Dns,
    Nsg,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ValueKind {
    Classical,
    Ns,
    Dns,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum MemberKind {
    C,
    Ns,
    Ans,
    Snos,
    Colocal,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum DecomposeKind {
    Ans,
    Nsg,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum MapKind {
    T,
    Tinv,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum CorrKind {
    Pi,
    Eps,
    Lv,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum GameCommand {
    /// A random permutation game.
    GenPerm {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
    },
    /// A random XOR-d game.
    GenXord {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        seed: u64,
    },
    /// The Bell tensor of a game.
    Tensor {
        #[command(flatten)]
        input: Input,
    },
    /// The value of a game.
    Value {
        #[arg(long, value_enum)]
        kind: ValueKind,
        #[command(flatten)]
        input: Input,
    },
}

#[derive(Subcommand, Debug)]
enum ExperimentCommand {
    /// Classical values of random permutation games against (3 ln n - 1) n.
    Chernoff {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        trials: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Random checks of the upper bounds over a list of scenarios.
    BoundSweep {
        /// Scenario `n1,k1,n2,k2` or `n,k`; repeatable.
        #[arg(long = "scenario", required = true, value_parser = parse_dims)]
        scenarios: Vec<Dims>,
        #[arg(long, default_value_t = 20)]
        samples: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
}

fn parse_dims(s: &str) -> std::result::Result<Dims, String> {
    let parts: Vec<usize> = s
        .split([',', 'x'])
        .map(|p| p.trim().parse::<usize>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    match parts[..] {
        [n, k] => Dims::square(n, k),
        [n1, k1, n2, k2] => Dims::new(n1, k1, n2, k2),
        _ => return Err("expected n,k or n1,k1,n2,k2".into()),
    }
    .map_err(|e| e.to_string())
}

#[derive(Serialize, Deserialize, Debug)]
#[serde(tag = "type")]
enum Game {
    #[serde(rename = "perm")]
    Perm(PermGame),
    #[serde(rename = "xord")]
    XorD(XorDGame),
}

impl Game {
    fn tensor(&self) -> Result<Tensor4> {
        Ok(match self {
            Game::Perm(g) => games::perm_game_tensor(g),
            Game::XorD(g) => games::xor_d_tensor(g)?,
        })
    }
}

/// Marks errors that come from malformed input rather than from the library.
#[derive(Debug)]
struct Invalid(String);

impl std::fmt::Display for Invalid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Invalid {}

fn invalid(msg: impl Into<String>) -> anyhow::Error {
    Invalid(msg.into()).into()
}

fn read_input(input: &Input) -> Result<String> {
    match input.input.as_deref() {
        None | Some("-") => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s).context("reading stdin")?;
            Ok(s)
        }
        Some(s) if s.trim_start().starts_with(['{', '[']) => Ok(s.to_string()),
        Some(path) => std::fs::read_to_string(path).map_err(|e| invalid(format!("cannot read {path}: {e}"))),
    }
}

fn parse<T: serde::de::DeserializeOwned>(input: &Input, what: &str) -> Result<T> {
    let text = read_input(input)?;
    serde_json::from_str(&text).map_err(|e| invalid(format!("invalid {what} JSON: {e}")))
}

/// A matrix given either as a bare array of rows or as `{"entries": [...]}`.
fn parse_matrix(input: &Input) -> Result<Vec<Vec<Rational>>> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum M {
        Bare(Vec<Vec<Rational>>),
        Wrapped { entries: Vec<Vec<Rational>> },
    }
    Ok(match parse::<M>(input, "matrix")? {
        M::Bare(m) | M::Wrapped { entries: m } => m,
    })
}

fn number(v: &Rational) -> Value {
    json!({ "value": v.to_string(), "decimal": v.to_decimal(DECIMAL_DIGITS) })
}

fn with_number(v: &Rational, extra: Value) -> Value {
    let mut out = number(v);
    if let (Value::Object(o), Value::Object(e)) = (&mut out, extra) {
        o.extend(e);
    }
    out
}

fn to_value<T: Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("library types serialize")
}

enum Output {
    Json(Value),
    Text(String),
}

fn run(cli: &Cli) -> Result<(Output, bool)> {
    let budget = Budget {
        max_strategies: cli.max_strategies,
        max_pivots: cli.max_pivots,
    };
    let out = match &cli.command {
        Command::Norm { kind, input } => {
            if let NormKind::Nsg = kind {
                let e = NsgElement::new(parse_matrix(input)?)?;
                number(&constructions::nsg_norm(&e))
            } else {
                let t: Tensor4 = parse(input, "tensor")?;
                let v = match kind {
                    NormKind::Ns => tensor::norm_ns(&t),
                    NormKind::Bns1 => tensor::norm_bns1(&t),
                    NormKind::Bns2 => tensor::norm_bns2(&t),
                    NormKind::Dual1 => tensor::dual_norm1(&t),
                    NormKind::Dual2 => tensor::dual_norm2(&t),
                    NormKind::Dns => values::dns_norm_with(&t, &budget)?.value,
                    NormKind::Nsg => unreachable!(),
                };
                number(&v)
            }
        }
        Command::Value { kind, input } => {
            let m: Tensor4 = parse(input, "tensor")?;
            value_of(&m, *kind, &budget)?
        }
        Command::Member { kind, input, scale } => {
            let t: Tensor4 = parse(input, "tensor")?;
            match kind {
                MemberKind::C => json!({ "member": tensor::membership_c(&t) }),
                MemberKind::Ns => json!({ "member": tensor::membership_ns(&t) }),
                MemberKind::Snos => json!({ "member": values::membership_snos(&t) }),
                MemberKind::Ans => match tensor::membership_ans(&t) {
                    Some(m) => json!({ "member": true, "marginals": m }),
                    None => json!({ "member": false }),
                },
                MemberKind::Colocal => {
                    let d = t.dims();
                    let scale = scale.clone().unwrap_or_else(|| Rational::from(9 * d.n1.max(d.n2)));
                    if scale.is_negative() {
                        return Err(invalid("scale must be non-negative"));
                    }
                    let gauge = values::co_local_gauge(&t, &budget)?;
                    json!({
                        "member": values::membership_co_local(&t, &scale, &budget)?,
                        "scale": scale.to_string(),
                        "gauge": gauge.as_ref().map(number),
                    })
                }
            }
        }
        Command::CompleteSnos { input } => {
            let p: Tensor4 = parse(input, "tensor")?;
            if tensor::norm_ns(&p) > Rational::one() {
                return Err(invalid("input has NS norm above 1"));
            }
            to_value(&constructions::snos_complete(&p)?)
        }
        Command::Decompose { kind, input } => match kind {
            DecomposeKind::Ans => {
                let r: Tensor4 = parse(input, "tensor")?;
                if tensor::norm_ns(&r) > Rational::one() {
                    return Err(invalid("input lies outside the unit ball (NS norm above 1)"));
                }
                let s = constructions::ans_split(&r)?;
                let mut v = to_value(&s);
                v["lam_decimal"] = s.lam.to_decimal(DECIMAL_DIGITS).into();
                v["mu_decimal"] = s.mu.to_decimal(DECIMAL_DIGITS).into();
                v
            }
            DecomposeKind::Nsg => {
                let e = NsgElement::new(parse_matrix(input)?)?;
                let s = constructions::nsg_decompose(&e)?;
                let mut v = to_value(&s);
                v["big_decimal"] = s.big.to_decimal(DECIMAL_DIGITS).into();
                v["small_decimal"] = s.small.to_decimal(DECIMAL_DIGITS).into();
                v
            }
        },
        Command::Map { kind, input } => match kind {
            MapKind::T => {
                let r: Tensor4 = parse(input, "tensor")?;
                let w = constructions::map_t(&r)?;
                let mut v = to_value(&w);
                v["norm"] = number(&w.norm());
                v
            }
            MapKind::Tinv => {
                let w: BmImage = parse(input, "image")?;
                to_value(&constructions::map_t_inv(&w)?)
            }
        },
        Command::Corr { kind, input } => {
            let t = CorrelationMatrix::new(parse_matrix(input)?)?;
            let v = match kind {
                CorrKind::Pi => values::corr_pi_norm(&t),
                CorrKind::Eps => values::corr_eps_norm(&t, &budget)?,
                CorrKind::Lv => values::corr_lv_ratio(&t, &budget)?,
            };
            number(&v)
        }
        Command::Game(g) => game(g, &budget)?,
        Command::Experiment(e) => return experiment(e, &budget).map(|o| (o, true)),
        Command::Verify { input } => {
            let t: Tensor4 = parse(input, "tensor")?;
            let report = verify(&t, &budget)?;
            let ok = report["pass"].as_bool().unwrap_or(false);
            return Ok((Output::Json(report), ok));
        }
    };
    Ok((Output::Json(out), true))
}

fn value_of(m: &Tensor4, kind: ValueKind, budget: &Budget) -> Result<Value> {
    Ok(match kind {
        ValueKind::Classical => {
            let c = values::classical_value(m, budget)?;
            with_number(&c.value, json!({ "strategy": c.strategy }))
        }
        ValueKind::Ns => {
            let v = values::ns_value_with(m, budget)?;
            with_number(&v.value, json!({ "point": v.point }))
        }
        ValueKind::Dns => {
            let c = values::dns_norm_with(m, budget)?;
            with_number(&c.value, json!({ "m1": c.m1, "m2": c.m2 }))
        }
    })
}

fn game(cmd: &GameCommand, budget: &Budget) -> Result<Value> {
    let read_game = |input: &Input| -> Result<Game> {
        let g: Game = parse(input, "game")?;
        match &g {
            Game::Perm(p) => p.validate()?,
            Game::XorD(x) => x.validate()?,
        }
        Ok(g)
    };
    Ok(match cmd {
        GameCommand::GenPerm { n, seed } => to_value(&Game::Perm(games::gen_perm_game(*n, *seed)?)),
        GameCommand::GenXord { n, d, seed } => to_value(&Game::XorD(games::gen_xor_d_game(*n, *d, *seed)?)),
        GameCommand::Tensor { input } => to_value(&read_game(input)?.tensor()?),
        GameCommand::Value { kind, input } => match (read_game(input)?, kind) {
            (Game::Perm(g), ValueKind::Classical) => {
                let (v, s) = games::perm_game_classical_value(&g, budget)?;
                with_number(&Rational::from(v as usize), json!({ "strategy": s }))
            }
            (Game::Perm(g), ValueKind::Ns) => number(&games::perm_game_ns_value(&g)?.0),
            (g, kind) => value_of(&g.tensor()?, *kind, budget)?,
        },
    })
}

fn experiment(cmd: &ExperimentCommand, budget: &Budget) -> Result<Output> {
    match cmd {
        ExperimentCommand::Chernoff { n, trials, seed, format } => {
            let r = games::chernoff_experiment(*n, *trials, *seed, budget)?;
            Ok(match format {
                Format::Csv => Output::Text(r.to_csv()),
                Format::Json => {
                    let mut v = to_value(&r);
                    v["fraction_below_threshold_decimal"] = r.fraction_below_threshold.to_decimal(DECIMAL_DIGITS).into();
                    v["ratio_median_decimal"] = r.ratio_median.to_decimal(DECIMAL_DIGITS).into();
                    Output::Json(v)
                }
            })
        }
        ExperimentCommand::BoundSweep { scenarios, samples, seed, format } => {
            let rows = games::bound_sweep(scenarios, *samples, *seed, budget)?;
            Ok(match format {
                Format::Csv => Output::Text(games::sweep_csv(&rows)),
                Format::Json => {
                    let mut sign_means = serde_json::Map::new();
                    for d in scenarios {
                        let name = format!("{}x{}x{}x{}", d.n1, d.k1, d.n2, d.k2);
                        let vals: Vec<&Rational> =
                            rows.iter().filter(|r| r.check == "sign" && r.scenario == name).map(|r| &r.value).collect();
                        if !vals.is_empty() {
                            let mean = vals.iter().copied().sum::<Rational>() / Rational::from(vals.len());
                            sign_means.insert(name, number(&mean));
                        }
                    }
                    Output::Json(json!({
                        "all_pass": rows.iter().all(|r| r.pass),
                        "sign_mean_ratio": sign_means,
                        "rows": rows,
                    }))
                }
            })
        }
    }
}

/// Every invariant that applies to `t`, each reported as a named check.
fn verify(t: &Tensor4, budget: &Budget) -> Result<Value> {
    let mut checks: Vec<(String, bool)> = Vec::new();
    let mut add = |name: &str, ok: bool| checks.push((name.to_string(), ok));
    let d = t.dims();
    let nu = tensor::norm_ns(t);

    add("flip_involution", tensor::flip(&tensor::flip(t)) == *t);
    add("bns2_is_flipped_bns1", tensor::norm_bns2(t) == tensor::norm_bns1(&tensor::flip(t)));
    add("nonneg_parts_sum", &tensor::positive_part(t) + &tensor::negative_part(t) == *t);

    let cert = values::dns_norm_with(t, budget)?;
    let (dual, p) = values::dns_norm_dual_with(t, budget)?;
    add("dns_certificate", cert.verify(t));
    add("dns_duality", cert.value == dual);
    add("dns_dual_witness_norm", tensor::norm_ns(&p) <= Rational::one());
    add("dns_below_dual_norms", cert.value <= tensor::dual_norm1(t).min_of(tensor::dual_norm2(t)));

    let classical = if values::classical_strategy_count(d, t.is_nonnegative()) <= budget.max_strategies {
        Some(values::classical_value(t, budget)?.value)
    } else {
        None
    };
    if let Some(cl) = &classical {
        add("classical_below_dns", *cl <= cert.value);
        add("dual1_below_n_classical", tensor::dual_norm1(t) <= Rational::from(d.n1) * cl);
    }

    if t.is_nonnegative() {
        let ns = values::ns_value_with(t, budget)?.value;
        add("ns_value_equals_dns", ns == cert.value);
        if let Some(cl) = &classical {
            add("lv_ratio_bound", ns <= Rational::from(values::lv_bound(d)) * cl);
        }
        if nu <= Rational::one() {
            let q = constructions::snos_complete(t)?;
            add("snos_completion_dominates", t.dominated_by(&q));
            add(
                "snos_completion_in_scaled_ns",
                if nu.is_zero() { q.is_zero() } else { tensor::membership_ns(&q.scale(&nu.recip())) },
            );
        }
    }
    if tensor::membership_c(t) {
        add("nscb", tensor::membership_ns(t) == nu.is_one());
    }
    if let Some(m) = tensor::membership_ans(t) {
        let (pos, neg) = (tensor::positive_part(t), tensor::negative_part(t));
        add("ans_norm_additive", nu == tensor::norm_ns(&pos) + tensor::norm_ns(&neg));
        add("ans_norm_difference", tensor::norm_ns(&pos) - tensor::norm_ns(&neg) == m.total);
        if nu <= Rational::one() {
            let s = constructions::ans_split(t)?;
            add("ans_split_reconstructs", s.reconstruct() == *t);
            add("ans_split_weights", &s.lam + &s.mu == nu && &s.lam - &s.mu == m.total);
        }
        if d.k1 >= 2 && d.k2 >= 2 {
            let w = constructions::map_t(t)?;
            add("t_inverse_round_trip", constructions::map_t_inv(&w)? == *t);
            add("t_norm_bound", w.norm() <= nu);
            add("alpha_sum_is_t_inverse", constructions::alpha_sum(&w)? == *t);
        }
    }
    let pass = checks.iter().all(|(_, ok)| *ok);
    Ok(json!({
        "pass": pass,
        "checks": checks.into_iter().map(|(name, ok)| json!({ "name": name, "pass": ok })).collect::<Vec<_>>(),
    }))
}

fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<Invalid>().is_some() {
        return 3;
    }
    match e.downcast_ref::<Error>() {
        Some(Error::BudgetExceeded { .. }) | Some(Error::Lp(LpError::PivotLimit(_))) => 2,
        Some(
            Error::DimensionMismatch(..)
            | Error::InvalidDims(_)
            | Error::NegativeEntry
            | Error::NotInAns
            | Error::NonConstantRowSum
            | Error::InvalidInput(_)
            | Error::Lp(LpError::Malformed(_)),
        ) => 3,
        _ => 1,
    }
}

fn emit(out: Output, path: Option<&PathBuf>) -> Result<()> {
    let mut text = match out {
        Output::Json(v) => serde_json::to_string(&v)?,
        Output::Text(s) => s,
    };
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n as usize).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let result = run(&cli).and_then(|(out, ok)| {
        emit(out, cli.output.as_ref())?;
        if ok {
            Ok(())
        } else {
            bail!("verification failed")
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
