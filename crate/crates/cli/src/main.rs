mod plot;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use deltak::clifford::{self, LowTarget};
use deltak::gap::{self, CheckMode, OperatorElement};
use deltak::homotopy::{self, PathFile};
use deltak::localizer::{self, Parity, SpectralTriple};
use deltak::models::{self, CircleModel};
use deltak::{CMatrix, Error, TolerancePolicy};

const EXIT_VERDICT_FALSE: u8 = 2;
const EXIT_ERROR: u8 = 1;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "deltak", version, about = "Gap certificates, Clifford reductions, homotopy checks and localizer indices")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Zero-threshold factor: tau = factor * dim * eps * ||M||.
    #[arg(long, global = true, env = "DELTAK_TOL_FACTOR", default_value_t = 16.0)]
    tol_factor: f64,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for randomly generated inputs.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write an SVG eigenvalue plot here (plus a CSV dump next to it).
    #[arg(long, global = true)]
    plot: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Decide delta-singularity of an element.
    GapCheck(GapCheckArgs),
    /// Assemble both localizers at one (kappa, s) and check the gap bound.
    Localizer(LocalizerArgs),
    /// Integer index of an element against a spectral triple.
    Index(IndexArgs),
    /// Truncated circle winding demo.
    Circle(CircleArgs),
    /// Check Clifford relations, embedding round trips and doubling similarities.
    CliffordVerify(CliffordArgs),
    /// Certify a sampled homotopy.
    HomotopyVerify(HomotopyArgs),
    /// Straight-line contraction of an invertible matrix.
    Contract(ContractArgs),
}

#[derive(Args)]
struct ElementInput {
    /// Matrix file (.json or .csv).
    #[arg(long)]
    matrix: PathBuf,
    /// Number of element blocks n (matrix is d*n square).
    #[arg(long, default_value_t = 1)]
    block_size: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Spectrum,
    Grid,
    SelfAdjoint,
}

#[derive(Args)]
struct GapCheckArgs {
    #[command(flatten)]
    input: ElementInput,
    #[arg(long)]
    delta: f64,
    #[arg(long, value_enum, default_value = "spectrum")]
    mode: ModeArg,
    #[arg(long, default_value_t = 9)]
    grid_points: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum ParityArg {
    Odd,
    Even,
}

#[derive(Args)]
struct TripleInput {
    /// Spectral triple JSON ({"parity", "d0", ...}).
    #[arg(long, conflicts_with = "dirac")]
    triple: Option<PathBuf>,
    /// Dirac matrix (odd) or its off-diagonal block (even).
    #[arg(long)]
    dirac: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "odd")]
    parity: ParityArg,
}

#[derive(Args)]
struct LocalizerArgs {
    #[command(flatten)]
    input: ElementInput,
    #[command(flatten)]
    triple: TripleInput,
    #[arg(long)]
    kappa: f64,
    #[arg(long, default_value_t = 0.0)]
    s: f64,
    /// Gap used for g_s = min{s, delta - s}; measured when absent.
    #[arg(long)]
    delta: Option<f64>,
}

#[derive(Args)]
struct IndexArgs {
    #[command(flatten)]
    input: ElementInput,
    #[command(flatten)]
    triple: TripleInput,
    #[arg(long)]
    delta: f64,
    /// Evaluate at this single kappa instead of the region samples.
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    s: Option<f64>,
}

#[derive(Args)]
struct CircleArgs {
    /// Winding number.
    #[arg(long, allow_hyphen_values = true)]
    m: Option<i64>,
    /// Truncation: modes -N..=N.
    #[arg(long = "N")]
    n: Option<usize>,
    /// JSON config {"model": "circle", "N": .., "m": ..}; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Evaluate at this kappa only (default: region sample points).
    #[arg(long)]
    kappa: Option<f64>,
    /// Evaluate at this s only.
    #[arg(long)]
    s: Option<f64>,
}

#[derive(Args)]
struct CliffordArgs {
    #[arg(long)]
    p: usize,
    /// Largest accepted relation residual.
    #[arg(long, default_value_t = 1e-12)]
    max_residual: f64,
    /// Element for the embedding and doubling checks; seeded random if absent.
    #[arg(long)]
    matrix: Option<PathBuf>,
    #[arg(long, default_value_t = 0.3)]
    s: f64,
}

#[derive(Args)]
struct HomotopyArgs {
    /// Path JSON {"delta", "mode": "sa"|"general", "samples": [{"t", "matrix"}]}.
    #[arg(long)]
    path: PathBuf,
    /// Override the delta stored in the file.
    #[arg(long)]
    delta: Option<f64>,
}

#[derive(Args)]
struct ContractArgs {
    #[arg(long, conflicts_with = "random_dim")]
    matrix: Option<PathBuf>,
    /// Contract a seeded random Gaussian matrix of this dimension.
    #[arg(long)]
    random_dim: Option<usize>,
    #[arg(long, default_value_t = 65)]
    samples: usize,
    /// Include every path sample in the report.
    #[arg(long)]
    emit_path: bool,
}

enum Failure {
    Lib(Error),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type Outcome = Result<(Value, bool), Failure>;

fn read_matrix(path: &Path) -> Result<CMatrix, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    let is_csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    if is_csv {
        Ok(CMatrix::from_csv(&text)?)
    } else {
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())).into())
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())).into())
}

fn read_element(input: &ElementInput, policy: &TolerancePolicy) -> Result<OperatorElement, Failure> {
    Ok(OperatorElement::with_policy(read_matrix(&input.matrix)?, input.block_size, policy)?)
}

fn read_triple(input: &TripleInput, policy: &TolerancePolicy) -> Result<SpectralTriple, Failure> {
    let (parity, d0) = match (&input.triple, &input.dirac) {
        (Some(p), _) => {
            let t: SpectralTriple = read_json(p)?;
            (t.parity, t.d0)
        }
        (None, Some(p)) => {
            let parity = match input.parity {
                ParityArg::Odd => Parity::Odd,
                ParityArg::Even => Parity::Even,
            };
            (parity, read_matrix(p)?)
        }
        (None, None) => return Err(Failure::Io("one of --triple or --dirac is required".into())),
    };
    Ok(match parity {
        Parity::Odd => SpectralTriple::odd(d0, policy)?,
        Parity::Even => SpectralTriple::even(d0)?,
    })
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn write_plot(plot: &Option<PathBuf>, eigs: &[f64], tau: f64, title: &str) -> Result<(), Failure> {
    let Some(svg_path) = plot else { return Ok(()) };
    let io = |e: std::io::Error| Failure::Io(format!("{}: {e}", svg_path.display()));
    fs::write(svg_path, plot::eigenvalue_svg(eigs, tau, title)).map_err(io)?;
    fs::write(svg_path.with_extension("csv"), plot::eigenvalue_csv(eigs)).map_err(io)?;
    Ok(())
}

fn gap_check(a: &GapCheckArgs, policy: &TolerancePolicy) -> Outcome {
    let x = read_element(&a.input, policy)?;
    let mode = match a.mode {
        ModeArg::Spectrum => CheckMode::Spectrum,
        ModeArg::Grid => CheckMode::Grid,
        ModeArg::SelfAdjoint => CheckMode::SelfAdjoint,
    };
    let cert = gap::delta_singular_check(&x, a.delta, mode, a.grid_points, policy)?;
    Ok((to_value(&cert), cert.verdict))
}

fn localizer_cmd(a: &LocalizerArgs, common: &Common, policy: &TolerancePolicy) -> Outcome {
    let x = read_element(&a.input, policy)?;
    let t = read_triple(&a.triple, policy)?;
    let snap = localizer::snapshot(&t, &x, a.kappa, a.s, policy)?;
    let bound = localizer::gap_bound_check(&t, &x, a.kappa, a.s, a.delta, policy)?;
    write_plot(
        &common.plot,
        &snap.reduced_eigenvalues,
        snap.reduced_tolerance,
        &format!("reduced localizer, kappa = {}, s = {}", a.kappa, a.s),
    )?;
    let mut v = to_value(&snap);
    v["gap_bound_check"] = to_value(&bound);
    Ok((v, bound.holds))
}

fn index_report(report: &localizer::LocalizerReport, common: &Common, title: &str) -> Outcome {
    write_plot(&common.plot, &report.primary.reduced_eigenvalues, report.primary.reduced_tolerance, title)?;
    Ok((to_value(report), true))
}

fn index_cmd(a: &IndexArgs, common: &Common, policy: &TolerancePolicy) -> Outcome {
    let x = read_element(&a.input, policy)?;
    let t = read_triple(&a.triple, policy)?;
    let point = match (a.kappa, a.s) {
        (None, None) => None,
        (k, s) => {
            let region = localizer::valid_region(&t, &x, a.delta, policy)?;
            Some((k.unwrap_or(region.default_kappa), s.unwrap_or(region.default_s)))
        }
    };
    let report = localizer::index(&t, &x, a.delta, point, policy)?;
    index_report(&report, common, &format!("reduced localizer, index {}", report.index))
}

fn circle_cmd(a: &CircleArgs, common: &Common, policy: &TolerancePolicy) -> Outcome {
    let base = match &a.config {
        Some(p) => {
            let v: Value = read_json(p)?;
            if v.get("model").and_then(Value::as_str).is_some_and(|m| m != "circle") {
                return Err(Error::Parse(format!("unsupported model {}", v["model"])).into());
            }
            let model: CircleModel =
                serde_json::from_value(v).map_err(|e| Error::Parse(format!("{}: {e}", p.display())))?;
            Some(model)
        }
        None => None,
    };
    let m = a.m.or(base.map(|b| b.m)).ok_or_else(|| Failure::Io("--m (or a config) is required".into()))?;
    let n = a.n.or(base.map(|b| b.n)).ok_or_else(|| Failure::Io("--N (or a config) is required".into()))?;
    let report = models::winding_demo(m, n, a.kappa, a.s, policy)?;
    let title = format!("circle m = {m}, N = {n}, kappa = {:.4}: index {}", report.primary.kappa, report.index);
    let (mut v, ok) = index_report(&report, common, &title)?;
    v["model"] = json!({"model": "circle", "N": n, "m": m});
    v["expected_index"] = json!(m);
    Ok((v, ok))
}

fn clifford_cmd(a: &CliffordArgs, common: &Common, policy: &TolerancePolicy) -> Outcome {
    let mut reps = Vec::new();
    let mut ok = true;
    for q in 1..=a.p {
        let rep = clifford::clifford_rep(q)?;
        let r = clifford::relation_residuals(&rep);
        ok &= r.max() < a.max_residual;
        reps.push(json!({"p": q, "rep_dim": rep.rep_dim, "residuals": r, "max_residual": r.max()}));
    }
    let x = match &a.matrix {
        Some(p) => OperatorElement::with_policy(read_matrix(p)?, 1, policy)?,
        None => models::random_gapped(3, 1, 0.3, true, common.seed)?,
    };
    let mut round_trips = Vec::new();
    let targets: &[(LowTarget, usize)] =
        if x.self_adjoint { &[(LowTarget::V0, 0), (LowTarget::V1, 1)] } else { &[(LowTarget::V1, 1)] };
    for &(target, p) in targets {
        let y = clifford::embed_low(&x, target)?;
        let back = clifford::reduce_periodic(&y, p, policy)?;
        let err = (&back.matrix - &x.matrix).max_abs();
        let same = err <= policy.threshold(x.dim(), x.matrix.max_abs().max(1.0));
        ok &= same;
        round_trips.push(json!({"target": target, "p": p, "max_error": err, "identity": same}));
    }
    let doubling = clifford::verify_doubling(&x, a.s, policy)?;
    ok &= doubling.holds();
    let v = json!({
        "p": a.p,
        "max_residual_allowed": a.max_residual,
        "representations": reps,
        "round_trips": round_trips,
        "doubling": {"s": a.s, "result": doubling, "holds": doubling.holds()},
        "verdict": ok,
    });
    Ok((v, ok))
}

fn homotopy_cmd(a: &HomotopyArgs, policy: &TolerancePolicy) -> Outcome {
    let file: PathFile = read_json(&a.path)?;
    let (path, delta, mode) = file.into_path(policy)?;
    let cert = homotopy::verify_path(&path, a.delta.unwrap_or(delta), mode, policy)?;
    Ok((to_value(&cert), cert.verdict))
}

fn contract_cmd(a: &ContractArgs, common: &Common, policy: &TolerancePolicy) -> Outcome {
    let m = match (&a.matrix, a.random_dim) {
        (Some(p), _) => read_matrix(p)?,
        (None, Some(d)) => models::random_gapped(d, 1, 0.5, false, common.seed)?.matrix,
        (None, None) => return Err(Failure::Io("one of --matrix or --random-dim is required".into())),
    };
    let x = OperatorElement::with_policy(m, 1, policy)?;
    let c = homotopy::contract_invertible(&x, a.samples, policy)?;
    let min = c.min_singular_values.iter().copied().fold(f64::INFINITY, f64::min);
    let mut v = json!({
        "z": [c.z.re, c.z.im],
        "theta": c.theta,
        "samples": a.samples,
        "parameters": c.path.parameters,
        "min_singular_values": c.min_singular_values,
        "min_singular_value": min,
        "verdict": true,
    });
    if a.emit_path {
        let samples: Vec<Value> = c
            .path
            .samples
            .iter()
            .zip(&c.path.parameters)
            .map(|(s, t)| json!({"t": t, "matrix": s.matrix}))
            .collect();
        v["path"] = json!({"delta": 0.0, "mode": "general", "samples": samples});
    }
    Ok((v, true))
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::GapCheck(_) => "gap-check",
        Command::Localizer(_) => "localizer",
        Command::Index(_) => "index",
        Command::Circle(_) => "circle",
        Command::CliffordVerify(_) => "clifford-verify",
        Command::HomotopyVerify(_) => "homotopy-verify",
        Command::Contract(_) => "contract",
    }
}

fn emit(out: &Option<PathBuf>, v: &Value) -> Result<(), String> {
    let text = serde_json::to_string_pretty(v).expect("json values serialize") + "\n";
    match out {
        Some(p) => fs::write(p, text).map_err(|e| format!("{}: {e}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    let common = &cli.common;
    let policy = match TolerancePolicy::new(common.tol_factor) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let outcome = match &cli.command {
        Command::GapCheck(a) => gap_check(a, &policy),
        Command::Localizer(a) => localizer_cmd(a, common, &policy),
        Command::Index(a) => index_cmd(a, common, &policy),
        Command::Circle(a) => circle_cmd(a, common, &policy),
        Command::CliffordVerify(a) => clifford_cmd(a, common, &policy),
        Command::HomotopyVerify(a) => homotopy_cmd(a, &policy),
        Command::Contract(a) => contract_cmd(a, common, &policy),
    };
    let header = json!({
        "command": command_name(&cli.command),
        "version": env!("CARGO_PKG_VERSION"),
        "tolerance": policy,
    });
    let (mut report, code) = match outcome {
        Ok((result, verdict)) => {
            let code = if verdict { 0 } else { EXIT_VERDICT_FALSE };
            (json!({"verdict": verdict, "result": result}), code)
        }
        Err(Failure::Lib(e)) => {
            let code = if e.is_verdict() { EXIT_VERDICT_FALSE } else { EXIT_ERROR };
            eprintln!("error: {e}");
            (json!({"verdict": false, "error": e.code(), "detail": e.to_string()}), code)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            (json!({"verdict": false, "error": "Io", "detail": msg}), EXIT_ERROR)
        }
    };
    for (k, v) in header.as_object().unwrap() {
        report[k] = v.clone();
    }
    if let Err(msg) = emit(&common.out, &report) {
        eprintln!("error: {msg}");
        return ExitCode::from(EXIT_ERROR);
    }
    ExitCode::from(code)
}
