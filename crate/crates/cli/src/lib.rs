//! Command-line front end: generation, certification, bounds, recovery,
//! bilinear forms and seeded sweeps.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 input error, 3 inconclusive certificate.

mod sweep;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use genpr::bounds::{bounds, sharp_lower_bound, BoundsReport};
use genpr::certify::BilinearVerdict;
use genpr::generate::{explicit_mc2, real_squaring_pair};
use genpr::io;
use genpr::recover::recover_checked;
use genpr::rng::{self, tag};
use genpr::{
    generic_form, normed_form, Algebra, AnyCertificate, AnyEnsemble, CertifyConfig, Field, GenKind,
    GenSpec, MeasurementVector, RecoveryConfig, Scalar, Verdict,
};
use serde_json::{json, Value};

pub use sweep::{run_sweep, RankPolicy, SweepSpec, SWEEP_SCHEMA};

#[derive(Debug, Parser)]
#[command(name = "genpr", version, about = "Phase retrieval with Hermitian measurement ensembles")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct Common {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Witness tolerance for certification, residual target for recovery.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Search restarts.
    #[arg(long, global = true)]
    pub restarts: Option<usize>,
    /// R or C.
    #[arg(long, global = true)]
    pub field: Option<Field>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a seeded ensemble.
    Gen(GenArgs),
    /// Decide the phase retrieval property of an ensemble.
    Certify(CertifyArgs),
    /// Bounds on the minimal number of measurements.
    Bounds(BoundsArgs),
    /// Recover a signal from measurements.
    Recover(RecoverArgs),
    /// Certify many generated ensembles and tabulate the verdicts.
    Sweep(SweepArgs),
    /// Build a bilinear form and test it for nonsingularity.
    Bilinear(BilinearArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value = "generic_rank")]
    pub kind: GenKind,
    /// Same rank for every matrix.
    #[arg(long, conflicts_with = "ranks")]
    pub rank: Option<usize>,
    /// Comma-separated ranks, one per matrix.
    #[arg(long, value_delimiter = ',')]
    pub ranks: Option<Vec<usize>>,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    #[arg(long, required_unless_present = "builtin", conflicts_with = "builtin")]
    pub ensemble: Option<PathBuf>,
    #[arg(long)]
    pub builtin: Option<Builtin>,
    /// Random unit vectors for the Jacobian rank check.
    #[arg(long)]
    pub sphere_samples: Option<usize>,
    /// Smallest Jacobian singular value accepted as evidence of injectivity.
    #[arg(long)]
    pub jacobian_tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum Builtin {
    Mc2,
    Squaring,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(long, required_unless_present = "table", conflicts_with = "table")]
    pub d: Option<u64>,
    /// Emit a CSV table for d = 2..=dmax.
    #[arg(long, requires = "dmax")]
    pub table: bool,
    #[arg(long)]
    pub dmax: Option<u64>,
}

#[derive(Debug, Args)]
pub struct RecoverArgs {
    #[arg(long)]
    pub ensemble: PathBuf,
    /// Measurement vector: a JSON array or {"values": [...]}.
    #[arg(long)]
    pub b: PathBuf,
    /// Standard deviation of Gaussian noise added to b.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub dmin: usize,
    #[arg(long)]
    pub dmax: usize,
    #[arg(long)]
    pub nmin: usize,
    #[arg(long)]
    pub nmax: usize,
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    #[arg(long, default_value = "generic_rank")]
    pub kind: GenKind,
    /// Fixed rank for every matrix (default: the largest rank the kind allows).
    #[arg(long, conflicts_with = "random_ranks")]
    pub rank: Option<usize>,
    /// Draw each rank uniformly from the range the kind allows.
    #[arg(long)]
    pub random_ranks: bool,
    /// Fill the wall_ms column; output is then no longer byte-reproducible.
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args)]
pub struct BilinearArgs {
    #[arg(long, conflicts_with_all = ["p", "q", "n"])]
    pub algebra: Option<Algebra>,
    #[arg(long, requires_all = ["q", "n"])]
    pub p: Option<usize>,
    #[arg(long)]
    pub q: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, conflicts_with = "ranks")]
    pub rank: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub ranks: Option<Vec<usize>>,
}

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or malformed input files.
    Input(String),
    /// Failure writing output.
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(m) | CliError::Io(m) => f.write_str(m),
        }
    }
}

impl From<genpr::Error> for CliError {
    fn from(e: genpr::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// What a command produced, and the exit status it maps to.
pub struct Outcome {
    pub text: String,
    pub inconclusive: bool,
}

impl Outcome {
    fn json(v: &Value) -> Self {
        Self {
            text: format!("{}\n", serde_json::to_string_pretty(v).expect("JSON values serialize")),
            inconclusive: false,
        }
    }
}

fn read_json(path: &Path) -> CliResult<Value> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn read_ensemble(path: &Path) -> CliResult<AnyEnsemble> {
    io::ensemble_from_json(&read_json(path)?)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn write_output(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(format!("stdout: {e}"))),
    }
}

fn certify_config(common: &Common) -> CliResult<CertifyConfig> {
    let mut cfg = CertifyConfig::with_seed(common.seed);
    if let Some(r) = common.restarts {
        cfg.restarts = r;
    }
    if let Some(t) = common.tol {
        cfg.witness_tol = t;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_gen(common: &Common, args: &GenArgs) -> CliResult<Outcome> {
    let field = common.field.unwrap_or(Field::Real);
    let ranks = match (&args.ranks, args.rank) {
        (Some(list), _) => {
            if list.len() != args.n {
                return Err(CliError::Input(format!(
                    "--ranks has {} entries but --n is {}",
                    list.len(),
                    args.n
                )));
            }
            list.clone()
        }
        (None, Some(r)) => vec![r; args.n],
        (None, None) => vec![args.kind.max_rank(args.d); args.n],
    };
    let spec = GenSpec::new(args.d, field, args.kind, ranks, common.seed);
    let e = genpr::gen(&spec)?;
    Ok(Outcome::json(&io::any_ensemble_json(&e)))
}

fn certificate_json(c: &AnyCertificate) -> Value {
    match c {
        AnyCertificate::Real(c) => io::certificate_json(c),
        AnyCertificate::Complex(c) => io::certificate_json(c),
    }
}

fn cmd_certify(common: &Common, args: &CertifyArgs) -> CliResult<Outcome> {
    let e = match (&args.ensemble, args.builtin) {
        (Some(path), _) => read_ensemble(path)?,
        (None, Some(Builtin::Mc2)) => AnyEnsemble::from(explicit_mc2()),
        (None, Some(Builtin::Squaring)) => AnyEnsemble::from(real_squaring_pair()),
        (None, None) => return Err(CliError::Input("one of --ensemble or --builtin is required".into())),
    };
    let mut cfg = certify_config(common)?;
    if let Some(s) = args.sphere_samples {
        cfg.sphere_samples = s;
    }
    if let Some(t) = args.jacobian_tol {
        cfg.jacobian_tol = t;
    }
    cfg.validate()?;
    let cert = e.certify(&cfg)?;
    let mut out = Outcome::json(&certificate_json(&cert));
    out.inconclusive = cert.verdict() == Verdict::Inconclusive;
    Ok(out)
}

fn provenance_text(r: &BoundsReport) -> String {
    let p = &r.provenance;
    let mut parts = Vec::new();
    if let Some(l) = &p.lower {
        parts.push(format!("lower: {l}"));
    }
    parts.push(format!("upper: {}", p.upper));
    if let Some(e) = &p.exact {
        parts.push(format!("exact: {e}"));
    }
    parts.join("; ")
}

fn opt(v: Option<u64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn cmd_bounds(common: &Common, args: &BoundsArgs) -> CliResult<Outcome> {
    if let Some(d) = args.d {
        let report = bounds(d, common.field.unwrap_or(Field::Real))?;
        let v = serde_json::to_value(&report).expect("report serializes");
        return Ok(Outcome::json(&v));
    }
    let dmax = args.dmax.expect("clap requires --dmax with --table");
    if dmax < 2 {
        return Err(CliError::Input(format!("--dmax {dmax} must be at least 2")));
    }
    let fields = match common.field {
        Some(f) => vec![f],
        None => vec![Field::Real, Field::Complex],
    };
    let mut w = csv::Writer::from_writer(Vec::new());
    let io_err = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(["d", "field", "lower", "upper", "exact", "provenance"]).map_err(io_err)?;
    for d in 2..=dmax {
        for &f in &fields {
            let r = bounds(d, f)?;
            w.write_record([
                d.to_string(),
                f.to_string(),
                opt(r.lower),
                r.upper.to_string(),
                opt(r.exact),
                provenance_text(&r),
            ])
            .map_err(io_err)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    Ok(Outcome {
        text: String::from_utf8(bytes).expect("CSV output is UTF-8"),
        inconclusive: false,
    })
}

fn cmd_recover(common: &Common, args: &RecoverArgs) -> CliResult<Outcome> {
    if !(args.noise.is_finite() && args.noise >= 0.0) {
        return Err(CliError::Input(format!("--noise {} must be a nonnegative number", args.noise)));
    }
    let e = read_ensemble(&args.ensemble)?;
    let mut b = io::measurements_from_json(&read_json(&args.b)?)
        .map_err(|err| CliError::Input(format!("{}: {err}", args.b.display())))?;
    if args.noise > 0.0 {
        let mut stream = rng::stream(common.seed, &[tag::RECOVER, u64::MAX]);
        for v in b.0.iter_mut() {
            *v += args.noise * f64::gaussian(&mut stream);
        }
    }
    let mut cfg = RecoveryConfig { seed: common.seed, ..RecoveryConfig::default() };
    if let Some(t) = common.tol {
        cfg.gn_tol = t;
    }
    let ccfg = CertifyConfig {
        restarts: common.restarts.unwrap_or(CertifyConfig::default().restarts),
        ..CertifyConfig::with_seed(common.seed)
    };
    let mut v = match &e {
        AnyEnsemble::Real(e) => io::recovery_json(&recover_checked(e, &b, &cfg, &ccfg)?),
        AnyEnsemble::Complex(e) => io::recovery_json(&recover_checked(e, &b, &cfg, &ccfg)?),
    };
    v["measurements"] = io::measurements_json(&MeasurementVector(b.0.clone()))["values"].clone();
    v["noise"] = json!(args.noise);
    v["seed"] = json!(common.seed);
    Ok(Outcome::json(&v))
}

fn cmd_sweep(common: &Common, args: &SweepArgs) -> CliResult<Outcome> {
    let ranks = match (args.rank, args.random_ranks) {
        (Some(r), _) => RankPolicy::Fixed(r),
        (None, true) => RankPolicy::Random,
        (None, false) => RankPolicy::Full,
    };
    let spec = SweepSpec {
        d_range: (args.dmin, args.dmax),
        n_range: (args.nmin, args.nmax),
        field: common.field.unwrap_or(Field::Real),
        kind: args.kind,
        ranks,
        trials: args.trials,
        restarts: common.restarts.unwrap_or(CertifyConfig::default().restarts),
        witness_tol: common.tol,
        seed: common.seed,
        timing: args.timing,
    };
    Ok(Outcome {
        text: run_sweep(&spec)?,
        inconclusive: false,
    })
}

fn cmd_bilinear(common: &Common, args: &BilinearArgs) -> CliResult<Outcome> {
    let restarts = common.restarts.unwrap_or(64);
    let (form, source) = match (args.algebra, args.p, args.q, args.n) {
        (Some(a), _, _, _) => (normed_form(a), json!({ "algebra": a })),
        (None, Some(p), Some(q), Some(n)) => {
            let ranks = match (&args.ranks, args.rank) {
                (Some(list), _) if list.len() == n => list.clone(),
                (Some(list), _) => {
                    return Err(CliError::Input(format!(
                        "--ranks has {} entries but --n is {n}",
                        list.len()
                    )))
                }
                (None, Some(r)) => vec![r; n],
                (None, None) => vec![p.min(q); n],
            };
            let f = generic_form(p, q, &ranks, common.seed)?;
            (f, json!({ "generic": { "ranks": ranks, "seed": common.seed } }))
        }
        _ => return Err(CliError::Input("give --algebra, or all of --p, --q and --n".into())),
    };
    let verdict: BilinearVerdict = form.nonsingularity(restarts, common.seed)?;
    let (p, q, _) = form.size();
    let v = json!({
        "source": source,
        "form": io::bilinear_json(&form),
        "result": verdict,
        "stiefel_hopf_lower_bound": sharp_lower_bound(p as u64, q as u64)?,
        "restarts": restarts,
        "seed": common.seed,
    });
    Ok(Outcome::json(&v))
}

/// Run a parsed command line, writing its output. Returns the process exit code.
pub fn run(cli: &Cli) -> CliResult<u8> {
    let common = &cli.common;
    let outcome = match &cli.command {
        Command::Gen(a) => cmd_gen(common, a)?,
        Command::Certify(a) => cmd_certify(common, a)?,
        Command::Bounds(a) => cmd_bounds(common, a)?,
        Command::Recover(a) => cmd_recover(common, a)?,
        Command::Sweep(a) => cmd_sweep(common, a)?,
        Command::Bilinear(a) => cmd_bilinear(common, a)?,
    };
    write_output(common.out.as_deref(), &outcome.text)?;
    Ok(if outcome.inconclusive { 3 } else { 0 })
}
