//! `mubkit` command-line driver.
//!
//! Every command writes one JSON document `{provenance, result, ...}`.
//! Commands that consume an artifact accept either that envelope or the bare
//! `result` object. Exit codes: 0 definite positive, 1 definite negative,
//! 2 inconclusive or incomplete, 3 input error.

use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use mubkit::commuting::{
    classes_from_mubs, mubs_from_classes, verify_classes, AuxPreset, AuxiliaryBasis, CommutingClassSet,
    CommutingError, WireClassSet,
};
use mubkit::groebner::{buchberger_with, conjecture_probe, GroebnerConfig, GroebnerError};
use mubkit::idealgen::{
    build_i, build_j, build_m, extend_check, ExtendVerdict, IdealError, IdealPresentation, Variant, WireIdeal,
};
use mubkit::mub::{construct, verify_system, Family, MubError, MubSystem, WireMubSystem, DEFAULT_TOL};
use mubkit::polyring::MonomialOrder;
use mubkit::realpoints::{search, SearchConfig};

const EXIT_POSITIVE: u8 = 0;
const EXIT_NEGATIVE: u8 = 1;
const EXIT_INCONCLUSIVE: u8 = 2;
const EXIT_INPUT: u8 = 3;

#[derive(Debug, Error)]
enum CliError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Mub(#[from] MubError),
    #[error(transparent)]
    Ideal(#[from] IdealError),
    #[error(transparent)]
    Groebner(#[from] GroebnerError),
    #[error(transparent)]
    Commuting(#[from] CommutingError),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// Stable machine-readable diagnostic code.
    fn code(&self) -> &'static str {
        match self {
            CliError::Io { .. } => "E_IO",
            CliError::Json(_) => "E_MALFORMED_JSON",
            CliError::Mub(e) | CliError::Ideal(IdealError::Mub(e)) | CliError::Commuting(CommutingError::Mub(e)) => {
                mub_code(e)
            }
            CliError::Ideal(IdealError::Dimension(_)) => "E_DIMENSION",
            CliError::Ideal(IdealError::UnsupportedEntryForm(_) | IdealError::IrrationalConstant(_)) => {
                "E_UNSUPPORTED_ENTRY_FORM"
            }
            CliError::Ideal(IdealError::NotVerified(_)) => "E_NOT_MUB",
            CliError::Ideal(IdealError::Poly(_)) => "E_POLYNOMIAL",
            CliError::Ideal(IdealError::Groebner(_)) | CliError::Groebner(_) => "E_GROEBNER",
            CliError::Commuting(CommutingError::DimensionMismatch(..)) => "E_DIMENSION",
            CliError::Commuting(CommutingError::InvalidAux(_) | CommutingError::UnknownPreset(_)) => "E_AUX_BASIS",
            CliError::Commuting(CommutingError::CertificateFailure(_)) => "E_NOT_COMMUTING_CLASSES",
            CliError::Commuting(CommutingError::Degenerate { .. }) => "E_DEGENERATE_SPECTRUM",
            CliError::Commuting(CommutingError::Malformed(_)) => "E_MALFORMED_INPUT",
            CliError::Commuting(CommutingError::Exact(_)) => "E_DIMENSION",
            CliError::Usage(_) => "E_USAGE",
        }
    }
}

fn mub_code(e: &MubError) -> &'static str {
    match e {
        MubError::DimensionMismatch(..) | MubError::Exact(_) => "E_DIMENSION",
        MubError::NotUnitary => "E_NOT_UNITARY",
        MubError::Parameter(_) => "E_PARAMETER",
        MubError::Malformed(_) => "E_MALFORMED_INPUT",
    }
}

#[derive(Debug, Parser)]
#[command(name = "mubkit", version, about = "Mutually unbiased bases: verification, ideals, Gröbner bases, search")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// JSON file with a RunConfig; explicit flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "MUBKIT_THREADS")]
    threads: Option<usize>,
    /// Write the JSON artifact here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    order: Option<OrderArg>,
    /// Use the real-entry variant of the ideals.
    #[arg(long, global = true)]
    real_entries: bool,
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    restarts: Option<usize>,
    /// Gröbner wall-clock budget in seconds.
    #[arg(long, global = true)]
    max_seconds: Option<f64>,
    #[arg(long, short, global = true)]
    verbose: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OrderArg {
    Lex,
    Degrevlex,
}

impl From<OrderArg> for MonomialOrder {
    fn from(o: OrderArg) -> Self {
        match o {
            OrderArg::Lex => MonomialOrder::Lex,
            OrderArg::Degrevlex => MonomialOrder::DegRevLex,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check that a system of bases is mutually unbiased.
    Verify { input: PathBuf },
    /// Emit a known MUB system.
    Construct {
        /// identity, dim2-triple, identity-fourier, prime-complete, paper-dim4
        /// (or the `name:N` shorthand).
        #[arg(long)]
        family: String,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        p: Option<usize>,
    },
    /// Build the ideal M (default), I, or J from a MUB system.
    BuildIdeal {
        input: PathBuf,
        #[arg(long, value_enum, default_value = "m")]
        kind: IdealKind,
        /// Source basis (1-based) for J.
        #[arg(long, default_value_t = 1)]
        basis: usize,
    },
    /// Reduced Gröbner basis of an ideal artifact.
    Groebner { input: PathBuf },
    /// Decide whether a MUB system can be extended by one basis.
    ExtendCheck { input: PathBuf },
    /// Numeric search for a real point of an ideal artifact.
    Search { input: PathBuf },
    /// Commuting classes of normal matrices.
    #[command(subcommand)]
    Classes(ClassesCommand),
    /// Experimental probe on I + J (dimensions 2 and 3).
    Probe {
        #[arg(long, default_value_t = 2)]
        n: usize,
    },
}

#[derive(Debug, Subcommand)]
enum ClassesCommand {
    FromMubs {
        input: PathBuf,
        /// fourier, gram-schmidt, or paper-n4
        #[arg(long, default_value = "gram-schmidt")]
        aux: String,
    },
    ToMubs { input: PathBuf },
    Verify { input: PathBuf },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum IdealKind {
    M,
    I,
    J,
}

/// Effective settings; the digest of this value goes into every provenance header.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
struct RunConfig {
    order: MonomialOrder,
    real_entries: bool,
    tol: f64,
    seed: u64,
    groebner: GroebnerConfig,
    search: SearchConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            order: MonomialOrder::DegRevLex,
            real_entries: false,
            tol: DEFAULT_TOL,
            seed: 0,
            groebner: GroebnerConfig::default(),
            search: SearchConfig::default(),
        }
    }
}

impl RunConfig {
    fn resolve(g: &GlobalArgs) -> Result<Self, CliError> {
        let mut cfg: RunConfig = match &g.config {
            Some(p) => serde_json::from_str(&read_text(p)?)?,
            None => RunConfig::default(),
        };
        if let Some(o) = g.order {
            cfg.order = o.into();
        }
        cfg.real_entries |= g.real_entries;
        if let Some(t) = g.tol {
            cfg.tol = t;
        }
        if let Some(s) = g.seed {
            cfg.seed = s;
        }
        cfg.search.master_seed = cfg.seed;
        if let Some(r) = g.restarts {
            cfg.search.restarts = r;
        }
        if g.max_seconds.is_some() {
            cfg.groebner.max_seconds = g.max_seconds;
        }
        Ok(cfg)
    }

    fn variant(&self) -> Variant {
        if self.real_entries {
            Variant::RealEntries
        } else {
            Variant::Complex
        }
    }
}

fn read_text(p: &PathBuf) -> Result<String, CliError> {
    let io_err = |source| CliError::Io {
        path: p.display().to_string(),
        source,
    };
    if p.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).map_err(io_err)?;
        Ok(s)
    } else {
        fs::read_to_string(p).map_err(io_err)
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Reads an artifact, unwrapping the `{provenance, result}` envelope if present.
struct Input {
    digest: String,
    value: Value,
}

fn read_input(p: &PathBuf) -> Result<Input, CliError> {
    let text = read_text(p)?;
    let mut value: Value = serde_json::from_str(&text)?;
    if let Some(obj) = value.as_object_mut() {
        if obj.contains_key("provenance") && obj.contains_key("result") {
            value = obj.remove("result").unwrap_or(Value::Null);
        }
    }
    // Digest of the payload, so an envelope and its bare result agree.
    let digest = sha256_hex(serde_json::to_string(&value)?.as_bytes());
    Ok(Input { digest, value })
}

fn read_system(inp: &Input) -> Result<MubSystem, CliError> {
    let w: WireMubSystem = serde_json::from_value(inp.value.clone())?;
    Ok(MubSystem::from_wire(&w)?)
}

fn read_ideal(inp: &Input) -> Result<IdealPresentation, CliError> {
    let w: WireIdeal = serde_json::from_value(inp.value.clone())?;
    Ok(IdealPresentation::from_wire(&w)?)
}

fn parse_family(name: &str, n: Option<usize>, p: Option<usize>) -> Result<Family, CliError> {
    if name.contains(':') {
        return Ok(name.replace('-', "_").parse()?);
    }
    let size = |what: &str, v: Option<usize>| {
        v.ok_or_else(|| CliError::Usage(format!("family {name} needs --{what}")))
    };
    Ok(match name.replace('_', "-").as_str() {
        "identity" => Family::Identity(size("n", n)?),
        "dim2-triple" => Family::Dim2Triple,
        "identity-fourier" => Family::IdentityFourier(size("n", n)?),
        "prime-complete" => Family::PrimeComplete(size("p", p.or(n))?),
        "paper-dim4" => Family::PaperDim4,
        other => return Err(CliError::Usage(format!("unknown family {other:?}"))),
    })
}

struct Outcome {
    exit: u8,
    result: Value,
    extra: Vec<(&'static str, Value)>,
}

fn outcome(exit: u8, result: impl Serialize) -> Result<Outcome, CliError> {
    Ok(Outcome {
        exit,
        result: serde_json::to_value(result)?,
        extra: Vec::new(),
    })
}

fn run(cmd: &Command, cfg: &RunConfig, input_digest: &mut Option<String>) -> Result<Outcome, CliError> {
    let mut load = |p: &PathBuf| -> Result<Input, CliError> {
        let inp = read_input(p)?;
        *input_digest = Some(inp.digest.clone());
        Ok(inp)
    };
    match cmd {
        Command::Verify { input } => {
            let s = read_system(&load(input)?)?;
            let rep = verify_system(&s, cfg.tol)?;
            outcome(if rep.all_pass { EXIT_POSITIVE } else { EXIT_NEGATIVE }, rep)
        }
        Command::Construct { family, n, p } => {
            let s = construct(parse_family(family, *n, *p)?)?;
            outcome(EXIT_POSITIVE, s.to_wire())
        }
        Command::BuildIdeal { input, kind, basis } => {
            let s = read_system(&load(input)?)?;
            let ideal = match kind {
                IdealKind::M => build_m(&s, cfg.variant(), cfg.order)?,
                IdealKind::I => build_i(s.dim, cfg.variant(), cfg.order)?,
                IdealKind::J => {
                    let b = s
                        .bases
                        .get(basis.wrapping_sub(1))
                        .ok_or_else(|| CliError::Usage(format!("--basis {basis} out of range 1..={}", s.len())))?;
                    build_j(b, *basis, s.len() + 1, cfg.variant(), cfg.order)?
                }
            };
            outcome(EXIT_POSITIVE, ideal.to_wire())
        }
        Command::Groebner { input } => {
            let ideal = read_ideal(&load(input)?)?;
            let gens: Vec<_> = ideal.generators.iter().map(|g| g.with_order(cfg.order)).collect();
            match buchberger_with(&gens, cfg.order, &cfg.groebner) {
                Ok(gb) => outcome(EXIT_POSITIVE, gb.to_wire()),
                Err(GroebnerError::Incomplete { reason, stats }) => {
                    outcome(EXIT_INCONCLUSIVE, json!({ "incomplete": true, "reason": reason, "stats": stats }))
                }
                Err(e) => Err(e.into()),
            }
        }
        Command::ExtendCheck { input } => {
            let s = read_system(&load(input)?)?;
            let rep = extend_check(&s, cfg.variant(), cfg.order, &cfg.groebner)?;
            let exit = match rep.verdict {
                ExtendVerdict::NotExtendable => EXIT_POSITIVE,
                ExtendVerdict::Inconclusive | ExtendVerdict::Incomplete => EXIT_INCONCLUSIVE,
            };
            outcome(exit, rep)
        }
        Command::Search { input } => {
            let ideal = read_ideal(&load(input)?)?;
            let r = search(&ideal, &cfg.search);
            outcome(if r.success { EXIT_POSITIVE } else { EXIT_INCONCLUSIVE }, r)
        }
        Command::Classes(ClassesCommand::FromMubs { input, aux }) => {
            let s = read_system(&load(input)?)?;
            let aux = AuxiliaryBasis::preset(aux.parse::<AuxPreset>()?, s.dim)?;
            let c = classes_from_mubs(&s, &aux)?;
            outcome(EXIT_POSITIVE, c.to_wire())
        }
        Command::Classes(ClassesCommand::ToMubs { input }) => {
            let w: WireClassSet = serde_json::from_value(load(input)?.value)?;
            let c = CommutingClassSet::from_wire(&w)?;
            let (s, rep) = mubs_from_classes(&c, cfg.tol, cfg.seed)?;
            let mut out = outcome(if rep.all_pass { EXIT_POSITIVE } else { EXIT_NEGATIVE }, s.to_wire())?;
            out.extra.push(("report", serde_json::to_value(rep)?));
            Ok(out)
        }
        Command::Classes(ClassesCommand::Verify { input }) => {
            let w: WireClassSet = serde_json::from_value(load(input)?.value)?;
            let c = CommutingClassSet::from_wire(&w)?;
            let rep = verify_classes(&c, cfg.tol)?;
            outcome(if rep.all_pass { EXIT_POSITIVE } else { EXIT_NEGATIVE }, rep)
        }
        Command::Probe { n } => {
            let p = conjecture_probe(*n, cfg.order, &cfg.groebner)?;
            let exit = if p.complete { EXIT_POSITIVE } else { EXIT_INCONCLUSIVE };
            outcome(exit, p)
        }
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Verify { .. } => "verify",
        Command::Construct { .. } => "construct",
        Command::BuildIdeal { .. } => "build-ideal",
        Command::Groebner { .. } => "groebner",
        Command::ExtendCheck { .. } => "extend-check",
        Command::Search { .. } => "search",
        Command::Classes(ClassesCommand::FromMubs { .. }) => "classes from-mubs",
        Command::Classes(ClassesCommand::ToMubs { .. }) => "classes to-mubs",
        Command::Classes(ClassesCommand::Verify { .. }) => "classes verify",
        Command::Probe { .. } => "probe",
    }
}

fn emit(path: Option<&PathBuf>, doc: &Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(doc)?;
    text.push('\n');
    match path {
        Some(p) => fs::write(p, text).map_err(|source| CliError::Io {
            path: p.display().to_string(),
            source,
        }),
        None => io::stdout().write_all(text.as_bytes()).map_err(|source| CliError::Io {
            path: "<stdout>".into(),
            source,
        }),
    }
}

fn fail(e: &CliError) -> ExitCode {
    let diag = json!({ "error": { "code": e.code(), "message": e.to_string() } });
    eprintln!("{diag}");
    ExitCode::from(EXIT_INPUT)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match RunConfig::resolve(&cli.global) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    if let Some(t) = cli.global.threads {
        // Only fails if a pool already exists, which cannot happen this early.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    let mut input_digest = None;
    let out = match run(&cli.command, &cfg, &mut input_digest) {
        Ok(o) => o,
        Err(e) => return fail(&e),
    };
    let config_json = serde_json::to_string(&cfg).expect("config serializes");
    let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let mut doc = json!({
        "provenance": {
            "tool": "mubkit",
            "version": env!("CARGO_PKG_VERSION"),
            "command": command_name(&cli.command),
            "config_digest": sha256_hex(config_json.as_bytes()),
            "input_digest": input_digest,
            "timestamp": timestamp,
        },
        "result": out.result,
    });
    for (k, v) in out.extra {
        doc[k] = v;
    }
    if cli.global.verbose {
        eprintln!("{}: exit {}", command_name(&cli.command), out.exit);
    }
    if let Err(e) = emit(cli.global.output.as_ref(), &doc) {
        return fail(&e);
    }
    ExitCode::from(out.exit)
}
