//! Batch front end: specification files in, verification reports out.

pub mod model;
pub mod output;
pub mod run;
pub mod spec;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use geobundle::numcheck::IntervalPair;
use geobundle::{NumericContext, StructureReport};

use crate::model::Model;
use crate::output::{Format, Header};
use crate::spec::{Kind, SpecFile};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "geobundle", version, about = "Verify tangent and cotangent bundle structures")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check the tangent-structure axioms.
    VerifyTangent(Opts),
    /// Check the cotangent-structure axioms and Poisson identities.
    VerifyCotangent(Opts),
    /// Compute vertical distributions.
    Vertical(Opts),
    /// Test second-order character of vector fields.
    Sode(Opts),
    /// Build the vertical endomorphism from a SODE.
    BuildS(Opts),
    /// Run Legendre transports.
    Legendre(Opts),
    /// Compose Legendre maps.
    Foul(Opts),
    /// Hamiltonian fields and alternative descriptions.
    Hamiltonian(Opts),
    /// Every task of every file.
    ReportAll(Opts),
}

impl Command {
    pub fn opts(&self) -> &Opts {
        match self {
            Command::VerifyTangent(o)
            | Command::VerifyCotangent(o)
            | Command::Vertical(o)
            | Command::Sode(o)
            | Command::BuildS(o)
            | Command::Legendre(o)
            | Command::Foul(o)
            | Command::Hamiltonian(o)
            | Command::ReportAll(o) => o,
        }
    }

    pub fn kind(&self) -> Option<Kind> {
        match self {
            Command::VerifyTangent(_) => Some(Kind::Tangent),
            Command::VerifyCotangent(_) => Some(Kind::Cotangent),
            Command::Vertical(_) => Some(Kind::Vertical),
            Command::Sode(_) => Some(Kind::Sode),
            Command::BuildS(_) => Some(Kind::BuildS),
            Command::Legendre(_) => Some(Kind::Legendre),
            Command::Foul(_) => Some(Kind::Foul),
            Command::Hamiltonian(_) => Some(Kind::Hamiltonian),
            Command::ReportAll(_) => None,
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct Opts {
    /// Specification files.
    #[arg(required = true)]
    pub specs: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Sample points per zero test.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Relative tolerance for algebraic residuals.
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Treat probably-zero verdicts as failures.
    #[arg(long)]
    pub strict: bool,
    /// Sample from [-hi, -lo] u [lo, hi].
    #[arg(long, value_parser = parse_domain)]
    pub domain: Option<(f64, f64)>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Record wall-clock times (reports are then not byte-stable).
    #[arg(long)]
    pub timings: bool,
}

fn parse_domain(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected lo,hi")?;
    let lo: f64 = a.trim().parse().map_err(|e| format!("{e}"))?;
    let hi: f64 = b.trim().parse().map_err(|e| format!("{e}"))?;
    if !(0.0 < lo && lo < hi) {
        return Err("need 0 < lo < hi".into());
    }
    Ok((lo, hi))
}

impl Opts {
    pub fn context(&self) -> NumericContext<f64> {
        let mut ctx = NumericContext::default();
        if let Some(s) = self.seed {
            ctx = ctx.with_seed(s);
        }
        if let Some(n) = self.trials {
            ctx.trials = n;
            ctx.domain.points = n;
        }
        if let Some(t) = self.tolerance {
            ctx.tolerance = t;
        }
        if let Some((lo, hi)) = self.domain {
            ctx.domain.default = IntervalPair::symmetric(lo, hi);
        }
        ctx
    }
}

/// Result of one invocation.
#[derive(Debug)]
pub struct Outcome {
    pub code: i32,
    pub rendered: String,
    pub report: StructureReport,
}

#[derive(Debug)]
pub enum CliError {
    Parse(String),
    Internal(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Parse(_) => EXIT_PARSE,
            CliError::Internal(_) => EXIT_INTERNAL,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Parse(m) => write!(f, "invalid specification: {m}"),
            CliError::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

pub fn load(path: &Path) -> Result<Model, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    let spec = SpecFile::parse(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    Model::new(spec).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

/// Runs a command; entries are prefixed by file stem when several files
/// are given.
pub fn execute(command: &Command) -> Result<Outcome, CliError> {
    let opts = command.opts();
    let models = opts.specs.iter().map(|p| load(p)).collect::<Result<Vec<_>, _>>()?;
    let ctx = opts.context();
    let mut report = StructureReport::new();
    for (path, model) in opts.specs.iter().zip(&models) {
        let part = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| run::run_tasks(model, command.kind(), &ctx)))
            .map_err(|p| {
                let msg = p
                    .downcast_ref::<&str>()
                    .map(|s| s.to_string())
                    .or_else(|| p.downcast_ref::<String>().cloned())
                    .unwrap_or_else(|| "panic".into());
                CliError::Internal(format!("{}: {msg}", path.display()))
            })?;
        if opts.specs.len() > 1 {
            let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            report.extend(part.prefixed(&stem));
        } else {
            report.extend(part);
        }
    }
    if !opts.timings {
        for e in &mut report.entries {
            e.elapsed_ms = 0.0;
        }
    }
    let header = Header { seed: ctx.domain.seed, algebraic: ctx.tolerance, finite_difference: ctx.fd_tolerance };
    let rendered = output::render(&report, &header, opts.format);
    let code = if report.passes(opts.strict) { EXIT_PASS } else { EXIT_FAIL };
    Ok(Outcome { code, rendered, report })
}

/// Parses `args`, runs, writes the report, and returns the exit code.
pub fn main_with<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { EXIT_PASS };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli.command) {
        Ok(out) => {
            let written = match &cli.command.opts().output {
                Some(path) => std::fs::write(path, &out.rendered).map_err(|e| format!("{}: {e}", path.display())),
                None => {
                    use std::io::Write;
                    std::io::stdout().write_all(out.rendered.as_bytes()).map_err(|e| e.to_string())
                }
            };
            match written {
                Ok(()) => out.code,
                Err(e) => {
                    eprintln!("internal error: {e}");
                    EXIT_INTERNAL
                }
            }
        }
        Err(e) => {
            eprintln!("{e}");
            e.code()
        }
    }
}
