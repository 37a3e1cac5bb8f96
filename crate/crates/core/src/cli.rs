//! Command-line front end.
//!
//! ```text
//! psd-sosc check-sosc PROBLEM.json [--dirs N] [--seed S] [--json OUT]
//! psd-sosc subderivative TRIPLE.json [--samples N] [--json OUT]
//! psd-sosc growth PROBLEM.json --epsilon E --beta B [--samples N]
//! ```
//!
//! Exit codes: `0` success (VERIFIED_SAMPLED, CRITICAL_CONE_TRIVIAL, no growth
//! violations, subderivative evaluated), `1` negative outcome (FAILED_AT_DIRECTION,
//! growth violations, subderivative hypothesis violated), `2` INCONCLUSIVE,
//! `3` input error.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::report::{self, CommandKind, PointSummary, Report, Triple};
use crate::sosc::{self, PointContext, SoscOptions, Verdict};
use crate::subderivative::SamplingOptions;

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;
pub const EXIT_INPUT: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "psd-sosc", version, about = "Second-order checks for nonlinear semidefinite programs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample the critical cone at xbar and certify each direction.
    CheckSosc(CheckSoscArgs),
    /// Evaluate the second subderivative of the PSD indicator for a (Y, Y*, V) triple.
    Subderivative(SubderivativeArgs),
    /// Sample the growth inequality on a ball around xbar.
    Growth(GrowthArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Cone membership and feasibility tolerance.
    #[arg(long, default_value_t = sosc::DEFAULT_TOL)]
    pub tol: f64,
    /// Eigenvalues at or below this count as zero [default: 1e-8 * max(1, max |eig|)].
    #[arg(long)]
    pub rank_tol: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also write the JSON report to this path ("-" for stdout).
    #[arg(long, value_name = "PATH")]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct CheckSoscArgs {
    pub problem: PathBuf,
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, default_value_t = sosc::DEFAULT_CERT_TOL)]
    pub cert_tol: f64,
    #[arg(long, default_value_t = sosc::DEFAULT_MARGIN_TOL)]
    pub margin_tol: f64,
    /// Random unit directions drawn before filtering by the critical cone.
    #[arg(long, default_value_t = sosc::DEFAULT_DIRECTIONS)]
    pub dirs: usize,
    /// Multiplier-search starts per direction.
    #[arg(long, default_value_t = sosc::DEFAULT_STARTS)]
    pub starts: usize,
    /// Multiplier-search iteration cap per start.
    #[arg(long, default_value_t = sosc::DEFAULT_MAX_ITER)]
    pub max_iter: usize,
}

#[derive(Debug, Clone, Args)]
pub struct SubderivativeArgs {
    pub triple: PathBuf,
    #[command(flatten)]
    pub common: CommonArgs,
    /// Random perturbation families of the sampling oracle.
    #[arg(long, default_value_t = 64)]
    pub samples: usize,
}

#[derive(Debug, Clone, Args)]
pub struct GrowthArgs {
    pub problem: PathBuf,
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub epsilon: f64,
    #[arg(long)]
    pub beta: f64,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
}

/// Result of one invocation: exit code, text for stdout and the JSON report.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub exit_code: i32,
    pub text: String,
    pub report: Report,
}

fn input_error(e: &Error) -> bool {
    matches!(
        e,
        Error::Input(_)
            | Error::Json(_)
            | Error::Io(_)
            | Error::DimensionMismatch { .. }
            | Error::InvalidArgument(_)
            | Error::InfeasiblePoint { .. }
    )
}

fn finish(kind: CommandKind, seed: u64, result: Result<(Report, i32)>) -> Outcome {
    let (report, exit_code) = match result {
        Ok(r) => r,
        Err(e) => {
            let code = if input_error(&e) { EXIT_INPUT } else { EXIT_NEGATIVE };
            (Report::failed(kind, seed, &e), code)
        }
    };
    Outcome {
        exit_code,
        text: report.to_text(),
        report,
    }
}

pub fn check_sosc(args: &CheckSoscArgs) -> Outcome {
    let seed = args.common.seed;
    finish(CommandKind::CheckSosc, seed, (|| {
        let (p, xbar) = report::load_problem(&args.problem)?;
        let opts = SoscOptions {
            tol: args.common.tol,
            rank_tol: args.common.rank_tol,
            cert_tol: args.cert_tol,
            margin_tol: args.margin_tol,
            n_dirs: args.dirs,
            seed,
            starts: args.starts,
            max_iter: args.max_iter,
        };
        let ctx = PointContext::new(&p, &xbar, opts.tol, opts.rank_tol)?;
        let sosc = sosc::check_sosc_with(&p, &xbar, &ctx, &opts)?;
        let code = match sosc.verdict {
            Verdict::VerifiedSampled | Verdict::CriticalConeTrivial => EXIT_OK,
            Verdict::FailedAtDirection => EXIT_NEGATIVE,
            Verdict::Inconclusive => EXIT_INCONCLUSIVE,
        };
        let mut r = Report::new(CommandKind::CheckSosc, seed);
        r.point = Some(PointSummary::new(&p, &xbar, &ctx)?);
        r.sosc = Some(sosc);
        Ok((r, code))
    })())
}

pub fn subderivative(args: &SubderivativeArgs) -> Outcome {
    let seed = args.common.seed;
    finish(CommandKind::Subderivative, seed, (|| {
        let text = std::fs::read_to_string(&args.triple)
            .map_err(|e| Error::Input(format!("cannot read {}: {e}", args.triple.display())))?;
        let triple = Triple::from_json_str(&text)?;
        let sampling = SamplingOptions {
            n_samples: args.samples,
            seed,
            ..SamplingOptions::default()
        };
        let summary = report::subderivative_summary(&triple, args.common.rank_tol, args.common.tol, &sampling)?;
        let mut r = Report::new(CommandKind::Subderivative, seed);
        r.subderivative = Some(summary);
        Ok((r, EXIT_OK))
    })())
}

pub fn growth(args: &GrowthArgs) -> Outcome {
    let seed = args.common.seed;
    finish(CommandKind::Growth, seed, (|| {
        let (p, xbar) = report::load_problem(&args.problem)?;
        let ctx = PointContext::new(&p, &xbar, args.common.tol, args.common.rank_tol)?;
        let g = sosc::verify_growth_with_tol(&p, &xbar, args.epsilon, args.beta, args.samples, seed, args.common.tol)?;
        let code = if g.violations == 0 { EXIT_OK } else { EXIT_NEGATIVE };
        let mut r = Report::new(CommandKind::Growth, seed);
        r.point = Some(PointSummary::new(&p, &xbar, &ctx)?);
        r.growth = Some(g);
        Ok((r, code))
    })())
}

fn common(cli: &Cli) -> &CommonArgs {
    match &cli.command {
        Command::CheckSosc(a) => &a.common,
        Command::Subderivative(a) => &a.common,
        Command::Growth(a) => &a.common,
    }
}

pub fn execute(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::CheckSosc(a) => check_sosc(a),
        Command::Subderivative(a) => subderivative(a),
        Command::Growth(a) => growth(a),
    }
}

fn write_json(path: &Path, report: &Report) -> Result<Option<String>> {
    let json = report.to_json()?;
    if path == Path::new("-") {
        return Ok(Some(json));
    }
    std::fs::write(path, json + "\n")?;
    Ok(None)
}

/// Parses `args`, runs the command, prints the report and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    let outcome = execute(&cli);
    let mut code = outcome.exit_code;
    match common(&cli).json.as_deref().map(|p| write_json(p, &outcome.report)) {
        Some(Ok(Some(json))) => println!("{json}"),
        Some(Ok(None)) | None => print!("{}", outcome.text),
        Some(Err(e)) => {
            print!("{}", outcome.text);
            eprintln!("cannot write JSON report: {e}");
            code = EXIT_INPUT;
        }
    }
    code
}
