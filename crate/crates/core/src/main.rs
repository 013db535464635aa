use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use robust_coding::cli::{
    bits_to_nats, cmd_analyze, cmd_code, cmd_verify, write_atomically, CliError, JobSpec,
    ObjectiveKind, OracleLimits, OutputFormat, DEFAULT_SAMPLES,
};
use robust_coding::Arity;

/// Robust prefix codes for sources known only up to a relative-entropy ball.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Entropy, existence thresholds and saturation for a nominal distribution.
    Analyze {
        file: PathBuf,
        #[arg(long, default_value_t = 2)]
        arity: u32,
        #[arg(long)]
        radius: Option<f64>,
        /// Radius is given in bits.
        #[arg(long)]
        bits: bool,
        #[arg(long)]
        allow_zero: bool,
        #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
        format: OutputFormat,
    },
    /// Solve for a robust code.
    Code {
        #[command(flatten)]
        job: JobArgs,
        /// Write the report here instead of stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Cross-check a solution against the brute-force oracle.
    Verify {
        #[command(flatten)]
        job: JobArgs,
        #[arg(long)]
        lmax: Option<u32>,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        /// Verify this `code` report instead of solving afresh.
        #[arg(long)]
        code: Option<PathBuf>,
    },
}

#[derive(Args)]
struct JobArgs {
    file: PathBuf,
    #[arg(long, value_enum)]
    objective: ObjectiveKind,
    #[arg(long, default_value_t = 0.0)]
    radius: f64,
    /// Radius is given in bits.
    #[arg(long)]
    bits: bool,
    /// Total-variation radius for nml-tv.
    #[arg(long)]
    tv: Option<f64>,
    #[arg(long, default_value_t = 2)]
    arity: u32,
    #[arg(long, default_value_t = robust_coding::solver::DEFAULT_TOL)]
    tol: f64,
    #[arg(long)]
    strict_boundary: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,
    /// Drop zero-probability symbols (with a warning) instead of failing.
    #[arg(long)]
    allow_zero: bool,
}

impl JobArgs {
    fn into_job(self) -> Result<JobSpec, CliError> {
        Ok(JobSpec {
            input: self.file,
            objective: self.objective,
            radius: if self.bits { bits_to_nats(self.radius) } else { self.radius },
            tv: self.tv,
            arity: Arity::new(self.arity)?,
            tol: self.tol,
            strict_boundary: self.strict_boundary,
            seed: self.seed,
            format: self.format,
            allow_zero: self.allow_zero,
        })
    }
}

fn run(cli: Cli) -> Result<(String, Option<PathBuf>), CliError> {
    match cli.command {
        Command::Analyze { file, arity, radius, bits, allow_zero, format } => {
            let radius = radius.map(|r| if bits { bits_to_nats(r) } else { r });
            Ok((cmd_analyze(&file, Arity::new(arity)?, radius, allow_zero, format)?, None))
        }
        Command::Code { job, output } => Ok((cmd_code(&job.into_job()?)?, output)),
        Command::Verify { job, lmax, samples, code } => {
            let limits = OracleLimits { lmax, samples };
            Ok((cmd_verify(&job.into_job()?, limits, code.as_deref())?, None))
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let result = run(Cli::parse()).and_then(|(text, output)| match output {
        Some(path) => write_atomically(&path, &text),
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Output(e.to_string())),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if let CliError::VerifyFailed { report, .. } = &e {
                let _ = std::io::stdout().lock().write_all(report.as_bytes());
            }
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
