mod commands;
mod error;
mod output;
mod problem;
mod spec;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{parse_grid, Run};
use error::CliError;
use spec::ProblemSpec;

/// Tau functions of Riemann-Hilbert problems as Fredholm determinants.
#[derive(Debug, Parser)]
#[command(name = "tau", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Mode cutoff Q, overriding the spec.
    #[arg(long, global = true)]
    cutoff: Option<f64>,
    /// Series weight bound W, overriding the spec.
    #[arg(long, global = true)]
    weight: Option<u64>,
    /// Directory for result files.
    #[arg(long, global = true, default_value = "tau-out")]
    out: PathBuf,
    /// Seed for randomly generated loops.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Tau by the method(s) of the spec; writes compute.toml.
    Compute { spec: PathBuf },
    /// Determinant against series, Toeplitz limit and gap identity; writes compare.csv.
    Compare { spec: PathBuf },
    /// Finite difference of ln tau against the contour formula; writes derivative.csv.
    Derivative {
        spec: PathBuf,
        #[arg(long)]
        param: String,
        /// Grid `a:b:n`.
        #[arg(long, allow_hyphen_values = true)]
        grid: String,
    },
    /// Tau of a multi-circle problem; writes multicircle.toml.
    Multicircle { spec: PathBuf },
}

fn load(path: &Path, cli: &Cli) -> Result<ProblemSpec, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Spec(format!("{}: {e}", path.display())))?;
    let mut spec = ProblemSpec::parse(&text).map_err(|e| match e {
        CliError::Spec(m) => CliError::Spec(format!("{}: {m}", path.display())),
        other => other,
    })?;
    if let Some(q) = cli.cutoff {
        spec.numerics.cutoff = q;
    }
    if let Some(w) = cli.weight {
        spec.numerics.weight = w;
    }
    if let Some(s) = cli.seed {
        spec.seed = s;
    }
    spec.validate()?;
    Ok(spec)
}

fn print_entries(entries: &[output::Entry]) {
    for e in entries {
        println!("{}: {} (diagnostic {:e})", e.method, e.text, e.diagnostic);
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let path = match &cli.command {
        Command::Compute { spec } | Command::Compare { spec } | Command::Multicircle { spec } => spec,
        Command::Derivative { spec, .. } => spec,
    };
    let spec = load(path, cli)?;
    let run = Run { spec: &spec, out: &cli.out };
    match &cli.command {
        Command::Compute { .. } => print_entries(&run.compute()?),
        Command::Multicircle { .. } => print_entries(&run.multicircle()?),
        Command::Compare { .. } => print!("{}", run.compare()?),
        Command::Derivative { param, grid, .. } => print!("{}", run.derivative(param, &parse_grid(grid)?)?),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
