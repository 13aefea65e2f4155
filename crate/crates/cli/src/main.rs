//! `torusbundle`: checks, solves and certificates for torus-bundle data files.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use torus_bundle::io::read_input;

use commands::Job;
use report::{Report, Status};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Command {
    CheckBundle,
    CheckReal,
    Decompose,
    Solve,
    Sample,
    Certify,
    Reconstruct,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Human,
    Machine,
}

#[derive(Debug, Parser)]
#[command(name = "torusbundle", version, about = "Torus bundles over tori and their real structures")]
struct Cli {
    command: Command,
    /// TOML input file
    input: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Overrides the numerical tolerance of the command's floating-point check
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, default_value_t = 20)]
    samples: usize,
    /// Write the report here instead of standard output
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Human)]
    format: Format,
}

fn run(cli: &Cli) -> Result<Report, torus_bundle::Error> {
    let input = read_input(&cli.input)?;
    let name = cli.command.to_possible_value().expect("no skipped variants").get_name().to_string();
    let mut report = Report::new(&name, &cli.input.display().to_string(), cli.seed);
    let job = Job { input: &input, seed: cli.seed, tol: cli.tol, samples: cli.samples };
    match cli.command {
        Command::CheckBundle => commands::check_bundle(&job, &mut report),
        Command::CheckReal => commands::check_real(&job, &mut report),
        Command::Decompose => commands::decompose_cmd(&job, &mut report),
        Command::Solve => commands::solve_cmd(&job, &mut report),
        Command::Sample => commands::sample_cmd(&job, &mut report),
        Command::Certify => commands::certify(&job, &mut report),
        Command::Reconstruct => commands::reconstruct(&job, &mut report),
    }?;
    Ok(report)
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    let report = match run(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let text = match cli.format {
        Format::Human => report.human(),
        Format::Machine => report.machine(),
    };
    match &cli.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{text}"),
    }
    match report.status {
        Status::Pass => ExitCode::SUCCESS,
        Status::Fail => ExitCode::from(1),
    }
}
