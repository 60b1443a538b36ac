use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

#[derive(Parser, Debug)]
#[command(name = "hormander", version, about = "Hörmander index of symmetric periodic orbits and their iterates")]
struct Cli {
    /// Write output here instead of stdout.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Index of each iterate of a return map read from a blocks JSON document.
    Index(IndexArgs),
    /// Compare the index methods on seeded random return maps.
    Verify(VerifyArgs),
    /// CSV table of Chebyshev polynomials on a grid in [-1, 1].
    Cheb(ChebArgs),
    /// Find a symmetric periodic orbit, reduce its monodromy and index it.
    Orbit(OrbitArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodChoice {
    Formula,
    Qform,
    Paths,
    /// Formula and quadratic form.
    Both,
    /// All three methods.
    All,
}

impl MethodChoice {
    pub fn methods(self) -> Vec<hormander::hormander::Method> {
        use hormander::hormander::Method::*;
        match self {
            MethodChoice::Formula => vec![Formula],
            MethodChoice::Qform => vec![QuadraticForm],
            MethodChoice::Paths => vec![PathDifference],
            MethodChoice::Both => vec![Formula, QuadraticForm],
            MethodChoice::All => vec![Formula, QuadraticForm, PathDifference],
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum SingleMethod {
    Formula,
    Qform,
    Paths,
}

#[derive(Args, Debug)]
pub struct IndexArgs {
    /// Blocks JSON file; standard input when absent or "-".
    pub input: Option<PathBuf>,
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u64).range(1..=64))]
    pub k_max: u64,
    /// Relative zero threshold for signatures.
    #[arg(long, default_value_t = hormander::hormander::DEFAULT_TOL, value_parser = positive)]
    pub tol: f64,
    #[arg(long, value_enum, default_value_t = MethodChoice::Both)]
    pub method: MethodChoice,
    /// Seed for the path method.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..=8))]
    pub n: u64,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u64).range(1..=32))]
    pub k_max: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Comma-separated subset of formula, qform, paths.
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [SingleMethod::Formula, SingleMethod::Qform, SingleMethod::Paths])]
    pub methods: Vec<SingleMethod>,
    #[arg(long, default_value_t = hormander::hormander::DEFAULT_TOL, value_parser = positive)]
    pub tol: f64,
}

#[derive(Args, Debug)]
pub struct ChebArgs {
    /// A single degree.
    #[arg(long, conflicts_with = "k_max")]
    pub k: Option<usize>,
    /// All degrees 0..=K.
    #[arg(long)]
    pub k_max: Option<usize>,
    /// Grid points in [-1, 1].
    #[arg(long, default_value_t = 21, value_parser = clap::value_parser!(u64).range(2..=100_000))]
    pub points: u64,
}

#[derive(Args, Debug)]
pub struct OrbitArgs {
    /// oscillator:<w1>:<w2> or henon-heiles:<energy>.
    #[arg(long)]
    pub system: String,
    /// JSON array with the starting point on the fixed set of the involution.
    #[arg(long)]
    pub seed_point: String,
    #[arg(long, default_value_t = 1e-10, value_parser = positive)]
    pub tol: f64,
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u64).range(1..=64))]
    pub k_max: u64,
    /// Half-period guess; estimated from the first return to the fixed set when absent.
    #[arg(long)]
    pub half_period: Option<f64>,
    #[arg(long, value_enum, default_value_t = MethodChoice::All)]
    pub method: MethodChoice,
    /// Seed for the transversal vector and the path method.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

fn positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("'{s}' is not a number"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("'{s}' must be positive and finite"))
    }
}

/// Output text plus exit status.
pub struct Outcome {
    pub text: String,
    pub code: u8,
}

fn read_input(path: Option<&PathBuf>) -> std::io::Result<String> {
    let mut text = String::new();
    match path {
        Some(p) if p.as_os_str() != "-" => text = std::fs::read_to_string(p)?,
        _ => {
            std::io::stdin().read_to_string(&mut text)?;
        }
    }
    Ok(text)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Index(args) => read_input(args.input.as_ref())
            .map_err(|e| format!("cannot read input: {e}"))
            .and_then(|text| commands::index(args, &text)),
        Command::Verify(args) => commands::verify(args),
        Command::Cheb(args) => commands::cheb(args),
        Command::Orbit(args) => commands::orbit(args),
    };
    match result {
        Ok(outcome) => {
            let written = match &cli.output {
                Some(path) => std::fs::write(path, &outcome.text),
                None => std::io::stdout().write_all(outcome.text.as_bytes()),
            };
            if let Err(e) = written {
                eprintln!("error: cannot write output: {e}");
                return ExitCode::from(1);
            }
            ExitCode::from(outcome.code)
        }
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}
