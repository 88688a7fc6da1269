use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;
use sharpkit::monotones::{
    degree_of_correlation, optimal_guessing, tunability_robustness, tuning_degree, uniform_correlation, Correlation,
    RobustnessConfig,
};
use sharpkit::operator::HermitianOperator;
use sharpkit::povm::{classify, random_povm};
use sharpkit::preorder::is_sharper;
use sharpkit::verify::{run_suite, DimsConfig, Suite, SuiteReport};
use sharpkit::{Error, Tolerances};

mod files;
mod output;

use files::{read_povm, read_state, PovmFile};
use output::emit;

#[derive(Parser)]
#[command(name = "sharpkit", version, about = "Measurement sharpness toolkit for finite-dimensional POVMs")]
struct Cli {
    /// Print reports as single-line JSON.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check that a file holds a valid POVM.
    Validate { file: PathBuf },
    /// Report sharpness, triviality, projectivity and rank.
    Classify { file: PathBuf },
    /// Degree of correlation between P and Z on a state.
    Corr {
        p: PathBuf,
        z: PathBuf,
        /// Density matrix file; defaults to the maximally mixed state.
        #[arg(long, conflicts_with = "uniform")]
        state: Option<PathBuf>,
        /// Use the maximally mixed state.
        #[arg(long)]
        uniform: bool,
    },
    /// Tuning degree of P with respect to reference Z.
    Tune { p: PathBuf, z: PathBuf },
    /// Optimal uniform guessing probability for Z.
    Guess { z: PathBuf },
    /// Decide whether P can be fuzzified into Q.
    Compare { p: PathBuf, q: PathBuf },
    /// Bounds on the tunability robustness.
    Robustness {
        file: PathBuf,
        /// Random references per reference dimension.
        #[arg(long, default_value_t = 4)]
        refs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Draw a random POVM.
    Random {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        outcomes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write to this file instead of stdout.
        #[arg(short)]
        o: Option<PathBuf>,
    },
    /// Run a property suite.
    Verify {
        #[arg(long)]
        suite: String,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

const INVALID: u8 = 1;
const SOLVER: u8 = 2;
const SUITE: u8 = 3;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::SolverFailure(_) => SOLVER,
        _ => INVALID,
    }
}

fn suite_code(report: &SuiteReport) -> u8 {
    if report.passed {
        0
    } else {
        SUITE
    }
}

#[derive(Serialize)]
struct Validation {
    valid: bool,
    dim: usize,
    outcomes: usize,
}

#[derive(Serialize)]
struct Guess {
    value: f64,
    dual_value: f64,
    gap: f64,
    certificate_trace: f64,
    certificate: HermitianOperator,
}

fn run(cli: Cli) -> Result<u8, Error> {
    let json = cli.json;
    match cli.command {
        Command::Validate { file } => {
            let p = read_povm(&file)?;
            emit(&Validation { valid: true, dim: p.dim(), outcomes: p.outcomes() }, json)?;
        }
        Command::Classify { file } => emit(&classify(&read_povm(&file)?)?, json)?,
        Command::Corr { p, z, state, .. } => {
            let (p, z) = (read_povm(&p)?, read_povm(&z)?);
            let report = match state {
                Some(path) => degree_of_correlation(&p, &z, &read_state(&path)?)?,
                None => Correlation::Value { value: uniform_correlation(&p, &z)? },
            };
            emit(&report, json)?;
        }
        Command::Tune { p, z } => emit(&tuning_degree(&read_povm(&p)?, &read_povm(&z)?)?, json)?,
        Command::Guess { z } => {
            let g = optimal_guessing(&read_povm(&z)?)?;
            let report = Guess {
                value: g.value,
                dual_value: g.dual_value,
                gap: g.gap,
                certificate_trace: g.certificate.trace(),
                certificate: g.certificate,
            };
            emit(&report, json)?;
        }
        Command::Compare { p, q } => emit(&is_sharper(&read_povm(&p)?, &read_povm(&q)?)?, json)?,
        Command::Robustness { file, refs, seed } => {
            let cfg = RobustnessConfig { random_references: refs, seed, ..RobustnessConfig::default() };
            emit(&tunability_robustness(&read_povm(&file)?, &cfg)?, json)?;
        }
        Command::Random { dim, outcomes, seed, o } => {
            if dim == 0 || outcomes == 0 {
                return Err(Error::InvalidInput("dimension and outcome count must be positive".into()));
            }
            let file = PovmFile::from_povm(&random_povm(dim, outcomes, seed)?);
            let text = output::json_string(&file)?;
            match o {
                Some(path) => fs::write(&path, text + "\n")
                    .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?,
                None => println!("{text}"),
            }
        }
        Command::Verify { suite, trials, seed } => {
            let report = run_suite(suite.parse::<Suite>()?, trials, seed, &DimsConfig::default())?;
            emit(&report, json)?;
            return Ok(suite_code(&report));
        }
    }
    Ok(0)
}

fn install_tolerances() -> Result<(), Error> {
    match std::env::var("SHARPKIT_TOL") {
        Ok(spec) => Tolerances::install(spec.parse()?),
        Err(_) => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(INVALID);
        }
    };
    let json = cli.json;
    match install_tolerances().and_then(|_| run(cli)) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            if json {
                println!("{}", serde_json::json!({ "error": e.to_string() }));
            }
            ExitCode::from(exit_code(&e))
        }
    }
}
