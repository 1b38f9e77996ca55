//! Command-line front end for the `permchan` library.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use permchan::analysis::build_profile_with;
use permchan::analysis::doeblin_coefficient;
use permchan::capacity::capacity_bounds;
use permchan::degradation::{degradation_feasibility, extremal_erasure_probability, DEFAULT_FEASIBILITY_TOL};
use permchan::sim::{run_experiment, write_csv, ExperimentConfig};
use permchan::verify::{verify_suite_with, Scope, WitnessFixture};
use permchan::{ChannelFile, Error};
use serde_json::json;

const SEED_ENV: &str = "PERMCHAN_SEED";

#[derive(Parser)]
#[command(name = "permchan", version, about = "Noisy permutation channel toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the channel profile and capacity bounds as JSON.
    Analyze {
        channel: PathBuf,
        /// Relative singular value threshold for the numerical rank.
        #[arg(long, default_value_t = 1e-10)]
        rank_tol: f64,
    },
    /// Run a Monte Carlo experiment and write CSV.
    Simulate {
        config: PathBuf,
        /// Worker threads (defaults to rayon's choice).
        #[arg(long)]
        threads: Option<usize>,
        /// Overrides the config's output path; `-` means stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Test whether DEGRADED = DOMINATOR · W for a stochastic W.
    Degrade {
        dominator: PathBuf,
        degraded: PathBuf,
        /// Also report the extremal erasure probability of DEGRADED.
        #[arg(long)]
        eta: bool,
        #[arg(long, default_value_t = DEFAULT_FEASIBILITY_TOL)]
        tol: f64,
    },
    /// Run the oracle suite; exits 1 if any check fails.
    Verify {
        #[arg(long, conflicts_with = "full")]
        fast: bool,
        #[arg(long)]
        full: bool,
        /// Extra degradation witness fixtures to re-check.
        #[arg(long = "fixture")]
        fixtures: Vec<PathBuf>,
    },
}

enum Failure {
    /// Exit 1.
    Verification(String),
    /// Exit 2.
    BadInput(String),
    /// Exit 3.
    Infeasible,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::SolverFailure(_) | Error::RankDeficientSubset => Failure::Verification(e.to_string()),
            _ => Failure::BadInput(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::BadInput(e.to_string())
    }
}

fn with_path(path: &Path) -> impl Fn(Error) -> Failure + '_ {
    move |e| match Failure::from(e) {
        Failure::BadInput(msg) => Failure::BadInput(format!("{}: {msg}", path.display())),
        other => other,
    }
}

fn print_json(value: &serde_json::Value) -> Result<(), Failure> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| Failure::BadInput(e.to_string()))?;
    writeln!(out)?;
    Ok(())
}

fn analyze(path: &Path, rank_tol: f64) -> Result<(), Failure> {
    let channel = ChannelFile::load(path).and_then(|f| f.to_channel()).map_err(with_path(path))?;
    let profile = build_profile_with(&channel, rank_tol)?;
    let bounds = capacity_bounds(&channel, &profile);
    print_json(&json!({
        "profile": profile.report(),
        "capacity_bounds": bounds.report(),
    }))
}

fn simulate(path: &Path, threads: Option<usize>, output: Option<PathBuf>) -> Result<(), Failure> {
    let mut config = ExperimentConfig::load(path).map_err(with_path(path))?;
    if let Ok(seed) = std::env::var(SEED_ENV) {
        config.seed = seed
            .trim()
            .parse()
            .map_err(|_| Failure::BadInput(format!("{SEED_ENV}={seed:?} is not an unsigned integer")))?;
    }
    if output.is_some() {
        config.output = output;
    }
    let results = match threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Failure::BadInput(e.to_string()))?
            .install(|| run_experiment(&config)),
        None => run_experiment(&config),
    }?;
    match config.output.as_deref() {
        Some(p) if p != Path::new("-") => write_csv(&results, BufWriter::new(File::create(p)?))?,
        _ => write_csv(&results, io::stdout().lock())?,
    }
    Ok(())
}

fn degrade(dom: &Path, deg: &Path, eta: bool, tol: f64) -> Result<(), Failure> {
    let dominator = ChannelFile::load(dom).and_then(|f| f.to_channel()).map_err(with_path(dom))?;
    let degraded = ChannelFile::load(deg).and_then(|f| f.to_channel()).map_err(with_path(deg))?;
    let verdict = degradation_feasibility(&dominator, &degraded, tol)?;
    let mut report = match &verdict {
        Some(w) => json!({
            "feasible": true,
            "witness": ChannelFile::from_channel(&w.intermediate),
            "residual": w.residual,
        }),
        None => json!({ "feasible": false, "tolerance": tol }),
    };
    if eta {
        report["doeblin_coefficient"] = json!(doeblin_coefficient(&degraded));
        report["extremal_erasure_probability"] = json!(extremal_erasure_probability(&degraded, 1e-9, tol)?);
    }
    print_json(&report)?;
    if verdict.is_some() {
        Ok(())
    } else {
        Err(Failure::Infeasible)
    }
}

fn verify(full: bool, fixtures: &[PathBuf]) -> Result<(), Failure> {
    let loaded = fixtures
        .iter()
        .map(|p| WitnessFixture::load(p).map_err(with_path(p)))
        .collect::<Result<Vec<_>, _>>()?;
    let scope = if full { Scope::Full } else { Scope::Fast };
    let report = verify_suite_with(scope, &loaded);
    print_json(&serde_json::to_value(&report).expect("report serializes"))?;
    if report.passed {
        Ok(())
    } else {
        let failed: Vec<_> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        Err(Failure::Verification(format!("failed checks: {}", failed.join(", "))))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Analyze { channel, rank_tol } => analyze(&channel, rank_tol),
        Command::Simulate { config, threads, output } => simulate(&config, threads, output),
        Command::Degrade { dominator, degraded, eta, tol } => degrade(&dominator, &degraded, eta, tol),
        Command::Verify { fast: _, full, fixtures } => verify(full, &fixtures),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::BadInput(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Infeasible) => {
            eprintln!("infeasible: no stochastic witness within tolerance");
            ExitCode::from(3)
        }
    }
}
