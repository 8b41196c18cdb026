use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use radar_uq::scenario::{self, Scenario};
use radar_uq::Error;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    /// Nominal detection probability over the sweep
    Nominal,
    /// Monte Carlo ensemble (long-form CSV plus JSON summary)
    Montecarlo,
    /// Linearized 3-sigma curves for the Low/Medium/High levels
    Sensitivity,
    /// Per-source 3-sigma error budget
    Budget,
}

#[derive(Debug, Parser)]
#[command(name = "radar-uq", version, about = "Radar detection probability under state uncertainty")]
struct Args {
    #[arg(value_enum)]
    command: Command,

    /// Scenario JSON file
    #[arg(long)]
    scenario: PathBuf,

    /// Output CSV path (defaults to the scenario's `output`)
    #[arg(long)]
    out: Option<PathBuf>,

    /// Override the Monte Carlo seed
    #[arg(long)]
    seed: Option<u64>,

    /// Override the Monte Carlo run count
    #[arg(long)]
    runs: Option<usize>,

    /// Monte Carlo summary JSON path (defaults to <out>.summary.json)
    #[arg(long)]
    summary: Option<PathBuf>,

    /// Run Monte Carlo runs on one thread
    #[arg(long)]
    serial: bool,
}

fn summary_path(out: &Path) -> PathBuf {
    out.with_extension("summary.json")
}

fn create(path: &Path) -> Result<BufWriter<File>, Error> {
    Ok(BufWriter::new(File::create(path)?))
}

fn run(args: Args) -> Result<(), Error> {
    let mut sc: Scenario = scenario::load_scenario(&args.scenario)?;
    if let Some(seed) = args.seed {
        sc.montecarlo.seed = seed;
    }
    if let Some(runs) = args.runs {
        if runs == 0 {
            return Err(Error::Validation {
                field: "--runs".into(),
                reason: "must be at least 1".into(),
            });
        }
        sc.montecarlo.runs = runs;
    }
    if args.serial {
        sc.montecarlo.parallel = false;
    }
    let out = args.out.clone().or_else(|| sc.output.clone()).ok_or_else(|| Error::Validation {
        field: "--out".into(),
        reason: "no output path given on the command line or in the scenario".into(),
    })?;

    match args.command {
        Command::Nominal => scenario::cmd_nominal(&sc, create(&out)?)?,
        Command::Sensitivity => scenario::cmd_sensitivity(&sc, create(&out)?)?,
        Command::Budget => scenario::cmd_budget(&sc, create(&out)?)?,
        Command::Montecarlo => {
            let summary = args.summary.clone().unwrap_or_else(|| summary_path(&out));
            let s = scenario::cmd_montecarlo(&sc, create(&out)?, create(&summary)?)?;
            eprintln!(
                "{} runs x {} angles, 3-sigma coverage {:.4}, max 3-sigma {:.4}",
                s.runs, s.angles, s.coverage, s.max_three_sigma_pd
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
