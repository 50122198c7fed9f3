use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sasaki_cli::{run, Experiment, ExperimentConfig, Fault};

#[derive(Parser)]
#[command(name = "sasaki", version, about = "Numerical checks of the Sasaki calibration and its recovery fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Identity and property checks across every module.
    Verify(Common),
    /// Monte Carlo integrals of dens(V) and Phi_d(M_V) against c(m;1) vol(S^n).
    Lowerbound(Common),
    /// Stratified Sasaki volume of the recovery fields along the r_k list.
    Recovery(Common),
    /// Sampled comass, diagonal sweep and fibre-antipodal invariance of omega.
    Comass(Common),
}

#[derive(Args)]
struct Common {
    /// JSON config; the shipped default for the subcommand when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the headline sample count of the experiment.
    #[arg(long)]
    samples: Option<usize>,
    /// Corrupts one constant: c2, vartheta or cutoff-eps.
    #[arg(long = "fault-inject")]
    fault_inject: Option<Fault>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (experiment, common) = match cli.command {
        Command::Verify(c) => (Experiment::Verify, c),
        Command::Lowerbound(c) => (Experiment::Lowerbound, c),
        Command::Recovery(c) => (Experiment::Recovery, c),
        Command::Comass(c) => (Experiment::Comass, c),
    };
    match execute(experiment, common) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn execute(experiment: Experiment, common: Common) -> anyhow::Result<bool> {
    let mut cfg = match &common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => experiment.default_config(),
    };
    if cfg.experiment != experiment {
        anyhow::bail!("config is for '{}', not '{}'", cfg.experiment.name(), experiment.name());
    }
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(out) = common.out {
        cfg.out = out;
    }
    if let Some(n) = common.samples {
        cfg.override_samples(n);
    }
    let report = run(&cfg, common.fault_inject)?;
    for check in &report.checks {
        println!("{}", check.line());
    }
    let (csv, json) = report.write(&cfg.out)?;
    println!("wrote {} and {}", csv.display(), json.display());
    let failures = report.failures();
    if !failures.is_empty() {
        eprintln!("{} check(s) failed:", failures.len());
        for f in failures {
            eprintln!("  {}", f.name);
        }
    }
    Ok(report.pass())
}
