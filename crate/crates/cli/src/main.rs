use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use semigroup_cli::{run_experiment, Experiment, ExperimentConfig, OUT_DIR_ENV};

#[derive(Parser)]
#[command(name = "semigroup-lab", version, about = "Run semigroup perturbation experiments from TOML configs")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory; overrides the config and the environment.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed override for randomized cases.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the experiment in CONFIG and write JSON/CSV reports.
    Run { config: PathBuf },
    /// Parse and check CONFIG without running it.
    Validate { config: PathBuf },
    /// Print the experiment names.
    ListExperiments,
}

fn load(path: &Path, seed: Option<u64>) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn out_dir(cli_out: Option<PathBuf>, cfg: &ExperimentConfig) -> PathBuf {
    if let Some(o) = cli_out {
        return o;
    }
    if let Some(o) = &cfg.output {
        return cfg.resolve(o);
    }
    std::env::var_os(OUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("results"))
}

fn run(cli: Cli) -> Result<bool> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("cannot configure thread pool")?;
    }
    match cli.cmd {
        Cmd::ListExperiments => {
            for e in Experiment::ALL {
                println!("{:<16} {}", e.name(), e.summary());
            }
            Ok(true)
        }
        Cmd::Validate { config } => {
            let cfg = load(&config, cli.seed)?;
            println!("{}: ok ({})", config.display(), cfg.experiment);
            Ok(true)
        }
        Cmd::Run { config } => {
            let cfg = load(&config, cli.seed)?;
            let rep = run_experiment(&cfg)?;
            let dir = out_dir(cli.out, &cfg);
            let path = rep.write(&dir)?;
            for v in rep.verdicts.iter().filter(|v| !v.pass) {
                eprintln!("FAIL {}: {:e} {} {:e} (tol {:e})", v.check, v.value, v.relation, v.bound, v.tolerance);
            }
            println!(
                "{}: {} of {} verdicts passed; report {}",
                rep.experiment,
                rep.verdicts.len() - rep.failures(),
                rep.verdicts.len(),
                path.display()
            );
            Ok(rep.passed)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
