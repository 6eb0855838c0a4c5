use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lattice_shells::commands::{run, Command};
use lattice_shells::config::{Overrides, RunConfig};

/// Exact microcanonical shells and single-measurement laws on small lattices.
#[derive(Debug, Parser)]
#[command(name = "lattice-shells", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Enumeration cap on the number of configurations.
    #[arg(long, global = true)]
    cap: Option<u64>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Cmd {
    /// Shell census: shells.csv
    Shells,
    /// Shell expectations of run.observable: gamma_<name>.csv
    Gamma,
    /// Probability of each run.sets entry: law.csv
    Law,
    /// Spectral chain of run.observable: spectral_<name>.csv
    Spectral,
    /// Seeded measurements: sample.csv, sample_law.csv
    Sample,
    /// Property suites: report.txt, report.csv
    Verify,
    /// Shell and observable changes from L to L+2: stability.csv
    Stability,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Shells => Command::Shells,
            Cmd::Gamma => Command::Gamma,
            Cmd::Law => Command::Law,
            Cmd::Spectral => Command::Spectral,
            Cmd::Sample => Command::Sample,
            Cmd::Verify => Command::Verify,
            Cmd::Stability => Command::Stability,
        }
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
            return ExitCode::from(1);
        }
    };
    let Some(path) = cli.config else {
        eprintln!("error: --config <path> is required");
        return ExitCode::from(1);
    };
    let overrides = Overrides { seed: cli.seed, workers: cli.workers, cap: cli.cap };
    let result = RunConfig::load(&path, &overrides).and_then(|config| run(cli.command.into(), &config, &cli.out));
    match result {
        Ok(outcome) => {
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            if outcome.failures > 0 {
                eprintln!("error: {} asserted check(s) failed", outcome.failures);
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
