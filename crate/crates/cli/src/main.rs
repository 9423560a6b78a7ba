use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use everett_cli::commands::{algebra_check, dh_check, run_eprb_cmd, scan_cmd, tail_cmd, Context, Failure};
use everett_cli::config::RunConfig;
use everett_core::eprb::Backend;

#[derive(Parser)]
#[command(name = "everett-lab", version, about = "Local measurement models on a fermionic lattice")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Flat dotted-key configuration file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; without it results go to stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for fictitious wavefunction draws (overrides run.seed)
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// lattice | analytic | both (overrides run.backend)
    #[arg(long, global = true)]
    backend: Option<Backend>,
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Anticommutation, Hermiticity and unitarity checks
    AlgebraCheck,
    /// Observer and comparator probabilities for one scenario
    RunEprb,
    /// Comparator probability over the relative analyzer angle
    Scan,
    /// Vacuum-representation transform checks
    DhCheck,
    /// Exterior-aperture overlap decay
    Tail,
}

fn threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var("EVERETT_LAB_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().map_err(|_| Failure::Config(format!("EVERETT_LAB_THREADS: '{v}' is not a count")))?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Config(format!("EVERETT_LAB_THREADS: {e}")))?;
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(Vec<String>, bool), Failure> {
    threads()?;
    let mut config = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.run.seed = seed;
    }
    if let Some(b) = cli.backend {
        config.run.backend = b;
    }
    config.run.quiet |= cli.quiet;
    let quiet = config.run.quiet;
    let ctx = Context { config, from_file: cli.config.is_some(), out: cli.out.clone() };
    let report = match cli.command {
        Command::AlgebraCheck => algebra_check(&ctx),
        Command::RunEprb => run_eprb_cmd(&ctx),
        Command::Scan => scan_cmd(&ctx),
        Command::DhCheck => dh_check(&ctx),
        Command::Tail => tail_cmd(&ctx),
    }?;
    Ok((report, quiet))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((report, quiet)) => {
            if !quiet {
                for line in report {
                    eprintln!("{line}");
                }
            }
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("everett-lab: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
