//! Command-line laboratory for the regularized scalar field.

use clap::{Parser, Subcommand};

use scalarlab::config::RunConfig;
use scalarlab::runner::Runner;
use scalarlab::Error;

#[derive(Parser)]
#[command(
    name = "scalarlab",
    version,
    about = "Numerical experiments with a regularized self-interacting scalar field"
)]
struct Cli {
    /// Path to a TOML run configuration; omit to use the built-in
    /// default laboratory setup.
    #[arg(long, global = true)]
    config: Option<std::path::PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate the configuration, print problem sizes.
    Validate,
    /// Interval experiments: smoothed steps/deltas, products,
    /// association verdicts, and the square-step anomaly.
    GenfuncDemo,
    /// Canonical commutator residuals on a lattice of point pairs.
    CcrCheck {
        /// Also print a summary of the Fock basis.
        #[arg(long)]
        describe: bool,
    },
    /// Spectrum of the assembled free Hamiltonian vs the analytic tower.
    FreeSpectrum,
    /// Scattering-operator diagnostics over the scale ladder.
    SMatrix,
    /// Sweep an observable over u = 1/eps and extract its mean.
    EpsilonSweep,
    /// Run every experiment and write a manifest.
    All,
}

fn load_config(cli: &Cli) -> Result<RunConfig, Error> {
    match &cli.config {
        Some(path) => RunConfig::from_path(path),
        None => Ok(RunConfig::default_lab()),
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    let cfg = load_config(&cli)?;
    cfg.validate()?;
    let mut runner = Runner::new(cfg);
    match cli.command {
        Command::Validate => {
            println!("{}", runner.validate()?);
        }
        Command::GenfuncDemo => {
            let line = runner.genfunc_demo()?;
            println!("{line}");
            println!("{}", runner.finish("genfunc-demo")?);
        }
        Command::CcrCheck { describe } => {
            let line = runner.ccr_check(describe)?;
            println!("{line}");
            println!("{}", runner.finish("ccr-check")?);
        }
        Command::FreeSpectrum => {
            let line = runner.free_spectrum()?;
            println!("{line}");
            println!("{}", runner.finish("free-spectrum")?);
        }
        Command::SMatrix => {
            let line = runner.s_matrix()?;
            println!("{line}");
            println!("{}", runner.finish("s-matrix")?);
        }
        Command::EpsilonSweep => {
            let line = runner.epsilon_sweep()?;
            println!("{line}");
            println!("{}", runner.finish("epsilon-sweep")?);
        }
        Command::All => {
            for line in runner.run_all("all")? {
                println!("{line}");
            }
        }
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
