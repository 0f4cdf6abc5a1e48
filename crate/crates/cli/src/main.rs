use clap::{Parser, Subcommand};
use lognls_cli::runner::{self, RunError};
use std::path::PathBuf;
use std::process::ExitCode;

/// Numerical laboratory for the focusing logarithmic Schrödinger equation.
#[derive(Parser)]
#[command(name = "lognls", version, about)]
struct Cli {
    /// Output directory (default: $LOGNLS_OUT_DIR or ./runs)
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,

    /// RNG seed for randomized sweeps
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,

    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Gausson trajectory (constant matrix flow) to CSV
    Gausson {
        #[arg(long)]
        config: PathBuf,
    },
    /// 1D width-equation trajectory to CSV
    Breather {
        #[arg(long)]
        config: PathBuf,
    },
    /// Width-matrix flow trajectory to CSV
    MatrixOde {
        #[arg(long)]
        config: PathBuf,
    },
    /// Backward construction ladder with error tables and decay fit
    BuildMultisoliton {
        #[arg(long)]
        config: PathBuf,
    },
    /// Same construction with general Gaussian members (L²-rate experiment)
    Multigaussian {
        #[arg(long)]
        config: PathBuf,
    },
    /// Localized mass/momentum/energy/action diagnostics along a run
    Localized {
        #[arg(long)]
        config: PathBuf,
    },
    /// Randomized certification of the pointwise and tail inequalities
    VerifyInequalities {
        /// samples per inequality check
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
    },
    /// Run the acceptance suite (pass/fail line per criterion)
    Acceptance {
        /// restrict to one criterion id (1..=12)
        #[arg(long)]
        only: Option<usize>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
    let out_dir = cli
        .out_dir
        .or_else(|| std::env::var_os("LOGNLS_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("runs"));

    let result: Result<PathBuf, RunError> = match &cli.command {
        Command::Gausson { config } => runner::cmd_gausson(config, &out_dir, cli.seed),
        Command::Breather { config } => runner::cmd_breather(config, &out_dir, cli.seed),
        Command::MatrixOde { config } => runner::cmd_matrix_ode(config, &out_dir, cli.seed),
        Command::BuildMultisoliton { config } => runner::cmd_build_multisoliton(config, &out_dir, cli.seed),
        Command::Multigaussian { config } => runner::cmd_multigaussian(config, &out_dir, cli.seed),
        Command::Localized { config } => runner::cmd_localized(config, &out_dir, cli.seed),
        Command::VerifyInequalities { samples } => {
            runner::cmd_verify_inequalities(&out_dir, cli.seed, *samples)
        }
        Command::Acceptance { only } => runner::cmd_acceptance(&out_dir, *only, cli.seed),
    };

    match result {
        Ok(manifest) => {
            println!("manifest: {}", manifest.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
