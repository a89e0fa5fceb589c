use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;

/// Weighted composition operators on weighted Hardy spaces: build, check,
/// and compare against the co-isometry dichotomy.
///
/// Spaces: hardy | bergman:alpha=<f> | hgamma:gamma=<f> | dirichlet |
/// bounded-log | seq:<path>.json. Complex numbers: <re>+<im>i, no spaces.
/// The matrix size is capped by WCOLAB_MAX_N (default 2048).
#[derive(Debug, Parser)]
#[command(name = "wcolab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Classify a space and list its first weights.
    SpaceInfo {
        space: String,
        /// Number of weights to list.
        #[arg(long, default_value_t = 10)]
        n: usize,
        /// Relative tolerance of the recurrence test.
        #[arg(long, default_value_t = wcolab::weights::DEFAULT_REL_TOL)]
        tol: f64,
        #[arg(long)]
        json: bool,
    },
    /// Evaluate the truncated reproducing kernel K_w(z).
    KernelEval {
        space: String,
        #[arg(long, allow_hyphen_values = true)]
        w: String,
        #[arg(long, allow_hyphen_values = true)]
        z: String,
        /// Number of kernel terms kept.
        #[arg(long, default_value_t = 256)]
        degree: usize,
        #[arg(long)]
        json: bool,
    },
    /// Print the truncated matrix of W_{F,phi}.
    WcoBuild {
        space: String,
        #[command(flatten)]
        symbols: SymbolArgs,
        #[arg(long = "N", default_value_t = 8)]
        n: usize,
        #[arg(long)]
        json: bool,
    },
    /// Measure every defect and compare with the predicted verdict.
    WcoCheck {
        space: String,
        #[command(flatten)]
        symbols: SymbolArgs,
        #[arg(long = "N", default_value_t = wcolab::operator::DEFAULT_N)]
        n: usize,
        #[arg(long, default_value_t = wcolab::operator::DEFAULT_K)]
        k: usize,
        #[arg(long, default_value_t = wcolab::operator::DEFAULT_TOL)]
        tol: f64,
        #[arg(long)]
        json: bool,
        /// Write "N,defect" rows of the co-isometry defect for N = 64..512.
        #[arg(long, value_name = "PATH")]
        csv_sweep: Option<PathBuf>,
    },
    /// Find the rotation that moves the zero of the squared automorphism to radius b.
    LemmaMove {
        #[arg(long, allow_hyphen_values = true)]
        lambda: String,
        #[arg(long, allow_hyphen_values = true)]
        a: String,
        #[arg(long)]
        b: f64,
        #[arg(long)]
        json: bool,
    },
    /// Run the built-in positive and negative scenarios.
    DemoDichotomy {
        #[arg(long = "N", default_value_t = wcolab::operator::DEFAULT_N)]
        n: usize,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Args)]
struct SymbolArgs {
    /// aut:lambda=<c>,a=<c> | rot:theta=<radians> | series:<path>
    #[arg(long)]
    phi: String,
    /// auto-unitary | const:<c> | series:<path> | forced
    #[arg(long)]
    f: String,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(code) => code,
        Err(e) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            let message = format!("{e:#}").replace('\n', " ");
            eprintln!("error: {message}");
            ExitCode::FAILURE
        }
    }
}

fn is_broken_pipe(e: &anyhow::Error) -> bool {
    e.chain()
        .filter_map(|c| c.downcast_ref::<std::io::Error>())
        .any(|io| io.kind() == std::io::ErrorKind::BrokenPipe)
}
