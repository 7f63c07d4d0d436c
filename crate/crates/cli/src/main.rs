use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use orlicz_dyn_cli::config::Format;
use orlicz_dyn_cli::{init_threads, run, RunOptions};

#[derive(Parser)]
#[command(name = "orlicz-dyn", version, about = "Check disjoint transitivity, mixing and chaos of weighted translations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured checker and write report.json and trace.csv.
    Check(Common),
    /// Write only the per-n trace of every sup quantity.
    Trace(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; defaults to the config's `output` or the working directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    format: Option<Vec<Format>>,
    /// Search even when the contraction or aperiodicity pre-checks fail.
    #[arg(long)]
    override_diagnostics: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (common, trace_only) = match cli.command {
        Command::Check(c) => (c, false),
        Command::Trace(c) => (c, true),
    };
    let opts = RunOptions {
        config: common.config,
        out: common.out,
        formats: common.format,
        override_diagnostics: common.override_diagnostics,
    };
    let result = init_threads().and_then(|()| run(&opts, trace_only));
    match result {
        Ok(outcome) => {
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            println!("{}", outcome.summary);
            ExitCode::from(outcome.exit_code)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
