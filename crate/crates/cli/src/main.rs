use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use weyl_cli::{app, Overrides};

#[derive(Parser)]
#[command(name = "weyl", version, about = "Run Weyl-function scenarios and sample matrix functions")]
struct Cli {
    /// Rank, singularity and default residual tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Base seed for random objects without their own seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute the tasks of a scenario document.
    Run {
        doc: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Tabulate a matrix function of a document on a grid.
    Sample {
        doc: PathBuf,
        #[arg(long)]
        object: String,
        /// `x0,y0:x1,y1:n` or `x0,y0:x1,y1:nx,ny`
        #[arg(long)]
        grid: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a built-in golden report.
    Golden {
        which: String,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { app::EXIT_INPUT as u8 } else { 0 });
        }
    };
    let o = Overrides { tol: cli.tol, seed: cli.seed };
    let result = match &cli.command {
        Command::Run { doc, out } => app::run(doc, out, o),
        Command::Sample { doc, object, grid, out } => app::sample(doc, object, grid, out, o),
        Command::Golden { which, out } => app::golden(which, out),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(app::EXIT_INPUT as u8)
        }
    }
}
