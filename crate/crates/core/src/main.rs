use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use wno::commands::{cmd_bracket, cmd_check, cmd_geom, Options};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

/// Decide whether weakly nonlocal operators are Hamiltonian.
#[derive(Parser, Debug)]
#[command(name = "wno", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Skew-adjointness and [P,P] for one operator.
    Check {
        file: PathBuf,
        name: String,
        /// Print the full Euler–Lagrange tuple of [P,P].
        #[arg(long)]
        el: bool,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        /// Add wall-clock time to the report.
        #[arg(long)]
        timing: bool,
    },
    /// The three-vector [P,Q] and its Euler–Lagrange tuple.
    Bracket {
        file: PathBuf,
        p: String,
        q: String,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        #[arg(long)]
        timing: bool,
    },
    /// Metric conditions of a firstorder block, cross-checked with [P,P].
    Geom {
        file: PathBuf,
        name: String,
        #[arg(long)]
        el: bool,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        #[arg(long)]
        timing: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (report, format) = match cli.command {
        Cmd::Check { file, name, el, format, timing } => {
            (cmd_check(&file, &name, Options { el, timing }), format)
        }
        Cmd::Bracket { file, p, q, format, timing } => {
            (cmd_bracket(&file, &p, &q, Options { el: true, timing }), format)
        }
        Cmd::Geom { file, name, el, format, timing } => {
            (cmd_geom(&file, &name, Options { el, timing }), format)
        }
    };
    let out = match format {
        Format::Text => report.to_text(),
        Format::Json => report.to_json(),
    };
    print!("{out}");
    ExitCode::from(report.exit_code() as u8)
}
