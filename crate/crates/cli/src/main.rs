use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand, ValueEnum};

use renet_cli::{cmd_export_dot, cmd_matrix, cmd_replay, cmd_run, cmd_validate, Format};

#[derive(Parser)]
#[command(name = "renet", version, about = "Simulate change handling in service orchestrations")]
struct Cli {
    /// Report outcomes on stderr.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Text,
    Dot,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Text => Format::Text,
            FormatArg::Dot => Format::Dot,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its trace (exit 0 completed, 2 terminated).
    Run {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        format: FormatArg,
    },
    /// Check a scenario file without running it.
    Validate {
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Print the change matrix a service reported at a tick.
    Matrix {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        service: String,
        #[arg(long)]
        tick: u64,
        #[arg(long, value_enum, default_value = "text")]
        format: FormatArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Export a net as DOT: pnh-nf, pnh-f (with --service) or pnac@DTE_k.
    ExportDot {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        what: String,
        #[arg(long)]
        service: Option<String>,
        #[arg(long)]
        tick: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-run a scenario and compare with a recorded trace.
    Replay {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        trace: PathBuf,
    },
}

fn write_or_print(out: Option<&PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => Ok(std::fs::write(p, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Run { scenario, out, format } => {
            let code = cmd_run(&scenario, out.as_deref(), format.into())?;
            if cli.verbose > 0 {
                eprintln!("{}", if code == 0 { "completed" } else { "terminated" });
            }
            Ok(code)
        }
        Command::Validate { scenario } => {
            print!("{}", cmd_validate(&scenario)?);
            Ok(0)
        }
        Command::Matrix {
            scenario,
            service,
            tick,
            format,
            out,
        } => {
            write_or_print(out.as_ref(), &cmd_matrix(&scenario, &service, tick, format.into())?)?;
            Ok(0)
        }
        Command::ExportDot {
            scenario,
            what,
            service,
            tick,
            out,
        } => {
            write_or_print(out.as_ref(), &cmd_export_dot(&scenario, &what, service.as_deref(), tick)?)?;
            Ok(0)
        }
        Command::Replay { scenario, trace } => match cmd_replay(&scenario, &trace)? {
            None => {
                if cli.verbose > 0 {
                    eprintln!("traces match");
                }
                Ok(0)
            }
            Some(diff) => {
                eprint!("{diff}");
                Ok(1)
            }
        },
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
