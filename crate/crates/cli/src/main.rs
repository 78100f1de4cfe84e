#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use hbgbc_cli::output::write_atomic;
use hbgbc_cli::{hard_failure, render_ndjson, run_checks, Overrides, ScenarioFile, Written};
use hbgbc_core::Order;

#[derive(Parser)]
#[command(
    name = "hbgbc",
    version,
    about = "Second-order bounds for broadcast channels with heterogeneous blocklengths"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Output file (CSV, or NDJSON for `verify`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Also write an SVG plot next to the CSV.
    #[arg(long, global = true)]
    svg: bool,
    #[arg(long, global = true, value_enum)]
    order: Option<OrderArg>,
    /// Master seed, overriding the file's.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for outputs the scenario file does not name.
    #[arg(long, global = true, env = "HBGBC_OUT_DIR")]
    out_dir: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum OrderArg {
    First,
    Second,
    Halflogn,
}

impl From<OrderArg> for Order {
    fn from(o: OrderArg) -> Order {
        match o {
            OrderArg::First => Order::FirstOrder,
            OrderArg::Second => Order::SecondOrder,
            OrderArg::Halflogn => Order::WithHalfLogN,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Outer bounds.
    Bounds {
        #[command(subcommand)]
        action: BoundsAction,
    },
    /// Early decoding.
    Ed {
        #[command(subcommand)]
        action: EdAction,
    },
    /// Monte Carlo checks; exits with status 1 if any adequately powered check fails.
    Verify { file: PathBuf },
    /// Finite-blocklength time-sharing curves.
    Timesharing { file: PathBuf },
}

#[derive(Subcommand)]
enum BoundsAction {
    /// Evaluate bound families over the file's sweep.
    Sweep { file: PathBuf },
}

#[derive(Subcommand)]
enum EdAction {
    /// Symbols user 2 needs to decode user 1 early, versus n1.
    Latency { file: PathBuf },
}

fn load(path: &Path) -> anyhow::Result<ScenarioFile> {
    ScenarioFile::load(path).with_context(|| format!("loading {}", path.display()))
}

fn report(w: Written) {
    eprintln!("wrote {}", w.csv.display());
    if let Some(svg) = w.svg {
        eprintln!("wrote {}", svg.display());
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    let ov = Overrides {
        out: cli.common.out,
        svg: cli.common.svg,
        order: cli.common.order.map(Order::from),
        seed: cli.common.seed,
        out_dir: cli.common.out_dir,
    };
    match cli.command {
        Command::Bounds {
            action: BoundsAction::Sweep { file },
        } => report(hbgbc_cli::run_sweep(&load(&file)?, &ov)?),
        Command::Ed {
            action: EdAction::Latency { file },
        } => report(hbgbc_cli::run_ed_latency(&load(&file)?, &ov)?),
        Command::Timesharing { file } => report(hbgbc_cli::run_timesharing(&load(&file)?, &ov)?),
        Command::Verify { file } => {
            let f = load(&file)?;
            let reports = run_checks(&f, ov.seed(&f))?;
            for r in &reports {
                if let Some(w) = &r.warning {
                    eprintln!("warning: {}: {w}", r.check);
                }
            }
            let text = render_ndjson(&reports);
            match ov.out.clone().or_else(|| f.output.ndjson.clone()) {
                Some(p) => {
                    write_atomic(&p, text.as_bytes())?;
                    eprintln!("wrote {}", p.display());
                }
                None => std::io::stdout().write_all(text.as_bytes())?,
            }
            if hard_failure(&reports) {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
