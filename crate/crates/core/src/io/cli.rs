//! Command-line front end for the `lefrac` binary.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use super::{cmd_analyze, cmd_simulate, cmd_sweep_delta, cmd_verify, parse_config, ExitStatus, RunConfig};
use crate::error::{Error, Result};
use crate::verify::VerifyOptions;

#[derive(Debug, Parser)]
#[command(
    name = "lefrac",
    version,
    about = "Time-fractional Lengyel–Epstein model: stability analysis and simulation"
)]
pub struct Cli {
    /// More log output (repeat for debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify the equilibrium and write report.json.
    Analyze {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; defaults to output.dir from the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate the system and write snapshots, probes and metrics.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides ic.seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Repeat a simulation over a range of fractional orders.
    SweepDelta {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long)]
        steps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the built-in numerical self-checks.
    Verify,
}

fn out_dir(cli_out: Option<PathBuf>, cfg: &RunConfig) -> Result<PathBuf> {
    cli_out
        .or_else(|| cfg.output_dir().map(Path::to_path_buf))
        .ok_or_else(|| Error::Usage("no output directory: pass --out or set output.dir".into()))
}

fn init_logger(verbose: u8) {
    let level = match verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .try_init();
}

/// Parses `args` (including the program name), runs the command and returns the exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitStatus::Failure.code()
            } else {
                ExitStatus::Success.code()
            };
        }
    };
    init_logger(cli.verbose);
    match dispatch(cli.command) {
        Ok(status) => status.code(),
        Err(e) => {
            eprintln!("error: {e}");
            ExitStatus::for_error(&e).code()
        }
    }
}

fn dispatch(command: Command) -> Result<ExitStatus> {
    let mut stdout = std::io::stdout().lock();
    match command {
        Command::Analyze { config, out } => {
            let cfg = parse_config(&config)?;
            let out = out_dir(out, &cfg)?;
            let report = cmd_analyze(&cfg, &out)?;
            let _ = writeln!(stdout, "{:?}", report.verdict());
            Ok(ExitStatus::for_analysis(report.verdict(), true))
        }
        Command::Simulate { config, out, seed } => {
            let cfg = parse_config(&config)?;
            let out = out_dir(out, &cfg)?;
            let outcome = cmd_simulate(&cfg, &out, seed)?;
            if let super::RunStatus::Aborted { step, field, node } = &outcome.manifest.status {
                eprintln!("error: non-finite value in field `{field}` at step {step} (node {node})");
            }
            Ok(outcome.exit_status())
        }
        Command::SweepDelta {
            config,
            from,
            to,
            steps,
            out,
        } => {
            let cfg = parse_config(&config)?;
            let out = out_dir(out, &cfg)?;
            for row in cmd_sweep_delta(&cfg, from, to, steps, &out)? {
                let _ = writeln!(
                    stdout,
                    "delta={} final_error={:.6e} tail_amplitude={:.6e}",
                    row.delta, row.final_error, row.tail_amplitude
                );
            }
            Ok(ExitStatus::Success)
        }
        Command::Verify => {
            let (results, status) = cmd_verify(&VerifyOptions::default());
            for r in results {
                let _ = writeln!(
                    stdout,
                    "{} {}: {}",
                    if r.passed { "PASS" } else { "FAIL" },
                    r.name,
                    r.detail
                );
            }
            Ok(status)
        }
    }
}
