//! Command-line front end: reproduces the CGLMP, random-access-code and
//! steering visibilities, writes certificates with CSV/JSON reports, and
//! verifies certificates against correlation objects.
//!
//! Machine-readable output goes to files under `--out`; stdout carries a
//! short human summary and stderr carries progress and diagnostics.

use std::ffi::OsString;
use std::path::PathBuf;

use binarise::constructions::StateChoice;
use clap::{Parser, Subcommand, ValueEnum};

pub mod commands;
pub mod error;
pub mod output;

use commands::steering::{Construction, SteeringParams};
use commands::{Context, Mode};
pub use error::{CliError, CliResult, EXIT_INVARIANT, EXIT_IO, EXIT_OK, EXIT_SOLVER, EXIT_USAGE};

/// Default output directory when neither `--out` nor the environment sets one.
pub const DEFAULT_OUT: &str = "binarise-out";
pub const OUT_ENV: &str = "BINARISE_OUT_DIR";

#[derive(Parser, Debug)]
#[command(
    name = "binarise",
    version,
    about = "Critical visibilities of binarised quantum correlations"
)]
pub struct Cli {
    /// Output directory.
    #[arg(long, global = true, env = OUT_ENV, default_value = DEFAULT_OUT)]
    pub out: PathBuf,
    /// Worker threads for independent solves (default: available cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Comparison tolerance: monotonicity slack, or per-cell deviation for reproduce-table2.
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum StateArg {
    Optimal,
    Maxent,
}

impl From<StateArg> for StateChoice {
    fn from(s: StateArg) -> Self {
        match s {
            StateArg::Optimal => StateChoice::Optimal,
            StateArg::Maxent => StateChoice::MaximallyEntangled,
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// CGLMP Bell scenario with N outcomes.
    Cglmp {
        #[arg(short = 'N', long = "dim")]
        n: usize,
        #[arg(long, value_enum, default_value = "both")]
        mode: Mode,
        #[arg(long, value_enum, default_value = "optimal")]
        state: StateArg,
    },
    /// Random access code with d-level symbols and a d-dimensional message.
    Rac {
        #[arg(short = 'N', long = "dim", default_value_t = 3)]
        d: usize,
        #[arg(long, value_enum, default_value = "both")]
        mode: Mode,
        /// Seed of the seesaw search.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Steering with mutually unbiased or random measurements.
    Steering {
        #[arg(long, value_enum, default_value = "mub")]
        construction: Construction,
        #[arg(short = 'N', long = "dim")]
        d: usize,
        /// Number of mutually unbiased bases.
        #[arg(short = 'k', long, default_value_t = 2)]
        k: usize,
        /// Number of random bases.
        #[arg(long = "n-meas", default_value_t = 2)]
        n_meas: usize,
        #[arg(long, default_value_t = 1)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Rank of random mixed states (pure states when omitted).
        #[arg(long)]
        rank: Option<usize>,
        #[arg(long, value_enum, default_value = "both")]
        mode: Mode,
    },
    /// Check a certificate against a correlation object.
    Verify { certificate: PathBuf, object: PathBuf },
    /// Both rows of the CGLMP visibility table up to N.
    #[command(name = "reproduce-table2")]
    ReproduceTable2 {
        #[arg(short = 'N', long = "dim", visible_alias = "max-n")]
        max_n: usize,
    },
}

fn pct(v: f64) -> String {
    format!("{:.2}%", 100.0 * v)
}

fn opt_pct(v: Option<f64>) -> String {
    v.map(pct).unwrap_or_else(|| "-".into())
}

pub fn execute(cli: Cli) -> CliResult<()> {
    let ctx = Context::new(cli.out.clone(), cli.workers, cli.tolerance)?;
    match cli.command {
        Command::Cglmp { n, mode, state } => {
            let r = commands::cglmp::run(&ctx, n, mode, state.into())?;
            println!(
                "CGLMP N={n}: multi {}, binarised {}",
                opt_pct(r.v_multi),
                opt_pct(r.v_bin)
            );
            println!("report: {}", r.csv.display());
        }
        Command::Rac { d, mode, seed } => {
            let r = commands::rac::run(&ctx, d, mode, seed)?;
            println!(
                "RAC d={d}: success {:.6}, multi {}, binarised {}",
                r.success,
                opt_pct(r.v_multi),
                opt_pct(r.v_bin)
            );
            if let (Some((w1, w0)), Some(b)) = (r.witness, r.witness_bound) {
                println!("binarised witness: {w1:.6} at v=1, {w0:.6} at v=0, classical bound {b}");
            }
            println!("report: {}", r.csv.display());
        }
        Command::Steering {
            construction,
            d,
            k,
            n_meas,
            trials,
            seed,
            rank,
            mode,
        } => {
            let params = SteeringParams {
                construction,
                d,
                k,
                n_meas,
                trials,
                seed,
                rank,
                mode,
            };
            let r = commands::steering::run(&ctx, &params)?;
            let gaps: Vec<f64> = r.rows.iter().filter_map(|row| row.gap).collect();
            if let Some(min) = gaps.iter().copied().reduce(f64::min) {
                println!("steering: {} trials, smallest gap {:.6}", r.rows.len(), min);
            } else {
                println!("steering: {} trials", r.rows.len());
            }
            for row in r.rows.iter().take(5) {
                println!(
                    "  trial {}: multi {}, binarised {}",
                    row.trial,
                    opt_pct(row.v_multi),
                    opt_pct(row.v_bin)
                );
            }
            println!("report: {}", r.csv.display());
        }
        Command::Verify { certificate, object } => {
            let report = commands::verify::run(&certificate, &object)?;
            println!(
                "certificate verified: value {:.9}, bound {:.9}, {}",
                report.recomputed_value,
                report.recomputed_bound,
                if report.violation { "violation" } else { "no violation" }
            );
        }
        Command::ReproduceTable2 { max_n } => {
            let r = commands::table2::run(&ctx, max_n)?;
            for row in ["multi", "binarised"] {
                let cells: Vec<String> = r.cells.iter().filter(|c| c.row == row).map(|c| pct(c.v_crit)).collect();
                println!("{row:>9}: {}", cells.join("  "));
            }
            println!("report: {}", r.table.display());
        }
    }
    Ok(())
}

/// Parses arguments and runs; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
