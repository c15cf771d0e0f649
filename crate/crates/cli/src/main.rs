//! `fanocalc`: command-line front end for the basket calculus and proof replay.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "fanocalc",
    version,
    about = "Exact basket calculus and birationality certificates"
)]
pub struct Cli {
    /// Worker threads for parallel searches (default: all cores)
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    /// Write the JSON result here instead of stdout
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Directory holding ledger.json, claims.json and table files
    #[arg(long, global = true)]
    pub data_dir: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct BasketArg {
    /// Basket as JSON `[[b, r], ...]`, or `@path` to a JSON file
    #[arg(long)]
    pub basket: String,
}

#[derive(Debug, Args)]
pub struct NumericsArgs {
    #[command(flatten)]
    pub basket: BasketArg,
    /// P_{-1}
    #[arg(long, default_value_t = 0)]
    pub p1: u32,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// sigma, sigma', gamma, r_X, r_max and -K^3 of a basket
    Info(NumericsArgs),
    /// Anti-plurigenus P_{-m}
    Pg {
        #[command(flatten)]
        numerics: NumericsArgs,
        #[arg(long)]
        m: u32,
    },
    /// All one-step prime packings
    Pack(BasketArg),
    /// Initial basket and its (1, r) counts
    Unpack(BasketArg),
    /// Whether --basket packs down to --target, with a witness sequence
    Dominates {
        #[command(flatten)]
        basket: BasketArg,
        #[arg(long)]
        target: String,
    },
    /// Every basket reachable by packings that satisfies --constraints
    Descendants {
        #[command(flatten)]
        basket: BasketArg,
        /// Constraints as JSON or `@path`
        #[arg(long)]
        constraints: Option<String>,
        /// P_{-1} for the degree column when the constraints do not fix it
        #[arg(long)]
        p1: Option<u32>,
    },
    /// All baskets satisfying --constraints
    Enumerate {
        /// Constraints as JSON or `@path`
        #[arg(long)]
        constraints: String,
        /// P_{-1} for the degree column when the constraints do not fix it
        #[arg(long)]
        p1: Option<u32>,
    },
    /// Certify one scenario
    Certify {
        /// Scenario as JSON or `@path`
        #[arg(long)]
        scenario: String,
    },
    /// Certify every scenario of a ledger
    Replay {
        /// Ledger file (default: ledger.json in the data directory)
        #[arg(long)]
        ledger: Option<PathBuf>,
        /// weak or qfano
        #[arg(long, default_value = "weak")]
        setting: fanocalc_core::Setting,
    },
    /// Check the enumeration-backed claims bundled with the data
    CheckClaims,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("fanocalc: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
