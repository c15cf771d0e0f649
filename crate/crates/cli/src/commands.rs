use std::fmt::Display;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use fanocalc_core::rational::format;
use fanocalc_core::{
    certify_scenario, check_claims, counts_of_initial, descendants, dominates, enumerate_baskets, initial_basket,
    prime_packings, replay_ledger, Basket, BasketConstraints, ClaimFile, Error, FanoNumerics, Ledger, Scenario,
};

use crate::{Cli, Command};

pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Display) -> Self {
        Self {
            code: 1,
            message: message.to_string(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::VerificationFailure { .. } => 2,
            _ => 1,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Inline JSON, or the contents of the file after `@`.
fn read_arg(arg: &str) -> CliResult<String> {
    match arg.strip_prefix('@') {
        Some(path) => read_file(Path::new(path)),
        None => Ok(arg.to_string()),
    }
}

fn read_file(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

fn parse_json<T: DeserializeOwned>(what: &str, text: &str) -> CliResult<T> {
    serde_json::from_str(text).map_err(|e| CliError::usage(format!("malformed {what}: {e}")))
}

fn parse_basket(arg: &str) -> CliResult<Basket> {
    let raw: Vec<(i64, i64)> = parse_json("basket", &read_arg(arg)?)?;
    Ok(Basket::validate(&raw)?)
}

fn parse_constraints(arg: Option<&str>) -> CliResult<BasketConstraints> {
    let c: BasketConstraints = match arg {
        Some(a) => parse_json("constraints", &read_arg(a)?)?,
        None => BasketConstraints::default(),
    };
    c.validate()?;
    Ok(c)
}

pub fn data_dir(flag: Option<&Path>) -> PathBuf {
    if let Some(p) = flag {
        return p.to_path_buf();
    }
    if let Some(p) = std::env::var_os("FANOCALC_DATA_DIR") {
        return PathBuf::from(p);
    }
    let local = PathBuf::from("data");
    if local.join("ledger.json").is_file() {
        return local;
    }
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data"))
}

fn annotate(b: &Basket, p1: u32) -> Value {
    let f = FanoNumerics::new(b.clone(), p1);
    json!({
        "basket": b,
        "sigma": b.sigma().to_string(),
        "sigma_prime": format(&b.sigma_prime()),
        "gamma": format(&b.gamma()),
        "k3": format(&f.deg_k3()),
        "r_X": b.cartier_index().to_string(),
        "r_max": b.r_max().map(|r| r.to_string()).ok(),
    })
}

fn json_out<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable")
}

fn emit(cli: &Cli, mut text: String) -> CliResult<()> {
    text.push('\n');
    match &cli.out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::usage(format!("{}: {e}", path.display()))),
        None => {
            use std::io::Write;
            match std::io::stdout().lock().write_all(text.as_bytes()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::usage(e)),
                _ => Ok(()),
            }
        }
    }
}

/// Runs the command; the returned code is 0 on success and 2 when a check fails.
pub fn run(cli: &Cli) -> CliResult<u8> {
    if let Some(n) = cli.jobs {
        if n == 0 {
            return Err(CliError::usage("--jobs must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(CliError::usage)?;
    }
    let (out, code) = match &cli.command {
        Command::Info(a) => {
            let b = parse_basket(&a.basket.basket)?;
            let f = FanoNumerics::new(b.clone(), a.p1);
            let mut v = annotate(&b, a.p1);
            v["p1"] = json!(a.p1.to_string());
            v["p2"] = json!(f.derived_p2().to_string());
            (json_out(&v), 0)
        }
        Command::Pg { numerics, m } => {
            if *m == 0 {
                return Err(CliError::usage("--m must be positive"));
            }
            let b = parse_basket(&numerics.basket.basket)?;
            let p = FanoNumerics::new(b, numerics.p1).anti_plurigenus(*m)?;
            (p.to_string(), 0)
        }
        Command::Pack(a) => {
            let b = parse_basket(&a.basket)?;
            let v: Vec<Value> = prime_packings(&b)
                .into_iter()
                .map(|(step, basket)| json!({ "step": step, "basket": basket }))
                .collect();
            (json_out(&v), 0)
        }
        Command::Unpack(a) => {
            let b = parse_basket(&a.basket)?;
            let init = initial_basket(&b);
            let counts = counts_of_initial(&init);
            (json_out(&json!({ "basket": b, "initial": init, "counts": counts })), 0)
        }
        Command::Dominates { basket, target } => {
            let from = parse_basket(&basket.basket)?;
            let to = parse_basket(target)?;
            let steps = dominates(&from, &to);
            (json_out(&json!({ "dominates": steps.is_some(), "steps": steps })), 0)
        }
        Command::Descendants {
            basket,
            constraints,
            p1,
        } => {
            let b = parse_basket(&basket.basket)?;
            let c = parse_constraints(constraints.as_deref())?;
            let p1 = c.p1.or(*p1).unwrap_or(0);
            let v: Vec<Value> = descendants(&b, &c).iter().map(|d| annotate(d, p1)).collect();
            (json_out(&v), 0)
        }
        Command::Enumerate { constraints, p1 } => {
            let c = parse_constraints(Some(constraints))?;
            let p1 = c.p1.or(*p1).unwrap_or(0);
            let v: Vec<Value> = enumerate_baskets(&c)?.iter().map(|d| annotate(d, p1)).collect();
            (json_out(&v), 0)
        }
        Command::Certify { scenario } => {
            let s: Scenario = parse_json("scenario", &read_arg(scenario)?)?;
            s.validate()?;
            (json_out(&certify_scenario(&s)?), 0)
        }
        Command::Replay { ledger, setting } => {
            let path = match ledger {
                Some(p) => p.clone(),
                None => data_dir(cli.data_dir.as_deref()).join("ledger.json"),
            };
            let ledger = Ledger::from_json(&read_file(&path)?)?;
            let report = replay_ledger(&ledger, *setting)?;
            let code = if report.ok { 0 } else { 2 };
            (json_out(&report), code)
        }
        Command::CheckClaims => {
            let file = ClaimFile::load(&data_dir(cli.data_dir.as_deref()))?;
            let report = check_claims(&file)?;
            let code = if report.ok { 0 } else { 2 };
            (json_out(&report), code)
        }
    };
    emit(cli, out)?;
    Ok(code)
}
