//! Command-line flags, the optional `key = value` config file, and the
//! resolved parameter set recorded in manifests.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use secrecy_core::channel::{db_to_linear, LinkParams, SeriesControl, TruncationRule, WiretapModel};

use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "secrecy", version, about = "Secrecy outage over correlated Nakagami-m/Gamma fading")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Secrecy outage probability at one operating point
    Sop(Common),
    /// P_o(0) = Pr[γ_E > γ_B] and its complement, the probability of non-zero secrecy capacity
    Pnzsc {
        #[command(flatten)]
        common: Common,
        /// Use the high-SNR power law
        #[arg(long)]
        asymptotic: bool,
    },
    /// Monte Carlo estimate of the secrecy outage probability
    Mc(Common),
    /// Evaluate a quantity over a range of one parameter
    Sweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// Cross-validate the series, reference integration and Monte Carlo routes
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodArg {
    Series,
    Oracle,
    Asymptotic,
    Steen15,
    Printed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TruncationArg {
    /// Neglected mixture mass below --tail-tol
    Mass,
    /// Newest shell below --tail-tol relative to the partial sum
    Relative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    Rate,
    SnrBDb,
    SnrEDb,
    Rho,
    /// Shadowing shape of both links
    K,
    /// Fading shape of both links
    M,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    Sop,
    Pzero,
    Pnzsc,
    Mc,
}

/// Flags shared by every evaluation subcommand. Unset flags fall back to
/// the config file, then to built-in defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// Fading severity m of the legitimate link
    #[arg(long)]
    pub m1: Option<f64>,
    /// Fading severity m of the eavesdropper link
    #[arg(long)]
    pub m2: Option<f64>,
    /// Shadowing shape k of the legitimate link
    #[arg(long)]
    pub k1: Option<f64>,
    /// Shadowing shape k of the eavesdropper link
    #[arg(long)]
    pub k2: Option<f64>,
    /// Correlation coefficient of the shadowing, in [0, 1)
    #[arg(long)]
    pub rho: Option<f64>,
    /// Average SNR of the legitimate link, dB
    #[arg(long, allow_hyphen_values = true)]
    pub snr_b_db: Option<f64>,
    /// Average SNR of the eavesdropper link, dB
    #[arg(long, allow_hyphen_values = true)]
    pub snr_e_db: Option<f64>,
    /// Target secrecy rate, bit/s/Hz
    #[arg(long)]
    pub rate: Option<f64>,
    /// Truncation tolerance of the series (default 1e-10)
    #[arg(long)]
    pub tail_tol: Option<f64>,
    /// Largest series order before giving up (default 1000)
    #[arg(long)]
    pub max_terms: Option<usize>,
    #[arg(long, value_enum)]
    pub truncation: Option<TruncationArg>,
    /// Tolerance of the numerical integration (default 1e-6)
    #[arg(long)]
    pub quad_tol: Option<f64>,
    /// Evaluation route (default series)
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    /// Check series results against the reference integration to this tolerance
    #[arg(long)]
    pub guard: Option<f64>,
    /// Monte Carlo sample count (default 10⁶)
    #[arg(long)]
    pub samples: Option<u64>,
    /// Monte Carlo seed (default 0)
    #[arg(long)]
    pub seed: Option<u64>,
    /// Independent random streams to shard the samples over (default 1)
    #[arg(long)]
    pub streams: Option<u64>,
    /// Write the CSV here (and a manifest next to it) instead of standard output
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// `key = value` file with defaults for any of these flags
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Write a gnuplot script plotting the CSV
    #[arg(long)]
    pub plot_script: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub variable: SweepVariable,
    #[arg(long, allow_hyphen_values = true)]
    pub start: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub stop: f64,
    #[arg(long)]
    pub points: usize,
    #[arg(long, value_enum, default_value = "sop")]
    pub quantity: Quantity,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    /// Small grid intended to finish within a minute
    #[arg(long)]
    pub quick: bool,
    /// Allowed |series − reference| for the outage probability
    #[arg(long, default_value_t = 1e-3)]
    pub tol_oracle: f64,
    /// Allowed |P_o(0) series − reference|
    #[arg(long, default_value_t = 1e-4)]
    pub tol_pzero: f64,
    /// Allowed Monte Carlo deviation in standard errors
    #[arg(long, default_value_t = 3.0)]
    pub mc_sigmas: f64,
    #[arg(long)]
    pub samples: Option<u64>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-6)]
    pub quad_tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// The fully resolved parameter set of one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Resolved {
    pub m1: f64,
    pub m2: f64,
    pub k1: f64,
    pub k2: f64,
    pub rho: f64,
    pub snr_b_db: f64,
    pub snr_e_db: f64,
    pub rate: f64,
    pub tail_tol: f64,
    pub max_terms: usize,
    pub truncation: TruncationArg,
    pub quad_tol: f64,
    pub method: MethodArg,
    pub guard: Option<f64>,
    pub samples: u64,
    pub seed: u64,
    pub streams: u64,
}

impl Resolved {
    pub fn model(&self) -> Result<WiretapModel, CliError> {
        let b = LinkParams::new(self.m1, self.k1, db_to_linear(self.snr_b_db)).map_err(CliError::from_input)?;
        let e = LinkParams::new(self.m2, self.k2, db_to_linear(self.snr_e_db)).map_err(CliError::from_input)?;
        WiretapModel::new(b, e, self.rho).map_err(CliError::from_input)
    }

    pub fn control(&self) -> Result<SeriesControl, CliError> {
        let rule = match self.truncation {
            TruncationArg::Mass => TruncationRule::TailMass,
            TruncationArg::Relative => TruncationRule::RelativeIncrement,
        };
        let c = SeriesControl { tail_tol: self.tail_tol, max_terms: self.max_terms, rule };
        c.validate().map_err(CliError::from_input)?;
        Ok(c)
    }
}

/// Parses a `key = value` file. Blank lines and `#` comments are skipped;
/// keys may use `-` or `_`.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected `key = value`", n + 1)))?;
        let key = k.trim().replace('_', "-");
        if !CONFIG_KEYS.contains(&key.as_str()) {
            return Err(CliError::Usage(format!("config line {}: unknown key `{}`", n + 1, k.trim())));
        }
        out.insert(key, v.trim().to_string());
    }
    Ok(out)
}

const CONFIG_KEYS: &[&str] = &[
    "m1", "m2", "k1", "k2", "rho", "snr-b-db", "snr-e-db", "rate", "tail-tol", "max-terms", "truncation", "quad-tol",
    "method", "guard", "samples", "seed", "streams",
];

fn pick<T: FromStr>(flag: Option<T>, file: &BTreeMap<String, String>, key: &str, default: T) -> Result<T, CliError> {
    if let Some(v) = flag {
        return Ok(v);
    }
    match file.get(key) {
        Some(s) => s.parse().map_err(|_| CliError::Usage(format!("config value for `{key}` is invalid: `{s}`"))),
        None => Ok(default),
    }
}

fn pick_enum<T: ValueEnum>(flag: Option<T>, file: &BTreeMap<String, String>, key: &str, default: T) -> Result<T, CliError> {
    if let Some(v) = flag {
        return Ok(v);
    }
    match file.get(key) {
        Some(s) => T::from_str(s, true).map_err(|_| CliError::Usage(format!("config value for `{key}` is invalid: `{s}`"))),
        None => Ok(default),
    }
}

fn read_config(path: Option<&Path>) -> Result<BTreeMap<String, String>, CliError> {
    match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", p.display())))?;
            parse_config(&text)
        }
        None => Ok(BTreeMap::new()),
    }
}

/// Merges flags over the config file over the defaults.
pub fn resolve(c: &Common) -> Result<Resolved, CliError> {
    let f = read_config(c.config.as_deref())?;
    let guard = match c.guard {
        Some(g) => Some(g),
        None => f.get("guard").map(|s| s.parse()).transpose().map_err(|_| CliError::Usage("config value for `guard` is invalid".into()))?,
    };
    let r = Resolved {
        m1: pick(c.m1, &f, "m1", 1.0)?,
        m2: pick(c.m2, &f, "m2", 1.0)?,
        k1: pick(c.k1, &f, "k1", 1.0)?,
        k2: pick(c.k2, &f, "k2", 1.0)?,
        rho: pick(c.rho, &f, "rho", 0.0)?,
        snr_b_db: pick(c.snr_b_db, &f, "snr-b-db", 0.0)?,
        snr_e_db: pick(c.snr_e_db, &f, "snr-e-db", 0.0)?,
        rate: pick(c.rate, &f, "rate", 0.0)?,
        tail_tol: pick(c.tail_tol, &f, "tail-tol", 1e-10)?,
        max_terms: pick(c.max_terms, &f, "max-terms", 1000)?,
        truncation: pick_enum(c.truncation, &f, "truncation", TruncationArg::Mass)?,
        quad_tol: pick(c.quad_tol, &f, "quad-tol", 1e-6)?,
        method: pick_enum(c.method, &f, "method", MethodArg::Series)?,
        guard,
        samples: pick(c.samples, &f, "samples", 1_000_000)?,
        seed: pick(c.seed, &f, "seed", 0)?,
        streams: pick(c.streams, &f, "streams", 1)?,
    };
    if !(r.rate >= 0.0) || !r.rate.is_finite() {
        return Err(CliError::Usage(format!("--rate must be finite and ≥ 0, got {}", r.rate)));
    }
    if !(r.quad_tol > 0.0) {
        return Err(CliError::Usage(format!("--quad-tol must be > 0, got {}", r.quad_tol)));
    }
    if r.samples == 0 || r.streams == 0 {
        return Err(CliError::Usage("--samples and --streams must be ≥ 1".into()));
    }
    if let Some(g) = r.guard {
        if !(g >= 0.0) {
            return Err(CliError::Usage(format!("--guard must be ≥ 0, got {g}")));
        }
    }
    Ok(r)
}
