//! Scenario files.
//!
//! A scenario is a flat TOML table:
//!
//! ```toml
//! bandwidth_hz = 5e6
//! cycle_s = 1e-3
//! terminals = 5
//! payload_bits = 128
//! alpha_symbols = 50
//! beta_bits = 8
//! eps_star = 1e-4
//! variant = "best-relay"
//! j = 2
//! snr_db = 15.0          # or snr_matrix_db = [[...], ...]
//! regime = "both"
//! ```
//!
//! Missing keys keep their defaults. Unknown keys are rejected.

use std::path::Path;

use toml::{Table, Value};

use crate::error::{Error, Result};
use crate::overhead::{Regime, SnrSpec, SystemConfig};
use crate::path::TopologySnr;

pub const KEYS: [&str; 12] = [
    "bandwidth_hz",
    "cycle_s",
    "terminals",
    "payload_bits",
    "alpha_symbols",
    "beta_bits",
    "eps_star",
    "variant",
    "j",
    "snr_db",
    "snr_matrix_db",
    "regime",
];

/// Which regimes to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RegimeChoice {
    Fbl,
    Ibl,
    #[default]
    Both,
}

impl RegimeChoice {
    pub fn regimes(self) -> Vec<Regime> {
        match self {
            RegimeChoice::Fbl => vec![Regime::Fbl],
            RegimeChoice::Ibl => vec![Regime::Ibl],
            RegimeChoice::Both => vec![Regime::Fbl, Regime::Ibl],
        }
    }
}

impl std::str::FromStr for RegimeChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fbl" => Ok(RegimeChoice::Fbl),
            "ibl" => Ok(RegimeChoice::Ibl),
            "both" => Ok(RegimeChoice::Both),
            other => Err(Error::Config(format!(
                "`regime`: expected fbl, ibl or both, got `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub config: SystemConfig,
    pub regime: Option<RegimeChoice>,
}

pub fn load(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse(&text)
}

pub fn parse(text: &str) -> Result<Scenario> {
    let table: Table = text.parse().map_err(|e| Error::Config(format!("{e}")))?;
    let mut config = SystemConfig::default();
    let mut regime = None;
    if table.contains_key("snr_db") && table.contains_key("snr_matrix_db") {
        return Err(Error::Config(
            "`snr_db` and `snr_matrix_db` are mutually exclusive".into(),
        ));
    }
    for (key, value) in &table {
        match key.as_str() {
            "bandwidth_hz" => config.bandwidth_hz = number(key, value)?,
            "cycle_s" => config.cycle_s = number(key, value)?,
            "terminals" => config.terminals = count(key, value)?,
            "payload_bits" => config.base_payload_bits = number(key, value)?,
            "alpha_symbols" => config.alpha_symbols = number(key, value)?,
            "beta_bits" => config.beta_bits = number(key, value)?,
            "eps_star" => config.eps_star = number(key, value)?,
            "variant" => config.variant = string(key, value)?.parse().map_err(|e| keyed(key, e))?,
            "j" => config.j = count(key, value)?,
            "snr_db" => {
                config.snr = SnrSpec::Homogeneous {
                    db: number(key, value)?,
                }
            }
            "snr_matrix_db" => config.snr = SnrSpec::Matrix(matrix(key, value)?),
            "regime" => regime = Some(string(key, value)?.parse()?),
            other => {
                return Err(Error::Config(format!(
                    "unknown key `{other}` (expected one of {})",
                    KEYS.join(", ")
                )))
            }
        }
    }
    Ok(Scenario { config, regime })
}

fn keyed(key: &str, e: Error) -> Error {
    match e {
        Error::Config(msg) => Error::Config(format!("`{key}`: {msg}")),
        other => other,
    }
}

fn number(key: &str, value: &Value) -> Result<f64> {
    match value {
        Value::Float(x) => Ok(*x),
        Value::Integer(i) => Ok(*i as f64),
        other => Err(Error::Config(format!(
            "`{key}`: expected a number, got {}",
            other.type_str()
        ))),
    }
}

fn count(key: &str, value: &Value) -> Result<usize> {
    match value {
        Value::Integer(i) if *i >= 0 => Ok(*i as usize),
        other => Err(Error::Config(format!(
            "`{key}`: expected a nonnegative integer, got {other}"
        ))),
    }
}

fn string<'a>(key: &str, value: &'a Value) -> Result<&'a str> {
    value.as_str().ok_or_else(|| {
        Error::Config(format!(
            "`{key}`: expected a string, got {}",
            value.type_str()
        ))
    })
}

fn matrix(key: &str, value: &Value) -> Result<TopologySnr> {
    let rows = value
        .as_array()
        .ok_or_else(|| Error::Config(format!("`{key}`: expected an array of arrays")))?;
    let parsed = rows
        .iter()
        .map(|row| {
            row.as_array()
                .ok_or_else(|| Error::Config(format!("`{key}`: expected an array of arrays")))?
                .iter()
                .map(|v| number(key, v))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    TopologySnr::from_matrix_db(&parsed).map_err(|e| keyed(key, e))
}
