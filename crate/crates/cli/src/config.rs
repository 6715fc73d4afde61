//! Flag values layered over an optional JSON config object.
//!
//! Precedence: command-line flag, then config key, then the caller's default.
//! Config keys are the long flag names with dashes replaced by underscores.

use std::fs;
use std::path::Path;

use clap::ValueEnum;
use serde::de::DeserializeOwned;
use serde_json::{Map, Value};

use crate::error::CliError;

pub const SEED_ENV: &str = "PROBVAL_SEED";

#[derive(Debug, Default)]
pub struct Layer {
    values: Map<String, Value>,
}

impl Layer {
    /// Reads `path` and rejects keys outside `allowed`.
    pub fn load(path: Option<&Path>, allowed: &[&str]) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text, allowed)
    }

    pub fn parse(text: &str, allowed: &[&str]) -> Result<Self, CliError> {
        let value: Value = serde_json::from_str(text).map_err(|e| CliError::usage(format!("invalid config: {e}")))?;
        let Value::Object(values) = value else {
            return Err(CliError::usage("config must be a JSON object"));
        };
        if let Some(key) = values.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(CliError::usage(format!(
                "unknown config key `{key}` (expected one of: {})",
                allowed.join(", ")
            )));
        }
        Ok(Self { values })
    }

    pub fn get<T: DeserializeOwned>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError> {
        if flag.is_some() {
            return Ok(flag);
        }
        self.values
            .get(key)
            .map(|v| {
                serde_json::from_value(v.clone()).map_err(|e| CliError::usage(format!("config key `{key}`: {e}")))
            })
            .transpose()
    }

    pub fn require<T: DeserializeOwned>(&self, flag: Option<T>, key: &str) -> Result<T, CliError> {
        self.get(flag, key)?.ok_or_else(|| CliError::usage(format!("missing required --{}", key.replace('_', "-"))))
    }

    /// Enumerations are written in config files exactly as on the command line.
    pub fn get_enum<T: ValueEnum>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError> {
        if flag.is_some() {
            return Ok(flag);
        }
        self.get::<String>(None, key)?
            .map(|s| T::from_str(&s, true).map_err(|e| CliError::usage(format!("config key `{key}`: {e}"))))
            .transpose()
    }

    /// A probability strictly inside (0, 1).
    pub fn probability(&self, flag: Option<f64>, key: &str) -> Result<Option<f64>, CliError> {
        match self.get(flag, key)? {
            Some(v) if !(v > 0.0 && v < 1.0) => Err(CliError::usage(format!("{key} = {v} is not strictly between 0 and 1"))),
            other => Ok(other),
        }
    }

    pub fn require_probability(&self, flag: Option<f64>, key: &str) -> Result<f64, CliError> {
        self.probability(flag, key)?
            .ok_or_else(|| CliError::usage(format!("missing required --{key}")))
    }

    /// Flag, then config, then the `PROBVAL_SEED` environment variable, then 0.
    pub fn seed(&self, flag: Option<u64>) -> Result<u64, CliError> {
        if let Some(seed) = self.get(flag, "seed")? {
            return Ok(seed);
        }
        match std::env::var(SEED_ENV) {
            Ok(s) => s
                .trim()
                .parse()
                .map_err(|_| CliError::usage(format!("{SEED_ENV}=`{s}` is not an unsigned integer"))),
            Err(_) => Ok(0),
        }
    }
}
