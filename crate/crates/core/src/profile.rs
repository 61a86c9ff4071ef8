//! Run profiles and the flat key-value config file.
//!
//! Effective values are resolved in three layers: profile defaults, then the
//! config file, then command-line overrides.

use std::path::Path;

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::error::{Error, Result};
use crate::train::{LossWeights, TrainConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileName {
    #[default]
    Desk,
    Full,
}

impl std::str::FromStr for ProfileName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "desk" => Ok(ProfileName::Desk),
            "full" => Ok(ProfileName::Full),
            other => Err(Error::Config(format!("unknown profile `{other}` (desk | full)"))),
        }
    }
}

/// Every tunable of a training run, as one flat table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub profile: ProfileName,
    #[serde(flatten)]
    pub train: TrainConfig,
    #[serde(flatten)]
    pub loss: LossWeights,
}

impl RunConfig {
    pub fn profile(name: ProfileName, seed: u64) -> Self {
        let train = match name {
            ProfileName::Desk => TrainConfig::desk(seed),
            ProfileName::Full => TrainConfig::full(seed),
        };
        Self {
            profile: name,
            train,
            loss: LossWeights::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.train.validate()?;
        self.loss.validate()
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(format!("cannot serialize config: {e}")))
    }

    /// A complete config file; unknown or missing keys are errors.
    pub fn from_toml(text: &str) -> Result<Self> {
        let table = parse_table(text)?;
        check_keys(&table)?;
        let known = known_keys();
        if let Some(missing) = known.iter().find(|k| !table.contains_key(*k)) {
            return Err(Error::Config(format!("config is missing `{missing}`")));
        }
        from_table(table)
    }

    /// `defaults(profile) <- file <- flags`. The profile itself is taken from
    /// the flags, else the file, else desk.
    pub fn resolve(file: Option<&Table>, flags: &Table) -> Result<Self> {
        let empty = Table::new();
        let file = file.unwrap_or(&empty);
        check_keys(file)?;
        check_keys(flags)?;
        let name = match flags.get("profile").or_else(|| file.get("profile")) {
            Some(Value::String(s)) => s.parse()?,
            Some(other) => return Err(Error::Config(format!("profile must be a string, got {other}"))),
            None => ProfileName::Desk,
        };
        let mut table = to_table(&Self::profile(name, 0))?;
        for layer in [file, flags] {
            for (k, v) in layer {
                table.insert(k.clone(), v.clone());
            }
        }
        from_table(table)
    }
}

fn parse_table(text: &str) -> Result<Table> {
    text.parse::<Table>()
        .map_err(|e| Error::Config(format!("config file: {e}")))
}

pub fn read_config_file(path: impl AsRef<Path>) -> Result<Table> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    parse_table(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

/// Parses `key=value`; the value is read as a TOML literal, falling back to
/// a bare string.
pub fn parse_override(s: &str) -> Result<(String, Value)> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{s}` is not key=value")))?;
    let (k, v) = (k.trim(), v.trim());
    let value = format!("v = {v}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(v.to_string()));
    Ok((k.to_string(), value))
}

fn to_table(c: &RunConfig) -> Result<Table> {
    Table::try_from(c).map_err(|e| Error::Config(format!("cannot serialize config: {e}")))
}

fn known_keys() -> Vec<String> {
    to_table(&RunConfig::profile(ProfileName::Desk, 0))
        .expect("default config serializes")
        .keys()
        .cloned()
        .collect()
}

fn check_keys(t: &Table) -> Result<()> {
    let known = known_keys();
    match t.keys().find(|k| !known.contains(k)) {
        Some(k) => Err(Error::Config(format!("unknown config key `{k}`"))),
        None => Ok(()),
    }
}

fn from_table(t: Table) -> Result<RunConfig> {
    let c: RunConfig = Value::Table(t)
        .try_into()
        .map_err(|e: toml::de::Error| Error::Config(e.message().to_string()))?;
    c.validate()?;
    Ok(c)
}
