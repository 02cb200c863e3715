//! Flat `key=value` configuration with command-line overrides.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::CliError;

/// Resolved parameters. Every value read through [`Params::get_or`] is
/// recorded, so the hash covers defaults as well as explicit settings.
#[derive(Clone, Debug, Default)]
pub struct Params {
    map: BTreeMap<String, String>,
}

fn normalize(key: &str) -> String {
    key.trim().replace('-', "_")
}

impl Params {
    /// Reads a config file: one `key = value` per line, `#` starts a comment.
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut map = BTreeMap::new();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Schema(format!("config line {}: expected key=value", k + 1))
            })?;
            map.insert(normalize(key), value.trim().to_string());
        }
        Ok(Self { map })
    }

    /// Overrides `key` when a flag was given.
    pub fn set<T: Display>(&mut self, key: &str, value: Option<T>) {
        if let Some(v) = value {
            self.map.insert(normalize(key), v.to_string());
        }
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: Display,
    {
        let key = normalize(key);
        self.map
            .get(&key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| CliError::Schema(format!("parameter {key}={v:?}: {e}")))
            })
            .transpose()
    }

    pub fn get_or<T: FromStr + Display>(&mut self, key: &str, default: T) -> Result<T, CliError>
    where
        T::Err: Display,
    {
        match self.get(key)? {
            Some(v) => Ok(v),
            None => {
                self.map.insert(normalize(key), default.to_string());
                Ok(default)
            }
        }
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T, CliError>
    where
        T::Err: Display,
    {
        self.get(key)?
            .ok_or_else(|| CliError::Usage(format!("missing parameter {}", normalize(key))))
    }

    /// Comma-separated list.
    pub fn list<T: FromStr>(&self, key: &str) -> Result<Vec<T>, CliError>
    where
        T::Err: Display,
    {
        let key = normalize(key);
        let raw = self
            .map
            .get(&key)
            .ok_or_else(|| CliError::Usage(format!("missing parameter {key}")))?;
        raw.split(',')
            .map(|s| {
                s.trim()
                    .parse::<T>()
                    .map_err(|e| CliError::Schema(format!("parameter {key}: {s:?}: {e}")))
            })
            .collect()
    }

    /// First 16 hex digits of the SHA-256 of the sorted `key=value` lines.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for (k, v) in &self.map {
            h.update(k.as_bytes());
            h.update(b"=");
            h.update(v.as_bytes());
            h.update(b"\n");
        }
        h.finalize().iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn entries(&self) -> &BTreeMap<String, String> {
        &self.map
    }
}
