//! Flat `key = value` configuration.
//!
//! Every command has a fixed key set with defaults. A config file may set
//! any of them (`#` starts a comment); `--set KEY=VALUE` and the dedicated
//! flags override the file. Unknown keys are rejected. The resolved set is
//! written to the output directory and hashed, excluding keys that only
//! choose where and how results are written.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

/// Keys that do not change any numerical result.
const PRESENTATION_KEYS: [&str; 3] = ["out", "svg", "parallel"];

#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    command: String,
    values: BTreeMap<String, String>,
}

impl Settings {
    /// Starts from `defaults`, which also fixes the accepted key set.
    pub fn new(command: &str, defaults: &[(&str, &str)]) -> Settings {
        Settings {
            command: command.to_string(),
            values: defaults.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
        }
    }

    pub fn command(&self) -> &str {
        &self.command
    }

    pub fn set(&mut self, key: &str, value: &str) -> CliResult<()> {
        let key = key.trim();
        match self.values.get_mut(key) {
            Some(slot) => {
                *slot = value.trim().to_string();
                Ok(())
            }
            None => Err(CliError::Config(format!(
                "unknown key '{key}' for command {}; accepted keys: {}",
                self.command,
                self.values.keys().cloned().collect::<Vec<_>>().join(", ")
            ))),
        }
    }

    /// Applies a `KEY=VALUE` assignment.
    pub fn assign(&mut self, assignment: &str) -> CliResult<()> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("expected KEY=VALUE, got '{assignment}'")))?;
        self.set(k, v)
    }

    /// Applies every assignment of a config file.
    pub fn apply_file(&mut self, text: &str, origin: &str) -> CliResult<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            self.assign(line)
                .map_err(|e| CliError::Config(format!("{origin}:{}: {e}", n + 1)))?;
        }
        Ok(())
    }

    pub fn raw(&self, key: &str) -> &str {
        self.values
            .get(key)
            .unwrap_or_else(|| panic!("key '{key}' is not declared for {}", self.command))
    }

    pub fn get<T>(&self, key: &str) -> CliResult<T>
    where
        T: FromStr,
        T::Err: Display,
    {
        let raw = self.raw(key);
        raw.parse()
            .map_err(|e| CliError::Config(format!("invalid value '{raw}' for {key}: {e}")))
    }

    /// Comma-separated list.
    pub fn get_list<T>(&self, key: &str) -> CliResult<Vec<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        self.raw(key)
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse()
                    .map_err(|e| CliError::Config(format!("invalid entry '{s}' in {key}: {e}")))
            })
            .collect()
    }

    /// The resolved configuration, one `key = value` per line.
    pub fn resolved(&self) -> String {
        let mut out = format!("# resolved configuration for {}\n", self.command);
        for (k, v) in &self.values {
            out.push_str(&format!("{k} = {v}\n"));
        }
        out
    }

    /// SHA-256 over the command and every result-affecting key.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(format!("command={}\n", self.command));
        for (k, v) in &self.values {
            if !PRESENTATION_KEYS.contains(&k.as_str()) {
                h.update(format!("{k}={v}\n"));
            }
        }
        hex::encode(h.finalize())
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&str, &str)> {
        self.values.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Settings {
        Settings::new("demo", &[("seed", "0"), ("shots", "100"), ("out", "x")])
    }

    #[test]
    fn file_and_overrides() {
        let mut s = sample();
        s.apply_file("# comment\nseed = 7  # trailing\n\nshots=5\n", "f")
            .unwrap();
        assert_eq!(s.get::<u64>("seed").unwrap(), 7);
        s.assign("shots=9").unwrap();
        assert_eq!(s.get::<u64>("shots").unwrap(), 9);
    }

    #[test]
    fn unknown_keys_and_bad_values() {
        let mut s = sample();
        let err = s.apply_file("seeds = 1\n", "cfg.txt").unwrap_err();
        assert!(err.to_string().contains("cfg.txt:1"));
        assert_eq!(err.exit_code(), 2);
        s.set("shots", "many").unwrap();
        assert!(s.get::<u64>("shots").is_err());
        assert!(s.assign("novalue").is_err());
    }

    #[test]
    fn hash_ignores_output_location() {
        let a = sample();
        let mut b = sample();
        b.set("out", "elsewhere").unwrap();
        assert_eq!(a.hash(), b.hash());
        b.set("seed", "1").unwrap();
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn lists() {
        let mut s = Settings::new("demo", &[("sizes", "4, 8,16")]);
        assert_eq!(s.get_list::<usize>("sizes").unwrap(), vec![4, 8, 16]);
        s.set("sizes", "4,x").unwrap();
        assert!(s.get_list::<usize>("sizes").is_err());
    }
}
