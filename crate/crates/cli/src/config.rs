//! Flat `key = value` run configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Values are taken
//! verbatim after trimming, so grids use the same syntax as on the command line.

use std::collections::BTreeMap;
use std::path::Path;

use crate::CliError;

pub const KNOWN_KEYS: [&str; 18] = [
    "tol", "out", "format", "jobs", "b", "r", "measures", "measure", "kind", "input", "lo", "hi", "n",
    "boundary", "count", "method", "splitting", "allow_large",
];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("config line {}: expected key = value", lineno + 1)))?;
            let key = key.trim().to_ascii_lowercase().replace('-', "_");
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(CliError::Usage(format!("config line {}: unknown key '{key}'", lineno + 1)));
            }
            if values.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(CliError::Usage(format!("config line {}: duplicate key '{key}'", lineno + 1)));
            }
        }
        Ok(Self { values })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// Flag value if given, else the parsed config entry, else `None`.
    pub fn resolve<T, F>(&self, flag: Option<T>, key: &str, parse: F) -> Result<Option<T>, CliError>
    where
        F: FnOnce(&str) -> Result<T, CliError>,
    {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self
                .get(key)
                .map(|s| parse(s).map_err(|e| CliError::Usage(format!("config key '{key}': {e}"))))
                .transpose(),
        }
    }

    /// Like [`Config::resolve`] for a textual flag: whichever source wins is parsed.
    pub fn resolve_parsed<T, F>(&self, flag: Option<String>, key: &str, parse: F) -> Result<Option<T>, CliError>
    where
        F: Fn(&str) -> Result<T, CliError>,
    {
        match flag {
            Some(s) => parse(&s).map(Some),
            None => self.resolve(None, key, parse),
        }
    }
}

pub fn parse_value<T: std::str::FromStr>(s: &str) -> Result<T, CliError>
where
    T::Err: std::fmt::Display,
{
    s.trim()
        .parse()
        .map_err(|e| CliError::Usage(format!("cannot parse '{s}': {e}")))
}

pub fn parse_bool(s: &str) -> Result<bool, CliError> {
    match s.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        other => Err(CliError::Usage(format!("expected a boolean, got '{other}'"))),
    }
}
