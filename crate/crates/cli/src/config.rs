use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::CliError;

/// Flat `key = value` settings read from a config file. Blank lines and
/// lines starting with `#` are ignored.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    entries: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("config line {}: expected `key = value`", i + 1)))?;
            let key = key.trim().replace('-', "_");
            if entries.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(CliError::Usage(format!("config line {}: duplicate key `{key}`", i + 1)));
            }
        }
        Ok(ConfigFile { entries })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Rejects keys outside `allowed`.
    pub fn check_keys(&self, allowed: &[&str]) -> Result<(), CliError> {
        match self.entries.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(CliError::Usage(format!(
                "unknown config key `{k}` (expected one of: {})",
                allowed.join(", ")
            ))),
            None => Ok(()),
        }
    }

    /// Command-line value if given, else the config value, else `default`.
    pub fn resolve<T>(&self, key: &str, flag: Option<T>, default: T) -> Result<T, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.entries.get(key) {
            Some(raw) => raw
                .parse()
                .map_err(|e| CliError::Usage(format!("config key `{key}`: cannot parse `{raw}`: {e}"))),
            None => Ok(default),
        }
    }

    /// Comma-separated list of sizes.
    pub fn resolve_list(&self, key: &str, flag: Option<&str>, default: Vec<usize>) -> Result<Vec<usize>, CliError> {
        let Some(raw) = flag.or(self.entries.get(key).map(String::as_str)) else {
            return Ok(default);
        };
        parse_list(raw).map_err(|e| CliError::Usage(format!("`{key}`: {e}")))
    }
}

pub fn parse_list(raw: &str) -> Result<Vec<usize>, String> {
    raw.split(',')
        .map(|s| s.trim().parse::<usize>().map_err(|e| format!("cannot parse `{s}`: {e}")))
        .collect()
}

/// Resolved settings written next to every output.
#[derive(Debug, Default)]
pub struct Snapshot {
    lines: Vec<(String, String)>,
}

impl Snapshot {
    pub fn set(&mut self, key: &str, value: impl Display) {
        self.lines.push((key.to_string(), value.to_string()));
    }

    pub fn render(&self, command: &str) -> String {
        let mut out = format!("# resolved configuration for `scmgan {command}`\n");
        for (k, v) in &self.lines {
            out.push_str(&format!("{k} = {v}\n"));
        }
        out
    }
}

pub fn join_list(v: &[usize]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}
