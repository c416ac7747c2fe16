//! Flat key-value configuration files.
//!
//! One `key = value` pair per line, `#` starts a comment. All physical
//! values are atomic units; time-valued keys accept an `_fs` variant that is
//! converted on load (`dt_fs`, `center_time_fs`, `fwhm_fs`, `dt_list_fs`).
//! The resolved form written back into manifests is always in atomic units,
//! so a manifest reloads as a valid configuration.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::FS_TO_AU;

/// Ordered key-value map parsed from a config file.
pub type KvMap = BTreeMap<String, String>;

pub fn parse_kv(text: &str) -> Result<KvMap> {
    let mut map = KvMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected 'key = value'", lineno + 1)))?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if key.is_empty() || value.is_empty() {
            return Err(Error::Config(format!(
                "line {}: empty key or value",
                lineno + 1
            )));
        }
        if map.insert(key.clone(), value).is_some() {
            return Err(Error::Config(format!("duplicate key '{key}'")));
        }
    }
    Ok(map)
}

/// Serialise a map back to the file format, keys sorted.
pub fn format_kv(map: &KvMap) -> String {
    let mut out = String::new();
    for (k, v) in map {
        out.push_str(k);
        out.push_str(" = ");
        out.push_str(v);
        out.push('\n');
    }
    out
}

/// Typed accessors that consume keys from the map, so leftovers can be
/// reported as unknown.
pub struct KvReader {
    map: KvMap,
}

impl KvReader {
    pub fn new(map: KvMap) -> Self {
        Self { map }
    }

    fn take(&mut self, key: &str) -> Option<String> {
        self.map.remove(key)
    }

    pub fn f64_opt(&mut self, key: &str) -> Result<Option<f64>> {
        match self.take(key) {
            None => Ok(None),
            Some(v) => v
                .parse::<f64>()
                .map(Some)
                .map_err(|_| Error::Config(format!("key '{key}': invalid number '{v}'"))),
        }
    }

    pub fn f64_required(&mut self, key: &str) -> Result<f64> {
        self.f64_opt(key)?
            .ok_or_else(|| Error::Config(format!("missing required key '{key}'")))
    }

    pub fn f64_default(&mut self, key: &str, default: f64) -> Result<f64> {
        Ok(self.f64_opt(key)?.unwrap_or(default))
    }

    /// A time value, either `key` (a.u.) or `key_fs` (femtoseconds).
    pub fn time_opt(&mut self, key: &str) -> Result<Option<f64>> {
        let au = self.f64_opt(key)?;
        let fs = self.f64_opt(&format!("{key}_fs"))?;
        match (au, fs) {
            (Some(_), Some(_)) => Err(Error::Config(format!("both '{key}' and '{key}_fs' given"))),
            (Some(v), None) => Ok(Some(v)),
            (None, Some(v)) => Ok(Some(v * FS_TO_AU)),
            (None, None) => Ok(None),
        }
    }

    pub fn time_required(&mut self, key: &str) -> Result<f64> {
        self.time_opt(key)?
            .ok_or_else(|| Error::Config(format!("missing required key '{key}' (or '{key}_fs')")))
    }

    pub fn usize_opt(&mut self, key: &str) -> Result<Option<usize>> {
        match self.take(key) {
            None => Ok(None),
            Some(v) => v
                .parse::<usize>()
                .map(Some)
                .map_err(|_| Error::Config(format!("key '{key}': invalid integer '{v}'"))),
        }
    }

    pub fn usize_required(&mut self, key: &str) -> Result<usize> {
        self.usize_opt(key)?
            .ok_or_else(|| Error::Config(format!("missing required key '{key}'")))
    }

    pub fn usize_default(&mut self, key: &str, default: usize) -> Result<usize> {
        Ok(self.usize_opt(key)?.unwrap_or(default))
    }

    pub fn string_default(&mut self, key: &str, default: &str) -> String {
        self.take(key).unwrap_or_else(|| default.to_string())
    }

    pub fn f64_list(&mut self, key: &str) -> Result<Vec<f64>> {
        match self.take(key) {
            None => Ok(Vec::new()),
            Some(v) => v
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Config(format!("key '{key}': invalid number '{s}'")))
                })
                .collect(),
        }
    }

    /// A list of times, either `key` (a.u.) or `key_fs`.
    pub fn time_list(&mut self, key: &str) -> Result<Vec<f64>> {
        let au = self.f64_list(key)?;
        let fs = self.f64_list(&format!("{key}_fs"))?;
        match (au.is_empty(), fs.is_empty()) {
            (false, false) => Err(Error::Config(format!("both '{key}' and '{key}_fs' given"))),
            (false, true) => Ok(au),
            (true, false) => Ok(fs.into_iter().map(|v| v * FS_TO_AU).collect()),
            (true, true) => Ok(Vec::new()),
        }
    }

    pub fn usize_list(&mut self, key: &str) -> Result<Vec<usize>> {
        match self.take(key) {
            None => Ok(Vec::new()),
            Some(v) => v
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<usize>()
                        .map_err(|_| Error::Config(format!("key '{key}': invalid integer '{s}'")))
                })
                .collect(),
        }
    }

    /// Error if any key was not consumed.
    pub fn finish(self) -> Result<()> {
        if let Some(key) = self.map.keys().next() {
            return Err(Error::Config(format!("unknown key '{key}'")));
        }
        Ok(())
    }
}

/// Apply `key=value` command-line overrides on top of a parsed map.
pub fn apply_overrides(map: &mut KvMap, overrides: &[String]) -> Result<()> {
    for item in overrides {
        let (key, value) = item.split_once('=').ok_or_else(|| {
            Error::Usage(format!("override '{item}' is not of the form key=value"))
        })?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(())
}

/// Format a float with enough digits to round-trip exactly.
pub fn format_f64(v: f64) -> String {
    format!("{v:.17e}")
}
