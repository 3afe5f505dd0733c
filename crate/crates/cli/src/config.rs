//! Experiment configuration files.
//!
//! A config is a TOML document: `key = value` lines grouped under
//! `[section]` headers. Strings are quoted, lists use `[a, b, c]`.
//!
//! ```text
//! [model]
//! variant = "switching"
//! d = 1
//! rates = [0.0, 1.0, 1.0, 0.0]
//!
//! [field0]
//! matrix = [-1.0]
//! offset = [1.0]
//!
//! [simulate]
//! horizon = 50
//! ```
//!
//! Command-line flags always win over values read from a config.

use std::path::Path;

use toml::{Table, Value};

use crate::error::{CliError, Result};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Config {
    path: String,
    table: Table,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text, &path.display().to_string())
    }

    /// `origin` names the source in error messages.
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let table = text.parse::<Table>().map_err(|e| CliError::Config {
            path: origin.to_string(),
            source: Box::new(e),
        })?;
        Ok(Self {
            path: origin.to_string(),
            table,
        })
    }

    pub fn has_section(&self, section: &str) -> bool {
        matches!(self.table.get(section), Some(Value::Table(_)))
    }

    fn value(&self, section: &str, key: &str) -> Option<&Value> {
        self.table.get(section)?.as_table()?.get(key)
    }

    fn bad(&self, section: &str, key: &str, want: &str) -> CliError {
        CliError::data(format!("config {}: [{section}] {key} must be {want}", self.path))
    }

    pub fn f64(&self, section: &str, key: &str) -> Result<Option<f64>> {
        match self.value(section, key) {
            None => Ok(None),
            Some(v) => as_f64(v).map(Some).ok_or_else(|| self.bad(section, key, "a number")),
        }
    }

    pub fn u64(&self, section: &str, key: &str) -> Result<Option<u64>> {
        match self.value(section, key) {
            None => Ok(None),
            Some(Value::Integer(i)) if *i >= 0 => Ok(Some(*i as u64)),
            Some(_) => Err(self.bad(section, key, "a non-negative integer")),
        }
    }

    pub fn usize(&self, section: &str, key: &str) -> Result<Option<usize>> {
        Ok(self.u64(section, key)?.map(|v| v as usize))
    }

    pub fn string(&self, section: &str, key: &str) -> Result<Option<String>> {
        match self.value(section, key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.clone())),
            Some(_) => Err(self.bad(section, key, "a quoted string")),
        }
    }

    /// A number or a list of numbers.
    pub fn f64_list(&self, section: &str, key: &str) -> Result<Option<Vec<f64>>> {
        match self.value(section, key) {
            None => Ok(None),
            Some(Value::Array(items)) => items
                .iter()
                .map(as_f64)
                .collect::<Option<Vec<_>>>()
                .map(Some)
                .ok_or_else(|| self.bad(section, key, "a list of numbers")),
            Some(v) => as_f64(v).map(|x| Some(vec![x])).ok_or_else(|| self.bad(section, key, "a list of numbers")),
        }
    }
}

fn as_f64(v: &Value) -> Option<f64> {
    match v {
        Value::Float(f) => Some(*f),
        Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}

/// Settings lookup for one subcommand: flag, then `[section] key`, then default.
pub struct Settings<'a> {
    config: Option<&'a Config>,
    section: &'static str,
}

impl<'a> Settings<'a> {
    pub fn new(config: Option<&'a Config>, section: &'static str) -> Self {
        Self { config, section }
    }

    pub fn f64(&self, flag: Option<f64>, key: &str) -> Result<Option<f64>> {
        match (flag, self.config) {
            (Some(v), _) => Ok(Some(v)),
            (None, Some(c)) => c.f64(self.section, key),
            (None, None) => Ok(None),
        }
    }

    pub fn u64(&self, flag: Option<u64>, key: &str) -> Result<Option<u64>> {
        match (flag, self.config) {
            (Some(v), _) => Ok(Some(v)),
            (None, Some(c)) => c.u64(self.section, key),
            (None, None) => Ok(None),
        }
    }

    pub fn usize(&self, flag: Option<usize>, key: &str) -> Result<Option<usize>> {
        Ok(self.u64(flag.map(|v| v as u64), key)?.map(|v| v as usize))
    }

    pub fn string(&self, flag: Option<&str>, key: &str) -> Result<Option<String>> {
        match (flag, self.config) {
            (Some(v), _) => Ok(Some(v.to_string())),
            (None, Some(c)) => c.string(self.section, key),
            (None, None) => Ok(None),
        }
    }

    /// Flags arrive as comma-separated text.
    pub fn f64_list(&self, flag: Option<&str>, key: &str) -> Result<Option<Vec<f64>>> {
        match (flag, self.config) {
            (Some(v), _) => parse_list(v).map(Some),
            (None, Some(c)) => c.f64_list(self.section, key),
            (None, None) => Ok(None),
        }
    }
}

pub fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| CliError::usage(format!("'{p}' is not a number in '{s}'"))))
        .collect()
}
