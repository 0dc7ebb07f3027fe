//! Parameter resolution: command-line flag, then config file, then built-in default.
//! Every resolved value is recorded for the run manifest.

use std::collections::BTreeMap;

use ndelab::models::parse_real;
use serde_json::{json, Value};

use crate::CliError;

#[derive(Debug, Default)]
pub struct Params {
    config: BTreeMap<String, String>,
    pub resolved: BTreeMap<String, Value>,
}

impl Params {
    pub fn new(config: BTreeMap<String, String>) -> Self {
        Self { config, resolved: BTreeMap::new() }
    }

    fn raw(&self, key: &str, cli: &Option<String>) -> Option<String> {
        cli.clone().or_else(|| self.config.get(key).cloned())
    }

    /// Real number or exact fraction `p/q`.
    pub fn real(&mut self, key: &'static str, cli: &Option<String>, default: f64) -> Result<f64, CliError> {
        let value = match self.raw(key, cli) {
            Some(raw) => parse_real(key, &raw).map_err(|e| CliError::Usage(e.to_string()))?,
            None => default,
        };
        if !value.is_finite() {
            return Err(CliError::Usage(format!("{key} must be finite")));
        }
        self.resolved.insert(key.into(), json!(value));
        Ok(value)
    }

    pub fn positive(&mut self, key: &'static str, cli: &Option<String>, default: f64) -> Result<f64, CliError> {
        let v = self.real(key, cli, default)?;
        if v > 0.0 {
            Ok(v)
        } else {
            Err(CliError::Usage(format!("{key} must be positive, got {v}")))
        }
    }

    pub fn count(&mut self, key: &'static str, cli: &Option<String>, default: usize) -> Result<usize, CliError> {
        let value = match self.raw(key, cli) {
            Some(raw) => raw.trim().parse().map_err(|_| CliError::Usage(format!("{key}: not a count: {raw}")))?,
            None => default,
        };
        self.resolved.insert(key.into(), json!(value));
        Ok(value)
    }

    pub fn text(&mut self, key: &'static str, cli: &Option<String>, default: &str) -> String {
        let value = self.raw(key, cli).unwrap_or_else(|| default.to_string());
        self.resolved.insert(key.into(), json!(value));
        value
    }

    /// Comma-separated reals; fractions allowed.
    pub fn list(&mut self, key: &'static str, cli: &Option<String>, default: &[f64]) -> Result<Vec<f64>, CliError> {
        let value = match self.raw(key, cli) {
            Some(raw) => parse_list(key, &raw)?,
            None => default.to_vec(),
        };
        self.resolved.insert(key.into(), json!(value));
        Ok(value)
    }

    /// Records a value that is not a tunable (e.g. a fixed choice implied by the model).
    pub fn note(&mut self, key: &str, value: Value) {
        self.resolved.insert(key.into(), value);
    }
}

pub fn parse_list(key: &'static str, raw: &str) -> Result<Vec<f64>, CliError> {
    raw.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_real(key, s).map_err(|e| CliError::Usage(e.to_string())))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flag_beats_config_beats_default() {
        let config: BTreeMap<String, String> = [("tol".to_string(), "1e-6".to_string())].into();
        let mut p = Params::new(config);
        assert_eq!(p.real("tol", &None, 1e-4).unwrap(), 1e-6);
        assert_eq!(p.real("tol", &Some("1e-8".into()), 1e-4).unwrap(), 1e-8);
        assert_eq!(p.real("nu", &None, 1e-4).unwrap(), 1e-4);
        assert_eq!(p.resolved["nu"], json!(1e-4));
    }

    #[test]
    fn fractions_are_exact() {
        let mut p = Params::default();
        assert_eq!(p.real("alpha", &Some("1/9".into()), 0.0).unwrap(), 1.0 / 9.0);
        assert_eq!(parse_list("times", "1e-1, 1/100").unwrap(), vec![0.1, 0.01]);
        assert!(p.real("alpha", &Some("1/0".into()), 0.0).is_err());
        assert!(p.count("grid", &Some("-3".into()), 1).is_err());
    }
}
