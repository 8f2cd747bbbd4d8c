//! Flat `key = value` configuration with command-line overrides.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use super::CliError;

/// Every key accepted in a configuration file. Command-line flags use the same
/// names with `_` spelled `-`.
pub const KNOWN_KEYS: &[&str] = &[
    "seed",
    "format",
    "s",
    "photons",
    "alpha",
    "g",
    "g_mode",
    "g_schedule",
    "bit",
    "loss",
    "split",
    "breach_rule",
    "beta",
    "a1",
    "a2",
    "a3",
    "replace",
    "tomography",
    "p_min",
    "trials",
    "sweep",
    "sweep_values",
    "random_bit",
    "alphas",
    "betas",
    "alpha_min",
    "alpha_max",
    "steps",
    "kind",
    "p",
    "n",
];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut settings = Settings::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            settings.set(key.trim(), value.trim())?;
        }
        Ok(settings)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<(), CliError> {
        let key = key.replace('-', "_");
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(CliError::Config(format!("unknown key `{key}`")));
        }
        self.values.insert(key, value.into());
        Ok(())
    }

    /// Applies `(key, value)` pairs whose value is present.
    pub fn overlay<'a>(
        &mut self,
        pairs: impl IntoIterator<Item = (&'a str, Option<&'a String>)>,
    ) -> Result<(), CliError> {
        for (key, value) in pairs {
            if let Some(v) = value {
                self.set(key, v.clone())?;
            }
        }
        Ok(())
    }

    pub fn contains(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        self.raw(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|_| CliError::Config(format!("invalid value `{v}` for `{key}`")))
            })
            .transpose()
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T, CliError> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn get_bool(&self, key: &str, default: bool) -> Result<bool, CliError> {
        match self.raw(key) {
            None => Ok(default),
            Some("1" | "true" | "yes" | "on") => Ok(true),
            Some("0" | "false" | "no" | "off") => Ok(false),
            Some(v) => Err(CliError::Config(format!(
                "invalid boolean `{v}` for `{key}`"
            ))),
        }
    }

    pub fn get_list(&self, key: &str) -> Result<Option<Vec<f64>>, CliError> {
        self.raw(key)
            .map(|v| {
                v.split(',')
                    .map(|x| {
                        x.trim().parse::<f64>().map_err(|_| {
                            CliError::Config(format!("invalid number `{x}` in `{key}`"))
                        })
                    })
                    .collect()
            })
            .transpose()
    }
}
