//! Flat `key = value` config files. Flags override config values, config
//! values override built-in defaults.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};

#[derive(Debug, Default, Clone)]
pub struct ConfigMap {
    entries: BTreeMap<String, String>,
}

impl ConfigMap {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let mut entries = BTreeMap::new();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("cannot read config {}", path.display()))?;
            for (lineno, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let Some((key, value)) = line.split_once('=') else {
                    bail!(
                        "config {} line {}: expected 'key = value'",
                        path.display(),
                        lineno + 1
                    );
                };
                entries.insert(key.trim().to_string(), value.trim().to_string());
            }
        }
        Ok(ConfigMap { entries })
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn f64(&self, key: &str) -> Result<Option<f64>> {
        self.raw(key)
            .map(|v| v.parse::<f64>().with_context(|| format!("config key {key}: bad float {v:?}")))
            .transpose()
    }

    pub fn u64(&self, key: &str) -> Result<Option<u64>> {
        self.raw(key)
            .map(|v| {
                v.parse::<u64>()
                    .with_context(|| format!("config key {key}: bad integer {v:?}"))
            })
            .transpose()
    }

    pub fn usize(&self, key: &str) -> Result<Option<usize>> {
        self.raw(key)
            .map(|v| {
                v.parse::<usize>()
                    .with_context(|| format!("config key {key}: bad integer {v:?}"))
            })
            .transpose()
    }

    pub fn bool(&self, key: &str) -> Result<Option<bool>> {
        self.raw(key)
            .map(|v| {
                v.parse::<bool>()
                    .with_context(|| format!("config key {key}: bad bool {v:?}"))
            })
            .transpose()
    }

    pub fn string(&self, key: &str) -> Option<String> {
        self.raw(key).map(str::to_string)
    }
}

/// Flag, then config, then default.
pub fn resolve<T>(flag: Option<T>, config: Option<T>, default: T) -> T {
    flag.or(config).unwrap_or(default)
}
