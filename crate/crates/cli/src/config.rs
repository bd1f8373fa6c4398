//! Flat `key = value` configuration files.
//!
//! Blank lines and lines starting with `#` are ignored. Keys use the long
//! flag names of `simulate` (`dt`, `tmax`, `mode`, ...); command-line flags
//! take precedence over the file.

use std::collections::BTreeMap;
use std::path::Path;

use rolldisc_core::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    entries: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::InvalidArgument(format!("config line {}: expected key = value", n + 1))
            })?;
            let key = key.trim().replace('_', "-");
            if key.is_empty() {
                return Err(Error::InvalidArgument(format!("config line {}: empty key", n + 1)));
            }
            entries.insert(key, value.trim().to_string());
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::InvalidArgument(format!("cannot read config {}: {e}", path.display()))
        })?;
        Self::parse(&text)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    /// Parses `key` if present.
    pub fn value<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse().map(Some).map_err(|_| {
                Error::InvalidArgument(format!("config key '{key}': cannot parse '{raw}'"))
            }),
        }
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_underscores() {
        let c = ConfigFile::parse("# run\nmode = roll\n\nrecord_stride=50\n dt = 1e-4 ").unwrap();
        assert_eq!(c.get("mode"), Some("roll"));
        assert_eq!(c.value::<u64>("record-stride").unwrap(), Some(50));
        assert_eq!(c.value::<f64>("dt").unwrap(), Some(1e-4));
        assert_eq!(c.value::<f64>("seed").unwrap(), None);
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(ConfigFile::parse("mode roll").is_err());
        assert!(ConfigFile::parse("= 3").is_err());
        let c = ConfigFile::parse("dt = fast").unwrap();
        assert!(c.value::<f64>("dt").is_err());
    }
}
