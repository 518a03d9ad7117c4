//! Flat `key = value` configuration files: SI units, `#` comments.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};

/// Parsed key-value pairs, keeping the line each key came from.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KeyValues {
    entries: BTreeMap<String, (String, usize)>,
}

impl KeyValues {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                what: "config",
                line: line_no,
                reason: format!("expected `key = value`, got `{line}`"),
            })?;
            let key = key.trim();
            let value = value.trim();
            if key.is_empty() || value.is_empty() {
                return Err(Error::Parse {
                    what: "config",
                    line: line_no,
                    reason: "empty key or value".into(),
                });
            }
            if entries
                .insert(key.to_owned(), (value.to_owned(), line_no))
                .is_some()
            {
                return Err(Error::Parse {
                    what: "config",
                    line: line_no,
                    reason: format!("duplicate key `{key}`"),
                });
            }
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// Inserts or replaces a value, e.g. a command-line override.
    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.entries.insert(key.to_owned(), (value.into(), 0));
    }

    pub fn remove(&mut self, key: &str) -> Option<String> {
        self.entries.remove(key).map(|(v, _)| v)
    }

    pub fn get_raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(v, _)| v.as_str())
    }

    pub fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some((v, line)) => v.parse().map(Some).map_err(|_| Error::Parse {
                what: "config",
                line: *line,
                reason: format!("cannot parse `{v}` for `{key}`"),
            }),
        }
    }

    /// Fails on the first key not in `known`.
    pub fn reject_unknown(&self, known: &[&str]) -> Result<()> {
        for (key, (_, line)) in &self.entries {
            if !known.contains(&key.as_str()) {
                return Err(Error::Parse {
                    what: "config",
                    line: *line,
                    reason: format!("unknown key `{key}`"),
                });
            }
        }
        Ok(())
    }
}

/// Renders pairs as `key = value` lines with round-trip float formatting.
pub fn render(pairs: &[(&str, String)]) -> String {
    let mut out = String::new();
    for (k, v) in pairs {
        out.push_str(k);
        out.push_str(" = ");
        out.push_str(v);
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_values() {
        let kv = KeyValues::parse("# header\npair_rate = 612.5  # trailing\n\nseed=7\n").unwrap();
        assert_eq!(kv.get::<f64>("pair_rate").unwrap(), Some(612.5));
        assert_eq!(kv.get::<u64>("seed").unwrap(), Some(7));
        assert_eq!(kv.get::<u64>("missing").unwrap(), None);
    }

    #[test]
    fn rejects_garbage() {
        assert!(KeyValues::parse("no equals sign").is_err());
        assert!(KeyValues::parse("a = 1\na = 2").is_err());
        let kv = KeyValues::parse("seed = -3").unwrap();
        assert!(kv.get::<u64>("seed").is_err());
        let kv = KeyValues::parse("bogus = 1").unwrap();
        let err = kv.reject_unknown(&["seed"]).unwrap_err().to_string();
        assert!(err.contains("unknown key `bogus`"), "{err}");
    }
}
