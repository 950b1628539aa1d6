//! Flat key-value experiment configuration: `section.key = value` lines,
//! `#` comments, one file per run. Keys are consumed by typed accessors;
//! anything left unconsumed after a suite resolves its parameters is
//! reported as an unknown key so typos fail loudly instead of silently
//! falling back to defaults.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

/// A parsed configuration and the record of which keys were read.
#[derive(Debug)]
pub struct Config {
    entries: BTreeMap<String, String>,
    consumed: RefCell<BTreeSet<String>>,
    /// Directory of the config file; file-valued keys resolve against it.
    base_dir: PathBuf,
}

/// Errors produced while reading or interpreting a configuration. These map
/// to exit code 2: the run never starts.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "configuration error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

pub type ConfigResult<T> = std::result::Result<T, ConfigError>;

/// Shorthand used across the suites for validation failures.
pub fn err_cfg<T>(msg: impl Into<String>) -> ConfigResult<T> {
    Err(ConfigError(msg.into()))
}

fn err<T>(msg: impl Into<String>) -> ConfigResult<T> {
    err_cfg(msg)
}

impl Config {
    pub fn from_file(path: &Path) -> ConfigResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        let base_dir = path
            .parent()
            .map(|p| p.to_path_buf())
            .unwrap_or_else(|| PathBuf::from("."));
        Self::from_str_with_base(&text, base_dir)
    }

    pub fn from_str_with_base(text: &str, base_dir: PathBuf) -> ConfigResult<Self> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return err(format!("line {}: expected `key = value`, got `{line}`", lineno + 1));
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if key.is_empty() {
                return err(format!("line {}: empty key", lineno + 1));
            }
            if !key
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '.' || c == '_' || c == '-')
            {
                return err(format!("line {}: invalid key `{key}`", lineno + 1));
            }
            if entries.insert(key.clone(), value).is_some() {
                return err(format!("line {}: duplicate key `{key}`", lineno + 1));
            }
        }
        Ok(Self { entries, consumed: RefCell::new(BTreeSet::new()), base_dir })
    }

    /// Overrides (or inserts) a key before any accessor runs; used for the
    /// `--seed` command-line override.
    pub fn override_key(&mut self, key: &str, value: String) {
        self.entries.insert(key.to_string(), value);
    }

    fn raw(&self, key: &str) -> Option<&str> {
        let v = self.entries.get(key)?;
        self.consumed.borrow_mut().insert(key.to_string());
        Some(v.as_str())
    }

    pub fn has(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn require_str(&self, key: &str) -> ConfigResult<&str> {
        match self.raw(key) {
            Some(v) => Ok(v),
            None => err(format!("missing required key `{key}`")),
        }
    }

    pub fn opt_str(&self, key: &str) -> Option<&str> {
        self.raw(key)
    }

    pub fn require_f64(&self, key: &str) -> ConfigResult<f64> {
        parse_f64(key, self.require_str(key)?)
    }

    pub fn opt_f64(&self, key: &str) -> ConfigResult<Option<f64>> {
        self.raw(key).map(|v| parse_f64(key, v)).transpose()
    }

    pub fn f64_or(&self, key: &str, default: f64) -> ConfigResult<f64> {
        Ok(self.opt_f64(key)?.unwrap_or(default))
    }

    pub fn require_usize(&self, key: &str) -> ConfigResult<usize> {
        let v = self.require_str(key)?;
        v.parse()
            .map_err(|e| ConfigError(format!("key `{key}`: expected integer, got `{v}` ({e})")))
    }

    pub fn usize_or(&self, key: &str, default: usize) -> ConfigResult<usize> {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|e| {
                ConfigError(format!("key `{key}`: expected integer, got `{v}` ({e})"))
            }),
        }
    }

    pub fn u64_or(&self, key: &str, default: u64) -> ConfigResult<u64> {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|e| {
                ConfigError(format!("key `{key}`: expected integer, got `{v}` ({e})"))
            }),
        }
    }

    pub fn bool_or(&self, key: &str, default: bool) -> ConfigResult<bool> {
        match self.raw(key) {
            None => Ok(default),
            Some("true") => Ok(true),
            Some("false") => Ok(false),
            Some(v) => err(format!("key `{key}`: expected true/false, got `{v}`")),
        }
    }

    /// Comma-separated list of reals.
    pub fn require_f64_list(&self, key: &str) -> ConfigResult<Vec<f64>> {
        let v = self.require_str(key)?;
        v.split(',')
            .map(|tok| parse_f64(key, tok.trim()))
            .collect()
    }

    pub fn opt_f64_list(&self, key: &str) -> ConfigResult<Option<Vec<f64>>> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v
                .split(',')
                .map(|tok| parse_f64(key, tok.trim()))
                .collect::<ConfigResult<Vec<f64>>>()
                .map(Some),
        }
    }

    /// Comma-separated list of signed integers (mode vectors).
    pub fn require_i64_list(&self, key: &str) -> ConfigResult<Vec<i64>> {
        let v = self.require_str(key)?;
        v.split(',')
            .map(|tok| {
                tok.trim().parse().map_err(|e| {
                    ConfigError(format!("key `{key}`: expected integer, got `{tok}` ({e})"))
                })
            })
            .collect()
    }

    /// File-valued key, resolved relative to the config file location.
    pub fn opt_path(&self, key: &str) -> Option<PathBuf> {
        self.raw(key).map(|v| self.base_dir.join(v))
    }

    /// Every key that was never consumed by an accessor. Call after the
    /// suite has resolved all of its parameters.
    pub fn unconsumed(&self) -> Vec<String> {
        let consumed = self.consumed.borrow();
        self.entries
            .keys()
            .filter(|k| !consumed.contains(*k))
            .cloned()
            .collect()
    }

    pub fn reject_unconsumed(&self) -> ConfigResult<()> {
        let leftover = self.unconsumed();
        if leftover.is_empty() {
            Ok(())
        } else {
            err(format!("unknown keys: {}", leftover.join(", ")))
        }
    }

}

fn parse_f64(key: &str, v: &str) -> ConfigResult<f64> {
    v.parse::<f64>()
        .map_err(|e| ConfigError(format!("key `{key}`: expected real number, got `{v}` ({e})")))
        .and_then(|x| {
            if x.is_finite() {
                Ok(x)
            } else {
                err(format!("key `{key}`: value must be finite, got `{v}`"))
            }
        })
}

/// Content hash of the canonical snapshot: the run-directory name.
pub fn snapshot_hash(snapshot: &BTreeMap<String, String>) -> String {
    let mut text = String::new();
    for (k, v) in snapshot {
        let _ = writeln!(text, "{k} = {v}");
    }
    let digest = Sha256::digest(text.as_bytes());
    let mut hex = String::with_capacity(16);
    for byte in digest.iter().take(8) {
        let _ = write!(hex, "{byte:02x}");
    }
    hex
}

/// Digest of a referenced data file, recorded in the snapshot.
pub fn file_digest(path: &Path) -> ConfigResult<String> {
    let bytes = std::fs::read(path)
        .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
    let digest = Sha256::digest(&bytes);
    let mut hex = String::with_capacity(64);
    for byte in digest {
        let _ = write!(hex, "{byte:02x}");
    }
    Ok(hex)
}
