//! `key=value` run files. Blank lines and lines starting with `#` are
//! ignored; a key may repeat (`input=` lists the input masks in order), and
//! for single-valued keys the last occurrence wins.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::AppError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConfigFile {
    pub path: PathBuf,
    pub entries: Vec<Entry>,
}

impl ConfigFile {
    pub fn parse(path: &Path, text: &str) -> Result<Self, AppError> {
        let mut entries = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(AppError::Config {
                    path: path.to_path_buf(),
                    line: i + 1,
                    message: format!("expected key=value, got {line:?}"),
                });
            };
            entries.push(Entry {
                key: k.trim().to_string(),
                value: v.trim().to_string(),
                line: i + 1,
            });
        }
        Ok(Self {
            path: path.to_path_buf(),
            entries,
        })
    }

    pub fn load(path: &Path) -> Result<Self, AppError> {
        let text = std::fs::read_to_string(path).map_err(|source| AppError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(path, &text)
    }

    /// Errors on the first key not in `allowed`.
    pub fn check_keys(&self, allowed: &[&str]) -> Result<(), AppError> {
        match self.entries.iter().find(|e| !allowed.contains(&e.key.as_str())) {
            Some(e) => Err(self.error(e, format!("unknown key {:?}", e.key))),
            None => Ok(()),
        }
    }

    fn error(&self, e: &Entry, message: String) -> AppError {
        AppError::Config {
            path: self.path.clone(),
            line: e.line,
            message,
        }
    }

    fn last(&self, key: &str) -> Option<&Entry> {
        self.entries.iter().rev().find(|e| e.key == key)
    }

    pub fn get_str(&self, key: &str) -> Option<&str> {
        self.last(key).map(|e| e.value.as_str())
    }

    pub fn get_all(&self, key: &str) -> Vec<&str> {
        self.entries.iter().filter(|e| e.key == key).map(|e| e.value.as_str()).collect()
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, AppError>
    where
        T::Err: std::fmt::Display,
    {
        match self.last(key) {
            None => Ok(None),
            Some(e) => e
                .value
                .parse()
                .map(Some)
                .map_err(|err| self.error(e, format!("bad value for {key}: {err}"))),
        }
    }
}

/// Flag value if given, else config value, else default.
pub fn pick<T>(flag: Option<T>, config: Option<T>, default: T) -> T {
    flag.or(config).unwrap_or(default)
}
