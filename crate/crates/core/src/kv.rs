//! Flat `key = value` text format shared by config, synthetic specs and reports.
//!
//! Blank lines and lines starting with `#` are ignored. Whitespace around keys
//! and values is trimmed.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct KvError {
    pub line: usize,
    pub message: String,
}

impl KvError {
    pub fn new(line: usize, message: impl Into<String>) -> Self {
        Self {
            line,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry<'a> {
    pub line: usize,
    pub key: &'a str,
    pub value: &'a str,
}

impl Entry<'_> {
    pub fn parse<T: std::str::FromStr>(&self) -> Result<T, KvError> {
        self.value.parse().map_err(|_| {
            KvError::new(
                self.line,
                format!("invalid value {:?} for {}", self.value, self.key),
            )
        })
    }

    pub fn error(&self, message: impl Into<String>) -> KvError {
        KvError::new(self.line, message)
    }
}

pub fn parse(text: &str) -> Result<Vec<Entry<'_>>, KvError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| KvError::new(i + 1, format!("expected `key = value`, got {line:?}")))?;
        let key = key.trim();
        if key.is_empty() {
            return Err(KvError::new(i + 1, "empty key"));
        }
        out.push(Entry {
            line: i + 1,
            key,
            value: value.trim(),
        });
    }
    Ok(out)
}
