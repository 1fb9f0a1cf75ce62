//! Line-oriented `key = value` text used by model files and experiment configs.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub line: usize,
}

/// Parse `key = value` lines. Blank lines and `#` comments are skipped;
/// duplicate keys are rejected.
pub fn parse(text: &str) -> Result<Vec<Entry>> {
    let mut out: Vec<Entry> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (key, value) = body.split_once('=').ok_or_else(|| Error::Parse {
            line,
            message: format!("expected `key = value`, got {body:?}"),
        })?;
        let key = key.trim().to_string();
        if key.is_empty() {
            return Err(Error::Parse {
                line,
                message: "empty key".into(),
            });
        }
        if out.iter().any(|e| e.key == key) {
            return Err(Error::Parse {
                line,
                message: format!("duplicate key {key:?}"),
            });
        }
        out.push(Entry {
            key,
            value: value.trim().to_string(),
            line,
        });
    }
    Ok(out)
}

pub fn find<'a>(entries: &'a [Entry], key: &str) -> Option<&'a Entry> {
    entries.iter().find(|e| e.key == key)
}

pub fn require<'a>(entries: &'a [Entry], key: &str) -> Result<&'a Entry> {
    find(entries, key).ok_or_else(|| Error::Parse {
        line: 0,
        message: format!("missing key {key:?}"),
    })
}

impl Entry {
    pub fn parse_as<T: std::str::FromStr>(&self) -> Result<T> {
        self.value.parse().map_err(|_| Error::Parse {
            line: self.line,
            message: format!("bad value for {}: {:?}", self.key, self.value),
        })
    }

    /// Whitespace- or comma-separated list.
    pub fn parse_list<T: std::str::FromStr>(&self) -> Result<Vec<T>> {
        self.value
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse().map_err(|_| Error::Parse {
                    line: self.line,
                    message: format!("bad list item for {}: {s:?}", self.key),
                })
            })
            .collect()
    }
}

/// Format a float list with round-trip precision.
pub fn join_floats(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| format!("{v:?}"))
        .collect::<Vec<_>>()
        .join(" ")
}
