//! Flat `key = value` configuration files.
//!
//! ```text
//! # comment
//! taus = 50, 500, 2000
//! ks = 10:500:10        # start:end:step, end inclusive
//! mechanisms = rr, laplace
//! clamp = true
//! ```
//!
//! Lists are comma separated. Integer lists also accept `start:end:step`
//! ranges. Keys may appear once.

use std::collections::BTreeMap;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct KvConfig {
    entries: BTreeMap<String, String>,
}

impl KvConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Format(format!("config line {}: expected key = value", n + 1)))?;
            let key = key.trim().to_string();
            if entries.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(Error::Format(format!("config line {}: duplicate key {key:?}", n + 1)));
            }
        }
        Ok(KvConfig { entries })
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Sets or replaces a key.
    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.entries.insert(key.to_string(), value.into());
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn reject_unknown(&self, known: &[&str]) -> Result<()> {
        match self.keys().find(|k| !known.contains(k)) {
            Some(k) => Err(Error::Format(format!("unknown config key {k:?}"))),
            None => Ok(()),
        }
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.entries
            .get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|_| Error::Format(format!("bad value for {key}: {v:?}")))
            })
            .transpose()
    }

    pub fn get_list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>> {
        let Some(v) = self.entries.get(key) else {
            return Ok(None);
        };
        let items = v
            .split(',')
            .map(str::trim)
            .map(|s| {
                s.parse::<T>()
                    .map_err(|_| Error::Format(format!("bad list element for {key}: {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if items.is_empty() {
            return Err(Error::Format(format!("{key} must not be empty")));
        }
        Ok(Some(items))
    }

    /// Integer list with `start:end:step` range support.
    pub fn get_int_list(&self, key: &str) -> Result<Option<Vec<u64>>> {
        let Some(v) = self.entries.get(key) else {
            return Ok(None);
        };
        let bad = |s: &str| Error::Format(format!("bad list element for {key}: {s:?}"));
        let mut out = Vec::new();
        for tok in v.split(',').map(str::trim) {
            let parts: Vec<&str> = tok.split(':').collect();
            match parts.as_slice() {
                [single] => out.push(single.parse().map_err(|_| bad(tok))?),
                [start, end] | [start, end, _] => {
                    let start: u64 = start.parse().map_err(|_| bad(tok))?;
                    let end: u64 = end.parse().map_err(|_| bad(tok))?;
                    let step: u64 = match parts.get(2) {
                        Some(s) => s.parse().map_err(|_| bad(tok))?,
                        None => 1,
                    };
                    if step == 0 || end < start {
                        return Err(bad(tok));
                    }
                    out.extend((start..=end).step_by(step as usize));
                }
                _ => return Err(bad(tok)),
            }
        }
        if out.is_empty() {
            return Err(Error::Format(format!("{key} must not be empty")));
        }
        Ok(Some(out))
    }
}
