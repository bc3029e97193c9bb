//! Line-oriented `key=value` text used by every file the crate reads or writes.

use std::str::FromStr;

use num_bigint::BigUint;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Entry {
    pub line: usize,
    pub key: String,
    pub value: String,
}

#[derive(Clone, Debug, Default)]
pub struct Document {
    pub entries: Vec<Entry>,
    /// Non-empty lines without a `key=value` shape (scripted hash rows).
    pub bare: Vec<(usize, String)>,
}

impl Document {
    pub fn parse(text: &str) -> Document {
        let mut doc = Document::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let lineno = idx + 1;
            match line.split_once('=') {
                Some((k, v)) if !k.contains(',') && !k.contains("->") => doc.entries.push(Entry {
                    line: lineno,
                    key: k.trim().to_string(),
                    value: v.trim().to_string(),
                }),
                _ => doc.bare.push((lineno, line.to_string())),
            }
        }
        doc
    }

    pub fn get(&self, key: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.key == key)
    }

    pub fn all<'a>(&'a self, key: &'a str) -> impl Iterator<Item = &'a Entry> + 'a {
        self.entries.iter().filter(move |e| e.key == key)
    }

    pub fn require(&self, key: &str) -> Result<&Entry> {
        self.get(key).ok_or_else(|| Error::Parse {
            line: 0,
            msg: format!("missing key `{key}`"),
        })
    }

    pub fn uint(&self, key: &str) -> Result<BigUint> {
        let e = self.require(key)?;
        parse_uint(e.line, &e.value)
    }

    pub fn opt_uint(&self, key: &str) -> Result<Option<BigUint>> {
        self.get(key).map(|e| parse_uint(e.line, &e.value)).transpose()
    }

    pub fn number<T: FromStr>(&self, key: &str) -> Result<T> {
        let e = self.require(key)?;
        e.value.parse().map_err(|_| Error::Parse {
            line: e.line,
            msg: format!("`{}` is not a valid {key}", e.value),
        })
    }

    pub fn hex(&self, key: &str) -> Result<Vec<u8>> {
        let e = self.require(key)?;
        parse_hex(e.line, &e.value)
    }
}

pub fn parse_uint(line: usize, s: &str) -> Result<BigUint> {
    BigUint::from_str(s.trim()).map_err(|_| Error::Parse {
        line,
        msg: format!("`{s}` is not a non-negative decimal integer"),
    })
}

pub fn parse_hex(line: usize, s: &str) -> Result<Vec<u8>> {
    hex::decode(s.trim()).map_err(|_| Error::Parse {
        line,
        msg: format!("`{s}` is not valid hex"),
    })
}

pub fn parse_uint_list(line: usize, s: &str) -> Result<Vec<BigUint>> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(|v| parse_uint(line, v)).collect()
}
