//! Flat key=value run configuration: `[section]` blocks per
//! subcommand, `#` comment lines, typed accessors, and rejection of
//! unknown or ill-typed keys with their line numbers.

use crate::params::SpinError;
use std::cell::Cell;
use std::collections::HashMap;
use std::path::Path;

pub const SECTIONS: [&str; 8] = [
    "oat",
    "tat",
    "qkr",
    "lyap-map",
    "poincare",
    "breaktime-scan",
    "qpt",
    "depth",
];

struct Entry {
    value: String,
    line: usize,
    used: Cell<bool>,
}

pub struct RunConfig {
    entries: HashMap<String, Entry>,
    text: String,
}

fn err(msg: String) -> SpinError {
    SpinError::Config(msg)
}

impl RunConfig {
    pub fn empty() -> Self {
        Self {
            entries: HashMap::new(),
            text: String::new(),
        }
    }

    pub fn parse(text: &str) -> Result<Self, SpinError> {
        let mut entries: HashMap<String, Entry> = HashMap::new();
        let mut section = String::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let s = raw.trim();
            if s.is_empty() || s.starts_with('#') {
                continue;
            }
            if let Some(name) = s.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
                let name = name.trim();
                if !SECTIONS.contains(&name) {
                    return Err(err(format!("unknown section [{name}] at line {line}")));
                }
                section = name.to_string();
                continue;
            }
            let Some((key, value)) = s.split_once('=') else {
                return Err(err(format!("expected key = value at line {line}: {s}")));
            };
            let key = key.trim();
            if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Err(err(format!("bad key '{key}' at line {line}")));
            }
            let full = if section.is_empty() {
                key.to_string()
            } else {
                format!("{section}.{key}")
            };
            if let Some(prev) = entries.get(&full) {
                return Err(err(format!(
                    "duplicate key '{full}' at line {line} (first at line {})",
                    prev.line
                )));
            }
            entries.insert(
                full,
                Entry {
                    value: value.trim().to_string(),
                    line,
                    used: Cell::new(false),
                },
            );
        }
        Ok(Self {
            entries,
            text: text.to_string(),
        })
    }

    pub fn from_file(path: &Path) -> Result<Self, SpinError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| err(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// The raw text, for manifest hashing.
    pub fn text(&self) -> &str {
        &self.text
    }

    fn lookup(&self, section: &str, key: &str) -> Option<&Entry> {
        let full = format!("{section}.{key}");
        let e = self.entries.get(&full).or_else(|| self.entries.get(key))?;
        e.used.set(true);
        Some(e)
    }

    pub fn str_opt(&self, section: &str, key: &str) -> Option<String> {
        self.lookup(section, key).map(|e| e.value.clone())
    }

    pub fn f64_opt(&self, section: &str, key: &str) -> Result<Option<f64>, SpinError> {
        match self.lookup(section, key) {
            None => Ok(None),
            Some(e) => parse_f64(&e.value)
                .map(Some)
                .map_err(|m| err(format!("key '{key}' at line {}: {m}", e.line))),
        }
    }

    pub fn usize_opt(&self, section: &str, key: &str) -> Result<Option<usize>, SpinError> {
        match self.lookup(section, key) {
            None => Ok(None),
            Some(e) => e
                .value
                .parse::<usize>()
                .map(Some)
                .map_err(|_| err(format!(
                    "key '{key}' at line {}: expected integer, got '{}'",
                    e.line, e.value
                ))),
        }
    }

    pub fn bool_opt(&self, section: &str, key: &str) -> Result<Option<bool>, SpinError> {
        match self.lookup(section, key) {
            None => Ok(None),
            Some(e) => match e.value.as_str() {
                "true" | "1" | "yes" => Ok(Some(true)),
                "false" | "0" | "no" => Ok(Some(false)),
                other => Err(err(format!(
                    "key '{key}' at line {}: expected boolean, got '{other}'",
                    e.line
                ))),
            },
        }
    }

    pub fn usize_list_opt(
        &self,
        section: &str,
        key: &str,
    ) -> Result<Option<Vec<usize>>, SpinError> {
        match self.lookup(section, key) {
            None => Ok(None),
            Some(e) => {
                let mut out = Vec::new();
                for part in e.value.split(',') {
                    out.push(part.trim().parse::<usize>().map_err(|_| {
                        err(format!(
                            "key '{key}' at line {}: expected integer list, got '{}'",
                            e.line, e.value
                        ))
                    })?);
                }
                if out.is_empty() {
                    return Err(err(format!("key '{key}' at line {}: empty list", e.line)));
                }
                Ok(Some(out))
            }
        }
    }

    /// Every key must have been read by the active subcommand; a key
    /// nobody consumed is a typo or a conflicting option.
    pub fn finish(&self) -> Result<(), SpinError> {
        let mut unused: Vec<(&String, usize)> = self
            .entries
            .iter()
            .filter(|(_, e)| !e.used.get())
            .map(|(k, e)| (k, e.line))
            .collect();
        unused.sort_by_key(|&(_, line)| line);
        if let Some((key, line)) = unused.first() {
            return Err(err(format!("unknown key '{key}' at line {line}")));
        }
        Ok(())
    }

    /// Marks every key of an inactive section as consumed, so a single
    /// file can hold recipes for several subcommands.
    pub fn allow_section(&self, section: &str) {
        let prefix = format!("{section}.");
        for (k, e) in &self.entries {
            if k.starts_with(&prefix) {
                e.used.set(true);
            }
        }
    }
}

/// Accepts plain floats plus `pi`-scaled forms like `0.4pi`.
fn parse_f64(s: &str) -> Result<f64, String> {
    let t = s.trim();
    if let Some(head) = t.strip_suffix("pi") {
        let head = head.trim();
        let scale = if head.is_empty() {
            1.0
        } else {
            head.parse::<f64>()
                .map_err(|_| format!("expected number, got '{s}'"))?
        };
        return Ok(scale * std::f64::consts::PI);
    }
    t.parse::<f64>()
        .map_err(|_| format!("expected number, got '{s}'"))
}
