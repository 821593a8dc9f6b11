//! Flat sectioned key-value scenario configs.
//!
//! Format: `[section]` headers, `key = value` lines, `#` comments.
//! Expression values are quoted; lists are comma-separated. Every key
//! remembers its line for error messages, and iteration order is fixed so
//! outputs are reproducible.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use nlds_core::expr::Expr;

#[derive(Debug, Clone)]
pub struct ConfigValue {
    pub raw: String,
    pub line: usize,
}

/// Parsed scenario configuration.
#[derive(Debug, Clone, Default)]
pub struct Config {
    pub path: String,
    sections: BTreeMap<String, BTreeMap<String, ConfigValue>>,
}

impl Config {
    pub fn from_file(path: impl AsRef<Path>) -> Result<Config> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        Config::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, path: &str) -> Result<Config> {
        let mut sections: BTreeMap<String, BTreeMap<String, ConfigValue>> = BTreeMap::new();
        let mut current: Option<String> = None;
        for (idx, raw_line) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = strip_comment(raw_line).trim().to_string();
            if line.is_empty() {
                continue;
            }
            if line.starts_with('[') {
                if !line.ends_with(']') || line.len() < 3 {
                    bail!("{path}:{lineno}: malformed section header `{line}`");
                }
                let name = line[1..line.len() - 1].trim().to_string();
                sections.entry(name.clone()).or_default();
                current = Some(name);
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!("{path}:{lineno}: expected `key = value`, got `{line}`");
            };
            let section = current
                .clone()
                .ok_or_else(|| anyhow!("{path}:{lineno}: key before any [section]"))?;
            let key = key.trim().to_string();
            let entry = sections.entry(section.clone()).or_default();
            if entry.contains_key(&key) {
                bail!("{path}:{lineno}: duplicate key `{section}.{key}`");
            }
            entry.insert(
                key,
                ConfigValue {
                    raw: value.trim().to_string(),
                    line: lineno,
                },
            );
        }
        Ok(Config {
            path: path.to_string(),
            sections,
        })
    }

    pub fn has(&self, section: &str, key: &str) -> bool {
        self.sections
            .get(section)
            .map(|s| s.contains_key(key))
            .unwrap_or(false)
    }

    pub fn sections(&self) -> impl Iterator<Item = &str> {
        self.sections.keys().map(|s| s.as_str())
    }

    /// Replaces (or inserts) a value; used by parameter sweeps.
    pub fn set(&mut self, section: &str, key: &str, value: String) {
        self.sections
            .entry(section.to_string())
            .or_default()
            .insert(key.to_string(), ConfigValue { raw: value, line: 0 });
    }

    fn value(&self, section: &str, key: &str) -> Result<&ConfigValue> {
        self.sections
            .get(section)
            .and_then(|s| s.get(key))
            .ok_or_else(|| anyhow!("{}: missing key `{section}.{key}`", self.path))
    }

    fn err_at(&self, v: &ConfigValue, section: &str, key: &str, msg: &str) -> anyhow::Error {
        anyhow!(
            "{}:{}: `{section}.{key}` {msg} (value `{}`)",
            self.path,
            v.line,
            v.raw
        )
    }

    pub fn get_str(&self, section: &str, key: &str) -> Result<String> {
        let v = self.value(section, key)?;
        Ok(unquote(&v.raw))
    }

    pub fn get_str_or(&self, section: &str, key: &str, default: &str) -> String {
        self.get_str(section, key).unwrap_or_else(|_| default.to_string())
    }

    pub fn get_f64(&self, section: &str, key: &str) -> Result<f64> {
        let v = self.value(section, key)?;
        unquote(&v.raw)
            .parse()
            .map_err(|_| self.err_at(v, section, key, "is not a number"))
    }

    pub fn get_f64_or(&self, section: &str, key: &str, default: f64) -> Result<f64> {
        if self.has(section, key) {
            self.get_f64(section, key)
        } else {
            Ok(default)
        }
    }

    pub fn get_usize(&self, section: &str, key: &str) -> Result<usize> {
        let v = self.value(section, key)?;
        unquote(&v.raw)
            .parse()
            .map_err(|_| self.err_at(v, section, key, "is not a nonnegative integer"))
    }

    pub fn get_usize_or(&self, section: &str, key: &str, default: usize) -> Result<usize> {
        if self.has(section, key) {
            self.get_usize(section, key)
        } else {
            Ok(default)
        }
    }

    /// Parses a (possibly quoted) coefficient expression.
    pub fn get_expr(&self, section: &str, key: &str) -> Result<Expr> {
        let v = self.value(section, key)?;
        Expr::parse(&unquote(&v.raw))
            .map_err(|e| self.err_at(v, section, key, &format!("does not parse: {e}")))
    }

    /// Comma-separated list of expressions (quotes stripped per item).
    pub fn get_expr_list(&self, section: &str, key: &str) -> Result<Vec<Expr>> {
        let v = self.value(section, key)?;
        split_list(&v.raw)
            .iter()
            .map(|item| {
                Expr::parse(&unquote(item))
                    .map_err(|e| self.err_at(v, section, key, &format!("item does not parse: {e}")))
            })
            .collect()
    }

    /// Canonical text rendering used for the reproducibility hash.
    pub fn canonical_text(&self) -> String {
        let mut out = String::new();
        for (section, keys) in &self.sections {
            let _ = writeln!(out, "[{section}]");
            for (key, value) in keys {
                let _ = writeln!(out, "{key} = {}", value.raw);
            }
        }
        out
    }

    /// Rejects keys that the scenario reader never consumed.
    pub fn check_consumed(&self, consumed: &[(String, String)]) -> Result<()> {
        for (section, keys) in &self.sections {
            for (key, value) in keys {
                let used = consumed
                    .iter()
                    .any(|(s, k)| s == section && k == key);
                if !used {
                    bail!(
                        "{}:{}: unknown key `{section}.{key}`",
                        self.path,
                        value.line
                    );
                }
            }
        }
        Ok(())
    }
}

fn strip_comment(line: &str) -> &str {
    let mut in_quotes = false;
    for (i, c) in line.char_indices() {
        match c {
            '"' => in_quotes = !in_quotes,
            '#' if !in_quotes => return &line[..i],
            _ => {}
        }
    }
    line
}

fn unquote(raw: &str) -> String {
    let t = raw.trim();
    if t.len() >= 2 && t.starts_with('"') && t.ends_with('"') {
        t[1..t.len() - 1].to_string()
    } else {
        t.to_string()
    }
}

/// Splits on top-level commas, respecting quotes.
fn split_list(raw: &str) -> Vec<String> {
    let mut items = Vec::new();
    let mut current = String::new();
    let mut in_quotes = false;
    for c in raw.chars() {
        match c {
            '"' => {
                in_quotes = !in_quotes;
                current.push(c);
            }
            ',' if !in_quotes => {
                items.push(current.trim().to_string());
                current.clear();
            }
            _ => current.push(c),
        }
    }
    if !current.trim().is_empty() {
        items.push(current.trim().to_string());
    }
    items
}
