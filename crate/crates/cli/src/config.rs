//! Flat sectioned `key = value` config files for batch runs.
//!
//! The format is deliberately diff-friendly: `[section]` headers, one
//! `key = value` per line, `#` comments. Lists use commas. Gamma values
//! accept an `eN` shorthand for `exp(N)`.

use std::collections::BTreeMap;

use crate::CliError;

#[derive(Debug, Default, Clone)]
pub struct ConfigFile {
    sections: BTreeMap<String, BTreeMap<String, String>>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut sections: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
        let mut current = String::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if line.starts_with('[') {
                if !line.ends_with(']') {
                    return Err(CliError::config(format!(
                        "line {}: malformed section header `{raw}`",
                        lineno + 1
                    )));
                }
                current = line[1..line.len() - 1].trim().to_string();
                sections.entry(current.clone()).or_default();
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::config(format!(
                    "line {}: expected `key = value`, got `{raw}`",
                    lineno + 1
                )));
            };
            if current.is_empty() {
                return Err(CliError::config(format!(
                    "line {}: `{raw}` appears before any [section]",
                    lineno + 1
                )));
            }
            sections
                .get_mut(&current)
                .unwrap()
                .insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(ConfigFile { sections })
    }

    pub fn has_section(&self, section: &str) -> bool {
        self.sections.contains_key(section)
    }

    fn raw(&self, section: &str, key: &str) -> Option<&str> {
        self.sections.get(section)?.get(key).map(|s| s.as_str())
    }

    pub fn get(&self, section: &str, key: &str) -> Result<&str, CliError> {
        self.raw(section, key)
            .ok_or_else(|| CliError::config(format!("missing `{key}` in section [{section}]")))
    }

    pub fn get_or<'a>(&'a self, section: &str, key: &str, default: &'a str) -> &'a str {
        self.raw(section, key).unwrap_or(default)
    }

    pub fn get_f64_or(&self, section: &str, key: &str, default: f64) -> Result<f64, CliError> {
        match self.raw(section, key) {
            None => Ok(default),
            Some(v) => parse_f64(v)
                .ok_or_else(|| CliError::config(format!("[{section}] {key}: not a number"))),
        }
    }

    pub fn get_u64(&self, section: &str, key: &str) -> Result<u64, CliError> {
        self.get(section, key)?
            .parse()
            .map_err(|_| CliError::config(format!("[{section}] {key}: not an integer")))
    }

    pub fn get_u64_or(&self, section: &str, key: &str, default: u64) -> Result<u64, CliError> {
        match self.raw(section, key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| CliError::config(format!("[{section}] {key}: not an integer"))),
        }
    }

    pub fn get_usize(&self, section: &str, key: &str) -> Result<usize, CliError> {
        self.get(section, key)?
            .parse()
            .map_err(|_| CliError::config(format!("[{section}] {key}: not an integer")))
    }

    pub fn get_bool_or(&self, section: &str, key: &str, default: bool) -> Result<bool, CliError> {
        match self.raw(section, key) {
            None => Ok(default),
            Some("true") | Some("yes") | Some("1") => Ok(true),
            Some("false") | Some("no") | Some("0") => Ok(false),
            Some(other) => Err(CliError::config(format!(
                "[{section}] {key}: expected true/false, got `{other}`"
            ))),
        }
    }

    /// Comma-separated list of u64.
    pub fn get_u64_list(&self, section: &str, key: &str) -> Result<Vec<u64>, CliError> {
        let raw = self.get(section, key)?;
        if raw.is_empty() {
            return Ok(Vec::new());
        }
        raw.split(',')
            .map(|tok| {
                tok.trim().parse().map_err(|_| {
                    CliError::config(format!("[{section}] {key}: `{tok}` is not an integer"))
                })
            })
            .collect()
    }

    /// Comma-separated list of numbers, each plain or `eN` shorthand.
    pub fn get_f64_list(&self, section: &str, key: &str) -> Result<Vec<f64>, CliError> {
        self.get(section, key)?
            .split(',')
            .map(|tok| {
                parse_f64(tok.trim()).ok_or_else(|| {
                    CliError::config(format!("[{section}] {key}: `{tok}` is not a number"))
                })
            })
            .collect()
    }
}

/// Plain float, or `eN` / `e-N` meaning `exp(N)`.
pub fn parse_f64(tok: &str) -> Option<f64> {
    if let Some(exp) = tok.strip_prefix('e') {
        if let Ok(power) = exp.parse::<f64>() {
            return Some(power.exp());
        }
    }
    tok.parse().ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_comments_lists() {
        let text = "\n# comment\n[network]\nL = 3   # trailing\nm = 1\n\n[run]\ngamma = e4, 100, 2.5\nd = 9, 10\ncalibrate = true\n";
        let cfg = ConfigFile::parse(text).unwrap();
        assert_eq!(cfg.get_usize("network", "L").unwrap(), 3);
        let gammas = cfg.get_f64_list("run", "gamma").unwrap();
        assert!((gammas[0] - 4f64.exp()).abs() < 1e-12);
        assert_eq!(gammas[1], 100.0);
        assert_eq!(cfg.get_u64_list("run", "d").unwrap(), vec![9, 10]);
        assert!(cfg.get_bool_or("run", "calibrate", false).unwrap());
        assert!(!cfg.has_section("detector"));
    }

    #[test]
    fn rejects_orphan_keys_and_bad_headers() {
        assert!(ConfigFile::parse("a = 1\n").is_err());
        assert!(ConfigFile::parse("[oops\na = 1\n").is_err());
        assert!(ConfigFile::parse("[s]\nnot a pair\n").is_err());
    }
}
