//! Plain-text run configuration.
//!
//! ```text
//! # comment
//! [time] t0=0 t1=1
//! [mass]
//! family = exponential
//! m0 = 1.0 rate = 0.1
//! [constants] q=1.0 C=1.5
//! ```
//!
//! Sections are `[name]` headers; entries are `key=value` pairs, any number
//! per line, also on the header line itself. Whitespace around `=` is
//! allowed; values may not contain spaces (lists are comma separated). `#`
//! starts a comment. Every error carries a line number.

use std::str::FromStr;

use thiserror::Error;

use crate::params::{CoefficientSet, CubicSpline, Family, ParamError, Span, TimeFunction};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("missing section [{section}]")]
    MissingSection { section: String },
    #[error("line {line}: missing key '{key}' in section [{section}]")]
    MissingKey { section: String, key: String, line: usize },
    #[error("line {line}: invalid value '{value}' for '{key}' in [{section}]: {message}")]
    InvalidValue { section: String, key: String, value: String, line: usize, message: String },
    #[error("line {line}: duplicate key '{key}' in [{section}]")]
    DuplicateKey { section: String, key: String, line: usize },
    #[error("line {line}: unknown key '{key}' in [{section}]")]
    UnknownKey { section: String, key: String, line: usize },
    #[error("line {line}: duplicate section [{section}]")]
    DuplicateSection { section: String, line: usize },
    #[error("[{section}] (line {line}): {source}")]
    Param { section: String, line: usize, source: ParamError },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub name: String,
    pub line: usize,
    pub entries: Vec<Entry>,
}

impl Section {
    fn find(&self, keys: &[&str]) -> Option<&Entry> {
        self.entries.iter().find(|e| keys.contains(&e.key.as_str()))
    }

    pub fn has(&self, key: &str) -> bool {
        self.find(&[key]).is_some()
    }

    pub fn raw(&self, key: &str) -> Result<&Entry, ConfigError> {
        self.raw_any(&[key])
    }

    /// First entry under any of `keys` (aliases).
    pub fn raw_any(&self, keys: &[&str]) -> Result<&Entry, ConfigError> {
        self.find(keys).ok_or_else(|| ConfigError::MissingKey {
            section: self.name.clone(),
            key: keys[0].to_string(),
            line: self.line,
        })
    }

    fn invalid(&self, e: &Entry, message: String) -> ConfigError {
        ConfigError::InvalidValue {
            section: self.name.clone(),
            key: e.key.clone(),
            value: e.value.clone(),
            line: e.line,
            message,
        }
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<T, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        self.get_any(&[key])
    }

    pub fn get_any<T: FromStr>(&self, keys: &[&str]) -> Result<T, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        let e = self.raw_any(keys)?;
        e.value.parse::<T>().map_err(|err| self.invalid(e, err.to_string()))
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        if self.has(key) {
            self.get(key)
        } else {
            Ok(default)
        }
    }

    pub fn get_opt<T: FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        if self.has(key) {
            self.get(key).map(Some)
        } else {
            Ok(None)
        }
    }

    /// Comma-separated list of floats.
    pub fn list(&self, key: &str) -> Result<Vec<f64>, ConfigError> {
        let e = self.raw(key)?;
        e.value
            .split(',')
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<f64>().map_err(|err| self.invalid(e, err.to_string())))
            .collect()
    }

    /// Rejects keys outside `allowed`.
    pub fn expect_keys(&self, allowed: &[&str]) -> Result<(), ConfigError> {
        match self.entries.iter().find(|e| !allowed.contains(&e.key.as_str())) {
            Some(e) => Err(ConfigError::UnknownKey { section: self.name.clone(), key: e.key.clone(), line: e.line }),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RawConfig {
    pub sections: Vec<Section>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut sections: Vec<Section> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let mut rest = raw.split('#').next().unwrap_or("").trim();
            if rest.is_empty() {
                continue;
            }
            if let Some(after) = rest.strip_prefix('[') {
                let close = after
                    .find(']')
                    .ok_or_else(|| ConfigError::Syntax { line, message: "unterminated section header".into() })?;
                let name = after[..close].trim();
                if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                    return Err(ConfigError::Syntax { line, message: format!("bad section name '{name}'") });
                }
                if sections.iter().any(|s| s.name == name) {
                    return Err(ConfigError::DuplicateSection { section: name.to_string(), line });
                }
                sections.push(Section { name: name.to_string(), line, entries: Vec::new() });
                rest = after[close + 1..].trim();
            }
            if rest.is_empty() {
                continue;
            }
            let section = sections
                .last_mut()
                .ok_or_else(|| ConfigError::Syntax { line, message: "entry before any [section]".into() })?;
            for pair in pairs(rest) {
                let (key, value) = pair.split_once('=').ok_or_else(|| ConfigError::Syntax {
                    line,
                    message: format!("expected key=value, got '{pair}'"),
                })?;
                if key.is_empty() || value.is_empty() {
                    return Err(ConfigError::Syntax { line, message: format!("empty key or value in '{pair}'") });
                }
                if section.entries.iter().any(|e| e.key == key) {
                    return Err(ConfigError::DuplicateKey { section: section.name.clone(), key: key.into(), line });
                }
                section.entries.push(Entry { key: key.to_string(), value: value.to_string(), line });
            }
        }
        Ok(Self { sections })
    }

    pub fn section(&self, name: &str) -> Result<&Section, ConfigError> {
        self.sections
            .iter()
            .find(|s| s.name == name)
            .ok_or_else(|| ConfigError::MissingSection { section: name.to_string() })
    }

    pub fn optional(&self, name: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.name == name)
    }
}

/// Splits `a = 1 b=2` into `["a=1", "b=2"]`.
fn pairs(s: &str) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    let mut glue = false;
    for tok in s.split_whitespace() {
        match out.last_mut() {
            Some(prev) if glue || tok.starts_with('=') => prev.push_str(tok),
            _ => out.push(tok.to_string()),
        }
        glue = tok.ends_with('=');
    }
    out
}

/// The `[time]` section.
pub fn read_span(cfg: &RawConfig) -> Result<Span, ConfigError> {
    let s = cfg.section("time")?;
    s.expect_keys(&["t0", "t1"])?;
    let (t0, t1) = (s.get::<f64>("t0")?, s.get::<f64>("t1")?);
    Span::new(t0, t1).map_err(|source| ConfigError::Param { section: s.name.clone(), line: s.line, source })
}

/// One coefficient section. The leading value accepts the aliases `value`,
/// `m0`, `w0` and `b0`.
pub fn read_time_function(section: &Section, span: Span) -> Result<TimeFunction, ConfigError> {
    const VALUE: [&str; 4] = ["value", "m0", "w0", "b0"];
    let family: String = section.get("family")?;
    let family = match family.as_str() {
        "constant" => {
            section.expect_keys(&["family", "value", "m0", "w0", "b0"])?;
            Family::Constant { value: section.get_any(&VALUE)? }
        }
        "linear" => {
            section.expect_keys(&["family", "value", "m0", "w0", "b0", "slope"])?;
            Family::Linear { value: section.get_any(&VALUE)?, slope: section.get("slope")? }
        }
        "exponential" => {
            section.expect_keys(&["family", "value", "m0", "w0", "b0", "rate"])?;
            Family::Exponential { value: section.get_any(&VALUE)?, rate: section.get("rate")? }
        }
        "sinusoidal" => {
            section.expect_keys(&["family", "offset", "amplitude", "freq", "phase"])?;
            Family::Sinusoidal {
                offset: section.get("offset")?,
                amplitude: section.get("amplitude")?,
                freq: section.get("freq")?,
                phase: section.get("phase")?,
            }
        }
        "polynomial" => {
            section.expect_keys(&["family", "coeffs"])?;
            Family::Polynomial { coeffs: section.list("coeffs")? }
        }
        "tabulated" => {
            section.expect_keys(&["family", "times", "values"])?;
            let spline = CubicSpline::new(section.list("times")?, section.list("values")?)
                .map_err(|source| ConfigError::Param { section: section.name.clone(), line: section.line, source })?;
            Family::Tabulated(spline)
        }
        other => {
            let e = section.raw("family")?;
            return Err(ConfigError::InvalidValue {
                section: section.name.clone(),
                key: "family".into(),
                value: other.into(),
                line: e.line,
                message: "expected constant, linear, exponential, sinusoidal, polynomial or tabulated".into(),
            });
        }
    };
    TimeFunction::new(family, span).map_err(|source| ConfigError::Param {
        section: section.name.clone(),
        line: section.line,
        source,
    })
}

/// `[time]`, `[mass]`, `[frequency]`, `[magnetic_field]` and `[constants]`.
pub fn read_coefficients(cfg: &RawConfig) -> Result<CoefficientSet, ConfigError> {
    let span = read_span(cfg)?;
    let mass = cfg.section("mass")?;
    let m = read_time_function(mass, span)?;
    let w = read_time_function(cfg.section("frequency")?, span)?;
    let b = read_time_function(cfg.section("magnetic_field")?, span)?;
    let consts = cfg.section("constants")?;
    consts.expect_keys(&["q", "C"])?;
    let (q, c) = (consts.get::<f64>("q")?, consts.get::<f64>("C")?);
    CoefficientSet::new(m, w, b, q, c).map_err(|source| {
        let at = match source {
            ParamError::NonPositiveMass { .. } => mass,
            _ => consts,
        };
        ConfigError::Param { section: at.name.clone(), line: at.line, source }
    })
}
