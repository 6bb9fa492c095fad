//! The experiment config format.
//!
//! ```text
//! # comment
//! [experiment]
//! kind = counterexample
//! seed = 7
//!
//! [counterexample]
//! M = 0, 3, 5
//! c = geometric 1/2
//! ```
//!
//! `[experiment]` holds `kind` and optionally `name`, `seed` and `mode`.
//! The only other section allowed is the one named after the kind. Every
//! key must be consumed by the experiment; leftovers are errors that name
//! their line.

use crate::CliError;
use dlab_core::frac::parse_rational;
use dlab_core::intervals::MeasureMode;
use dlab_core::Rational;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Kind {
    SieveChecks,
    Concentration,
    Ubiquity,
    TruncatedMeasure,
    Counterexample,
    Catlin,
}

impl Kind {
    pub const ALL: [Kind; 6] = [
        Kind::SieveChecks,
        Kind::Concentration,
        Kind::Ubiquity,
        Kind::TruncatedMeasure,
        Kind::Counterexample,
        Kind::Catlin,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Kind::SieveChecks => "sieve-checks",
            Kind::Concentration => "concentration",
            Kind::Ubiquity => "ubiquity",
            Kind::TruncatedMeasure => "truncated-measure",
            Kind::Counterexample => "counterexample",
            Kind::Catlin => "catlin",
        }
    }
}

impl FromStr for Kind {
    type Err = String;

    fn from_str(s: &str) -> Result<Kind, String> {
        Kind::ALL.into_iter().find(|k| k.as_str() == s).ok_or_else(|| {
            let names: Vec<&str> = Kind::ALL.iter().map(|k| k.as_str()).collect();
            format!("unknown experiment kind {s:?} (expected one of {})", names.join(", "))
        })
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Entry {
    value: String,
    line: usize,
}

/// Key/value pairs of one section, consumed by the experiment runner.
#[derive(Clone, Debug)]
pub struct Section {
    origin: String,
    name: String,
    line: usize,
    entries: BTreeMap<String, Entry>,
}

impl Section {
    fn err(&self, line: usize, msg: impl Into<String>) -> CliError {
        CliError::Config { origin: self.origin.clone(), line, msg: msg.into() }
    }

    pub fn take(&mut self, key: &str) -> Option<(String, usize)> {
        self.entries.remove(key).map(|e| (e.value, e.line))
    }

    pub fn require(&mut self, key: &str) -> Result<(String, usize), CliError> {
        let line = self.line;
        let name = self.name.clone();
        self.take(key).ok_or_else(|| self.err(line, format!("[{name}] is missing required key `{key}`")))
    }

    /// Parses an optional key, naming its line on failure.
    pub fn parse_with<T, F>(&mut self, key: &str, f: F) -> Result<Option<T>, CliError>
    where
        F: FnOnce(&str) -> Result<T, String>,
    {
        match self.take(key) {
            None => Ok(None),
            Some((v, line)) => f(v.trim()).map(Some).map_err(|m| self.err(line, format!("`{key}`: {m}"))),
        }
    }

    pub fn get_or<T, F>(&mut self, key: &str, default: T, f: F) -> Result<T, CliError>
    where
        F: FnOnce(&str) -> Result<T, String>,
    {
        Ok(self.parse_with(key, f)?.unwrap_or(default))
    }

    pub fn required_with<T, F>(&mut self, key: &str, f: F) -> Result<T, CliError>
    where
        F: FnOnce(&str) -> Result<T, String>,
    {
        let (v, line) = self.require(key)?;
        f(v.trim()).map_err(|m| self.err(line, format!("`{key}`: {m}")))
    }

    /// Errors on the first key no runner asked for.
    pub fn finish(self) -> Result<(), CliError> {
        match self.entries.iter().min_by_key(|(_, e)| e.line) {
            None => Ok(()),
            Some((k, e)) => Err(self.err(e.line, format!("unknown key `{k}` in [{}]", self.name))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Config {
    pub kind: Kind,
    pub name: Option<String>,
    pub seed: u64,
    pub mode: MeasureMode,
    pub body: Section,
}

pub fn parse_u64(s: &str) -> Result<u64, String> {
    let t: String = s.chars().filter(|c| *c != '_').collect();
    if let Some((b, e)) = t.split_once('^') {
        let b: u64 = b.trim().parse().map_err(|_| format!("expected an integer, got {s:?}"))?;
        let e: u32 = e.trim().parse().map_err(|_| format!("expected an integer, got {s:?}"))?;
        return b.checked_pow(e).ok_or_else(|| format!("{s} overflows 64 bits"));
    }
    t.trim().parse().map_err(|_| format!("expected an integer, got {s:?}"))
}

pub fn parse_rat(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

pub fn parse_bool(s: &str) -> Result<bool, String> {
    match s {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(format!("expected true or false, got {s:?}")),
    }
}

/// `5..12` or a single value.
pub fn parse_range(s: &str) -> Result<(u32, u32), String> {
    let one = |v: &str| v.trim().parse::<u32>().map_err(|_| format!("expected an integer or a..b, got {s:?}"));
    match s.split_once("..") {
        Some((a, b)) => {
            let (a, b) = (one(a)?, one(b.trim_start_matches('='))?);
            if a > b {
                return Err(format!("empty range {s}"));
            }
            Ok((a, b))
        }
        None => {
            let v = one(s)?;
            Ok((v, v))
        }
    }
}

pub fn parse_list_u64(s: &str) -> Result<Vec<u64>, String> {
    s.split(',').map(str::trim).filter(|p| !p.is_empty()).map(parse_u64).collect()
}

impl Config {
    pub fn parse(text: &str, origin: &str) -> Result<Config, CliError> {
        let err = |line: usize, msg: String| CliError::Config { origin: origin.to_string(), line, msg };
        let mut sections: Vec<Section> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split(['#', ';']).next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| err(line, format!("malformed section header {content:?}")))?
                    .trim()
                    .to_string();
                if sections.iter().any(|s| s.name == name) {
                    return Err(err(line, format!("duplicate section [{name}]")));
                }
                sections.push(Section { origin: origin.to_string(), name, line, entries: BTreeMap::new() });
                continue;
            }
            let (k, v) =
                content.split_once('=').ok_or_else(|| err(line, format!("expected `key = value`, got {content:?}")))?;
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() {
                return Err(err(line, "empty key".into()));
            }
            let section =
                sections.last_mut().ok_or_else(|| err(line, format!("key `{k}` appears before any [section]")))?;
            if section.entries.contains_key(k) {
                return Err(err(line, format!("duplicate key `{k}` in [{}]", section.name)));
            }
            section.entries.insert(k.to_string(), Entry { value: v.to_string(), line });
        }
        if sections.is_empty() {
            return Err(err(0, "empty config: expected an [experiment] section".into()));
        }
        let pos = sections
            .iter()
            .position(|s| s.name == "experiment")
            .ok_or_else(|| err(0, "missing [experiment] section".into()))?;
        let mut head = sections.remove(pos);
        let kind = head.required_with("kind", |v| v.parse::<Kind>())?;
        let name = head.take("name").map(|(v, _)| v);
        if let Some(n) = &name {
            if n.is_empty() || !n.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c)) {
                let line = head.line;
                return Err(err(line, format!("name {n:?} must be nonempty [A-Za-z0-9._-]")));
            }
        }
        let seed = head.get_or("seed", 0, parse_u64)?;
        let mode = head.get_or("mode", MeasureMode::Exact, |v| MeasureMode::parse(v).map_err(|e| e.to_string()))?;
        head.finish()?;
        let body = match sections.len() {
            0 => Section { origin: origin.to_string(), name: kind.as_str().into(), line: 0, entries: BTreeMap::new() },
            _ => {
                if let Some(s) = sections.iter().find(|s| s.name != kind.as_str()) {
                    return Err(err(s.line, format!("unknown section [{}] for kind {kind}", s.name)));
                }
                sections.remove(0)
            }
        };
        Ok(Config { kind, name, seed, mode, body })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_of(e: CliError) -> usize {
        match e {
            CliError::Config { line, .. } => line,
            other => panic!("expected config error, got {other}"),
        }
    }

    #[test]
    fn parses_sections() {
        let text = "# top\n[experiment]\nkind = ubiquity ; trailing\nseed = 7\n\n[ubiquity]\nk = 2\nt = 5..12\n";
        let mut c = Config::parse(text, "x.cfg").unwrap();
        assert_eq!(c.kind, Kind::Ubiquity);
        assert_eq!(c.seed, 7);
        assert_eq!(c.mode, MeasureMode::Exact);
        assert_eq!(c.body.get_or("k", 0, parse_u64).unwrap(), 2);
        assert_eq!(c.body.required_with("t", parse_range).unwrap(), (5, 12));
        c.body.finish().unwrap();
    }

    #[test]
    fn unknown_key_names_line() {
        let text = "[experiment]\nkind = catlin\n[catlin]\npoints = 10\npoitns = 3\n";
        let mut c = Config::parse(text, "x.cfg").unwrap();
        c.body.take("points");
        assert_eq!(line_of(c.body.finish().unwrap_err()), 5);
        let bad = "[experiment]\nkind = catlin\nsede = 3\n";
        assert_eq!(line_of(Config::parse(bad, "x").unwrap_err()), 3);
    }

    #[test]
    fn rejects_malformed() {
        assert_eq!(line_of(Config::parse("", "x").unwrap_err()), 0);
        assert_eq!(line_of(Config::parse("k = 1\n", "x").unwrap_err()), 1);
        assert_eq!(line_of(Config::parse("[experiment]\nkind = nope\n", "x").unwrap_err()), 2);
        assert_eq!(line_of(Config::parse("[experiment]\nkind = catlin\n[ubiquity]\n", "x").unwrap_err()), 3);
        assert_eq!(line_of(Config::parse("[experiment]\nkind = catlin\nkind = catlin\n", "x").unwrap_err()), 3);
        assert_eq!(line_of(Config::parse("[experiment\n", "x").unwrap_err()), 1);
        let c = Config::parse("[experiment]\nkind = catlin\n[catlin]\nseed = x\n", "x").unwrap();
        let mut body = c.body;
        assert_eq!(line_of(body.get_or("seed", 0, parse_u64).unwrap_err()), 4);
    }

    #[test]
    fn value_parsers() {
        assert_eq!(parse_u64("10^6").unwrap(), 1_000_000);
        assert_eq!(parse_u64("100_000").unwrap(), 100_000);
        assert_eq!(parse_range("10").unwrap(), (10, 10));
        assert!(parse_range("9..3").is_err());
        assert_eq!(parse_list_u64("0, 3, 5").unwrap(), vec![0, 3, 5]);
        assert!(parse_bool("maybe").is_err());
    }
}
