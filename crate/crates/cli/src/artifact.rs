//! CSV artifacts with a `# dlab-artifact kind=... schema=1` header line,
//! and the JSON manifest written next to each one.

use crate::config::Kind;
use crate::CliError;
use dlab_core::intervals::MeasureValue;
use dlab_core::Rational;
use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde_json::json;
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

pub const SCHEMA: u32 = 1;
const MARKER: &str = "# dlab-artifact";

/// Cell value of the `pass` column for rows that report without gating.
pub const INFO: &str = "info";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Artifact {
    pub kind: Kind,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Artifact {
    pub fn new(kind: Kind, columns: &[&str]) -> Artifact {
        debug_assert!(columns.contains(&"pass") && columns.contains(&"tag"));
        Artifact { kind, columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.columns.len(), "row width for {}", self.kind);
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn get<'a>(&self, row: &'a [String], name: &str) -> &'a str {
        self.column(name).map(|i| row[i].as_str()).unwrap_or("")
    }

    /// Rows whose pass cell is `false`.
    pub fn failures(&self) -> impl Iterator<Item = &Vec<String>> {
        let i = self.column("pass").expect("pass column");
        self.rows.iter().filter(move |r| r[i] == "false")
    }

    pub fn passed(&self) -> bool {
        self.failures().next().is_none()
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        let body = String::from_utf8(w.into_inner().expect("flush")).expect("utf-8 cells");
        format!("{MARKER} kind={} schema={SCHEMA}\n{body}", self.kind)
    }

    pub fn from_csv(text: &str) -> Result<Artifact, CliError> {
        let bad = |m: String| CliError::Artifact(m);
        let (first, body) = text.split_once('\n').unwrap_or((text, ""));
        let rest = first.strip_prefix(MARKER).ok_or_else(|| bad("not a dlab artifact (missing header line)".into()))?;
        let mut kind = None;
        let mut schema = None;
        for tok in rest.split_whitespace() {
            match tok.split_once('=') {
                Some(("kind", v)) => kind = Some(v.parse::<Kind>().map_err(bad)?),
                Some(("schema", v)) => schema = v.parse::<u32>().ok(),
                _ => return Err(bad(format!("unexpected header token {tok:?}"))),
            }
        }
        let kind = kind.ok_or_else(|| bad("artifact header has no kind".into()))?;
        if schema != Some(SCHEMA) {
            return Err(bad(format!("unknown artifact schema {schema:?}; this build reads schema {SCHEMA}")));
        }
        let mut r = csv::ReaderBuilder::new().from_reader(body.as_bytes());
        let columns: Vec<String> = r.headers().map_err(|e| bad(e.to_string()))?.iter().map(str::to_string).collect();
        if !columns.iter().any(|c| c == "pass") || !columns.iter().any(|c| c == "tag") {
            return Err(bad("artifact lacks pass/tag columns".into()));
        }
        let mut rows = Vec::new();
        for rec in r.records() {
            let rec = rec.map_err(|e| bad(e.to_string()))?;
            rows.push(rec.iter().map(str::to_string).collect());
        }
        Ok(Artifact { kind, columns, rows })
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Run manifest. Deliberately free of timestamps and thread counts.
pub fn manifest(
    artifact_file: &str,
    artifact_csv: &str,
    config_text: &str,
    kind: Kind,
    seed: u64,
    mode: &str,
    passed: bool,
) -> String {
    let v = json!({
        "artifact": artifact_file,
        "artifact_sha256": sha256_hex(artifact_csv.as_bytes()),
        "config_sha256": sha256_hex(config_text.as_bytes()),
        "kind": kind.as_str(),
        "mode": mode,
        "passed": passed,
        "schema": SCHEMA,
        "seed": seed,
        "version": env!("CARGO_PKG_VERSION"),
    });
    let mut s = serde_json::to_string_pretty(&v).expect("json");
    s.push('\n');
    s
}

/// Writes `<dir>/<stem>.csv` and `<dir>/<stem>.manifest.json`.
pub fn write(dir: &Path, stem: &str, csv: &str, manifest: &str) -> Result<PathBuf, CliError> {
    let io = |path: &Path, source| CliError::Io { path: path.display().to_string(), source };
    std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    let csv_path = dir.join(format!("{stem}.csv"));
    std::fs::write(&csv_path, csv).map_err(|e| io(&csv_path, e))?;
    let m = dir.join(format!("{stem}.manifest.json"));
    std::fs::write(&m, manifest).map_err(|e| io(&m, e))?;
    Ok(csv_path)
}

pub fn flag(b: bool) -> String {
    b.to_string()
}

/// Exact `p/q` when short, otherwise a 15-digit decimal prefixed by `~`.
pub fn fmt_rat(r: &Rational) -> String {
    let (n, d) = (r.numer(), r.denom());
    let exact = if d == &BigInt::from(1) { n.to_string() } else { format!("{n}/{d}") };
    if exact.len() <= 48 {
        return exact;
    }
    format!("~{}", sci(r))
}

/// Scientific notation with 15 significant digits, computed exactly.
pub fn sci(r: &Rational) -> String {
    if r.is_zero() {
        return "0".into();
    }
    let sign = if r.is_negative() { "-" } else { "" };
    let (n, d) = (r.numer().abs(), r.denom().clone());
    let mut e = n.to_string().len() as i64 - d.to_string().len() as i64;
    let ten = BigInt::from(10);
    let digits = |e: i64| {
        let shift = 14 - e;
        if shift >= 0 {
            (&n * num_traits::pow(ten.clone(), shift as usize)) / &d
        } else {
            &n / (&d * num_traits::pow(ten.clone(), (-shift) as usize))
        }
    };
    let mut m = digits(e);
    if m.to_string().len() < 15 {
        e -= 1;
        m = digits(e);
    }
    let s = m.to_string();
    format!("{sign}{}.{}e{e}", &s[..1], &s[1..])
}

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.9e}")
}

pub fn fmt_measure(v: &MeasureValue) -> String {
    match v {
        MeasureValue::Exact(r) => fmt_rat(r),
        MeasureValue::Bracket { lower, upper } => format!("[{}, {}]", fmt_rat(lower), fmt_rat(upper)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use dlab_core::frac::rat;

    #[test]
    fn csv_round_trip() {
        let mut a = Artifact::new(Kind::Ubiquity, &["t", "interval", "pass", "tag"]);
        a.push(vec!["5".into(), "[0, 1/2]".into(), "true".into(), "local ubiquity floor".into()]);
        a.push(vec!["6".into(), "[1/2, 1]".into(), "false".into(), "a \"quoted\" tag".into()]);
        let text = a.to_csv();
        assert!(text.starts_with("# dlab-artifact kind=ubiquity schema=1\n"));
        let b = Artifact::from_csv(&text).unwrap();
        assert_eq!(a, b);
        assert!(!b.passed());
        assert_eq!(b.failures().count(), 1);
    }

    #[test]
    fn rejects_foreign_files() {
        assert!(Artifact::from_csv("a,b\n1,2\n").is_err());
        assert!(Artifact::from_csv("# dlab-artifact kind=ubiquity schema=9\npass,tag\n").is_err());
        assert!(Artifact::from_csv("# dlab-artifact kind=nope schema=1\npass,tag\n").is_err());
    }

    #[test]
    fn rational_formatting() {
        assert_eq!(fmt_rat(&rat(-3, 4)), "-3/4");
        assert_eq!(fmt_rat(&rat(5, 1)), "5");
        assert_eq!(sci(&rat(1, 3)), "3.33333333333333e-1");
        assert_eq!(sci(&rat(-12345, 1)), "-1.23450000000000e4");
        let tiny = Rational::new(BigInt::from(1), num_traits::pow(BigInt::from(10), 60) * 7);
        assert_eq!(fmt_rat(&tiny), "~1.42857142857142e-61");
    }

    #[test]
    fn manifest_is_stable() {
        let a = manifest("x.csv", "abc", "cfg", Kind::Catlin, 3, "exact", true);
        assert_eq!(a, manifest("x.csv", "abc", "cfg", Kind::Catlin, 3, "exact", true));
        assert!(a.contains("\"config_sha256\": \"") && !a.contains("thread"));
    }
}
