//! Config-driven experiment runner and reporter for `dlab-core`.
//!
//! `dlab run <config>` writes `<out>/<name>.csv` and a manifest with the
//! config hash, seed and version; `dlab report <artifact>` renders it;
//! `dlab selftest` runs the bundled configs.

pub mod artifact;
pub mod config;
pub mod experiments;
pub mod report;

use artifact::Artifact;
use config::Config;
use dlab_core::intervals::MeasureMode;
use experiments::RunContext;
use std::path::{Path, PathBuf};
use thiserror::Error;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    /// Line 0 means the whole file.
    #[error("{origin}:{line}: {msg}")]
    Config { origin: String, line: usize, msg: String },
    #[error(transparent)]
    Core(#[from] dlab_core::Error),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("artifact: {0}")]
    Artifact(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use dlab_core::Error as E;
        match self {
            CliError::Config { .. } | CliError::Artifact(_) => EXIT_USAGE,
            CliError::Io { .. } => EXIT_RESOURCE,
            CliError::Core(e) if e.is_resource() => EXIT_RESOURCE,
            CliError::Core(E::Internal(_)) => EXIT_CHECK_FAILED,
            CliError::Core(_) => EXIT_USAGE,
        }
    }
}

/// Command-line values that take precedence over the config.
#[derive(Clone, Copy, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub mode: Option<MeasureMode>,
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub artifact: Artifact,
    pub path: PathBuf,
    pub passed: bool,
}

/// Runs one config given as text; `stem` names the output files unless
/// the config sets `name`.
pub fn run_text(text: &str, origin: &str, stem: &str, overrides: Overrides, out: &Path) -> Result<Outcome, CliError> {
    let config = Config::parse(text, origin)?;
    let stem = config.name.clone().unwrap_or_else(|| stem.to_string());
    let ctx = RunContext { seed: overrides.seed.unwrap_or(config.seed), mode: overrides.mode.unwrap_or(config.mode) };
    let kind = config.kind;
    let a = experiments::run(config, ctx)?;
    let csv = a.to_csv();
    let passed = a.passed();
    let file = format!("{stem}.csv");
    let m = artifact::manifest(&file, &csv, text, kind, ctx.seed, ctx.mode.as_str(), passed);
    let path = artifact::write(out, &stem, &csv, &m)?;
    Ok(Outcome { artifact: a, path, passed })
}

pub fn run_file(path: &Path, overrides: Overrides, out: &Path) -> Result<Outcome, CliError> {
    let origin = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config {
        origin: origin.clone(),
        line: 0,
        msg: e.to_string(),
    })?;
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("artifact");
    run_text(&text, &origin, stem, overrides, out)
}

pub fn read_artifact(path: &Path) -> Result<Artifact, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Artifact(format!("{}: {e}", path.display())))?;
    Artifact::from_csv(&text)
}

/// Configs bundled into the binary and run by `dlab selftest`.
pub const SELFTEST_CONFIGS: &[(&str, &str)] = &[
    ("sieve_checks", include_str!("../configs/sieve_checks.cfg")),
    ("concentration_binomial", include_str!("../configs/concentration_binomial.cfg")),
    ("concentration_x", include_str!("../configs/concentration_x.cfg")),
    ("concentration_z", include_str!("../configs/concentration_z.cfg")),
    ("ubiquity_phi", include_str!("../configs/ubiquity_phi.cfg")),
    ("truncated_full", include_str!("../configs/truncated_full.cfg")),
    ("counterexample_M3_5", include_str!("../configs/counterexample_M3_5.cfg")),
    ("counterexample_M3_5_8", include_str!("../configs/counterexample_M3_5_8.cfg")),
    ("catlin_M3_5_8", include_str!("../configs/catlin_M3_5_8.cfg")),
];

/// Runs every bundled config into `out` and writes `selftest.txt`.
pub fn selftest(
    overrides: Overrides,
    out: &Path,
    mut progress: impl FnMut(&Outcome),
) -> Result<Vec<Outcome>, CliError> {
    let mut outcomes = Vec::new();
    let mut summary = String::new();
    for (stem, text) in SELFTEST_CONFIGS {
        let o = run_text(text, &format!("<selftest>/{stem}.cfg"), stem, overrides, out)?;
        summary.push_str(&format!("{stem} {} {}\n", o.artifact.kind, if o.passed { "pass" } else { "fail" }));
        progress(&o);
        outcomes.push(o);
    }
    let p = out.join("selftest.txt");
    std::fs::write(&p, summary).map_err(|source| CliError::Io { path: p.display().to_string(), source })?;
    Ok(outcomes)
}
