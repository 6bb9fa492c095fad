use clap::{Args, Parser, Subcommand};
use dlab_cli::{report, CliError, Overrides, EXIT_CHECK_FAILED, EXIT_PASS, EXIT_RESOURCE, EXIT_USAGE};
use dlab_core::intervals::MeasureMode;
use std::path::PathBuf;
use std::process::ExitCode;

/// Experiments on Khintchine-type theorems with random fractions.
#[derive(Parser, Debug)]
#[command(name = "dlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one experiment config and write its artifact and manifest.
    Run {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Print a human-readable table for an artifact.
    Report { artifact: PathBuf },
    /// Run the bundled invariant suite.
    Selftest {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// Master seed, overriding the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, value_parser = parse_mode)]
    mode: Option<MeasureMode>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_mode(s: &str) -> Result<MeasureMode, String> {
    MeasureMode::parse(s).map_err(|e| e.to_string())
}

impl Common {
    fn setup(&self) -> Result<Overrides, CliError> {
        if let Some(n) = self.threads {
            if n == 0 {
                return Err(CliError::Config { origin: "--threads".into(), line: 0, msg: "must be at least 1".into() });
            }
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| CliError::Core(dlab_core::Error::Resource(e.to_string())))?;
        }
        Ok(Overrides { seed: self.seed, mode: self.mode })
    }
}

fn status(passed: bool) -> i32 {
    if passed {
        EXIT_PASS
    } else {
        EXIT_CHECK_FAILED
    }
}

fn main_inner(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Run { config, common } => {
            let o = common.setup()?;
            let out = common.out.unwrap_or_else(|| PathBuf::from("dlab-out"));
            let outcome = dlab_cli::run_file(&config, o, &out)?;
            print!("{}", report::render(&outcome.artifact));
            println!("artifact: {}", outcome.path.display());
            Ok(status(outcome.passed))
        }
        Command::Report { artifact } => {
            let a = dlab_cli::read_artifact(&artifact)?;
            print!("{}", report::render(&a));
            Ok(status(a.passed()))
        }
        Command::Selftest { common } => {
            let o = common.setup()?;
            let out = common.out.unwrap_or_else(|| PathBuf::from("dlab-selftest"));
            let outcomes = dlab_cli::selftest(o, &out, |r| {
                let verdict = if r.passed { "pass" } else { "FAIL" };
                println!("{verdict}  {:<18} {}", r.artifact.kind.as_str(), r.path.display());
            })?;
            Ok(status(outcomes.iter().all(|r| r.passed)))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match main_inner(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("dlab: {e}");
            match e.exit_code() {
                EXIT_RESOURCE if matches!(e, CliError::Core(_)) => {
                    eprintln!("hint: lower the sizes or rerun with --mode certified");
                    EXIT_RESOURCE
                }
                c => c,
            }
        }
    };
    debug_assert!(matches!(code, EXIT_PASS | EXIT_CHECK_FAILED | EXIT_USAGE | EXIT_RESOURCE));
    ExitCode::from(code as u8)
}
