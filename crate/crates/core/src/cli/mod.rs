//! Command-line front end: `run <config>` and `list`.

pub mod config;
pub mod experiments;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};

use crate::error::Error;
use crate::report::write_atomic;
use config::{ExperimentConfig, ExperimentKind, SCHEMA_VERSION};

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "COMMLAB_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "commlab", version, about = "Multiplier and commutator experiments on a periodic grid")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config and write its CSV report.
    Run {
        config: PathBuf,
        /// Write the report here instead of the config's `output` path.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// List the experiment kinds with their required config fields.
    List,
}

#[derive(Debug)]
struct Failure {
    code: i32,
    kind: &'static str,
    message: String,
}

impl Failure {
    fn new(code: i32, kind: &'static str, message: impl Into<String>) -> Self {
        Self { code, kind, message: message.into() }
    }

    fn emit(&self) {
        let line = serde_json::json!({
            "error": self.kind,
            "exit_code": self.code,
            "message": self.message,
        });
        eprintln!("{line}");
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let (code, kind) = match &e {
            Error::Io(_) => (EXIT_IO, "io"),
            e if e.is_numerical() => (EXIT_NUMERICAL, "numerical"),
            _ => (EXIT_VALIDATION, "validation"),
        };
        Failure::new(code, kind, e.to_string())
    }
}

/// Parse `args` (including the program name), run, and return the process exit code.
pub fn run_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                Failure::new(EXIT_PARSE, "usage", e.to_string().trim_end()).emit();
                return EXIT_PARSE;
            }
            let _ = e.print();
            return EXIT_OK;
        }
    };
    let result = match cli.command {
        Command::List => {
            print!("{}", listing());
            Ok(())
        }
        Command::Run { config, output } => configure_threads().and_then(|_| run(&config, output.as_deref())),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            f.emit();
            f.code
        }
    }
}

/// One line per experiment: name, description and required fields.
pub fn listing() -> String {
    let mut out = String::new();
    for k in ExperimentKind::ALL {
        let _ = writeln!(out, "{:<20} {} [requires: {}]", k.name(), k.description(), k.required_fields().join(", "));
    }
    out
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        Failure::new(EXIT_VALIDATION, "validation", format!("{THREADS_ENV}={raw:?} is not a positive integer"))
    })?;
    // a second call within one process finds the pool already built; keep the first
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Load a config, run it, and write the report. Nothing is written on failure.
fn run(config_path: &Path, output: Option<&Path>) -> Result<(), Failure> {
    let text = std::fs::read_to_string(config_path)
        .map_err(|e| Failure::new(EXIT_IO, "io", format!("{}: {e}", config_path.display())))?;
    let cfg =
        ExperimentConfig::parse(&text).map_err(|e| Failure::new(EXIT_PARSE, "parse", e.to_string().trim_end()))?;
    if cfg.schema_version != SCHEMA_VERSION {
        return Err(Failure::new(
            EXIT_VALIDATION,
            "validation",
            format!("schema_version {} is not supported (expected {SCHEMA_VERSION})", cfg.schema_version),
        ));
    }
    let outcome = experiments::run(&cfg)?;
    let report = render(&cfg, &outcome)?;
    let path = output.unwrap_or(&cfg.output);
    write_atomic(path, &report)?;
    Ok(())
}

fn render(cfg: &ExperimentConfig, outcome: &experiments::Outcome) -> Result<String, Failure> {
    let echo = toml::to_string(cfg).map_err(|e| Failure::new(EXIT_VALIDATION, "validation", e.to_string()))?;
    let stamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let mut out = String::new();
    let _ = writeln!(out, "# commlab {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(out, "# experiment: {}", cfg.experiment.name());
    let _ = writeln!(out, "# generated_unix: {stamp}");
    let _ = writeln!(out, "# schema_version: {SCHEMA_VERSION}");
    for line in echo.lines().filter(|l| !l.is_empty()) {
        let _ = writeln!(out, "# config: {line}");
    }
    for note in &outcome.notes {
        let _ = writeln!(out, "# {note}");
    }
    out.push_str(&outcome.table.to_csv());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn listing_has_every_kind() {
        let l = listing();
        assert_eq!(l.lines().count(), 8);
        assert!(l.contains("mikhlin-check") && l.contains("hmeasure"));
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run_from_args(["commlab", "frobnicate"]), EXIT_PARSE);
        assert_eq!(run_from_args(["commlab", "list"]), EXIT_OK);
    }

    #[test]
    fn error_classes() {
        assert_eq!(Failure::from(Error::GridMismatch).code, EXIT_VALIDATION);
        assert_eq!(Failure::from(Error::Svd("x".into())).code, EXIT_NUMERICAL);
        let io = std::io::Error::other("x");
        assert_eq!(Failure::from(Error::Io(io)).code, EXIT_IO);
    }
}
