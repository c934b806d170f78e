//! The `cplab` command line. A run is a pure function of its [`RunConfig`].

pub mod args;
mod commands;
pub mod output;

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::Parser;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

pub use args::{Cli, Command};
pub use commands::{parse_kernel, parse_profile};
pub use output::{Artifact, Cell, Format, Table};

use crate::error::Error;
use crate::experiments::digest;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NONCONVERGENCE: i32 = 2;
pub const EXIT_FAILED_CHECK: i32 = 3;

pub const DEFAULT_SEED: u64 = 20_260_101;
pub const DEFAULT_LATTICE_N: u64 = 64;

fn default_seed() -> u64 {
    DEFAULT_SEED
}

fn default_lattice_n() -> u64 {
    DEFAULT_LATTICE_N
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub format: Format,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default = "default_lattice_n")]
    pub lattice_n: u64,
    pub run: Command,
}

impl RunConfig {
    pub fn new(run: Command) -> Self {
        RunConfig { seed: DEFAULT_SEED, format: Format::Csv, out: None, threads: None, lattice_n: DEFAULT_LATTICE_N, run }
    }

    pub fn from_toml(text: &str) -> std::result::Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run configs serialize")
    }

    /// Hex sha256 of the canonical JSON form.
    pub fn digest(&self) -> String {
        digest(self).expect("run configs serialize")
    }

    pub fn manifest(&self, status: Status) -> Value {
        json!({
            "tool": "cplab",
            "version": env!("CARGO_PKG_VERSION"),
            "ensemble_format": "CPLAB-ENS-v1",
            "command": self.run.name(),
            "seed": self.seed,
            "config_digest": self.digest(),
            "config": self,
            "status": status.as_str(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    NonConvergence,
    Failed,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::NonConvergence => "non-convergence",
            Status::Failed => "failed-check",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Status::Pass => EXIT_PASS,
            Status::NonConvergence => EXIT_NONCONVERGENCE,
            Status::Failed => EXIT_FAILED_CHECK,
        }
    }
}

#[derive(Debug)]
pub struct Outcome {
    pub artifact: Artifact,
    pub status: Status,
}

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Engine(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Engine(e)
    }
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Engine(e) => match e {
                Error::NonConvergence { .. } | Error::Overflow(_) => EXIT_NONCONVERGENCE,
                Error::Asymmetric(_)
                | Error::NotPositive { .. }
                | Error::SupportMismatch(_)
                | Error::Additivity(_)
                | Error::GramMismatch(_) => EXIT_FAILED_CHECK,
                _ => EXIT_USAGE,
            },
        }
    }

    pub fn message(&self) -> String {
        match self {
            Failure::Usage(m) => format!("usage error: {m}"),
            Failure::Engine(e) => e.to_string(),
        }
    }
}

/// Runs the command on the configured number of threads.
pub fn execute(cfg: &RunConfig) -> std::result::Result<Outcome, Failure> {
    let threads = match cfg.threads {
        Some(0) => return Err(Failure::Usage("--threads must be at least 1".into())),
        t => t,
    };
    match threads {
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(|e| Failure::Usage(format!("thread pool: {e}")))?;
            pool.install(|| commands::run_command(cfg))
        }
        None => commands::run_command(cfg),
    }
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

/// Writes the artifact and its manifest. With `--out` both go to disk; otherwise the
/// artifact goes to `stdout` and, for CSV, the manifest to `stderr` as one JSON line.
pub fn emit(cfg: &RunConfig, outcome: &Outcome, stdout: &mut dyn Write, stderr: &mut dyn Write) -> crate::Result<()> {
    let manifest = cfg.manifest(outcome.status);
    match &cfg.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            outcome.artifact.write(cfg.format, &manifest, &mut w)?;
            w.flush()?;
            let mut m = BufWriter::new(File::create(manifest_path(path))?);
            serde_json::to_writer_pretty(&mut m, &manifest)?;
            writeln!(m)?;
            m.flush()?;
        }
        None => {
            outcome.artifact.write(cfg.format, &manifest, &mut *stdout)?;
            let embedded = cfg.format == Format::Json && !matches!(outcome.artifact, Artifact::Ensemble { binary: true, .. });
            if !embedded {
                writeln!(stderr, "{}", serde_json::to_string(&manifest)?)?;
            }
        }
    }
    Ok(())
}

/// Builds the run configuration from parsed flags, reading `--config` when given.
pub fn resolve(cli: Cli) -> std::result::Result<RunConfig, Failure> {
    let mut cfg = match (cli.config, cli.command) {
        (Some(_), Some(_)) => return Err(Failure::Usage("give either --config or a subcommand, not both".into())),
        (None, None) => return Err(Failure::Usage("no subcommand; see --help".into())),
        (None, Some(run)) => RunConfig::new(run),
        (Some(path), None) => {
            let text = std::fs::read_to_string(&path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            RunConfig::from_toml(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?
        }
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(f) = cli.format {
        cfg.format = f;
    }
    if let Some(o) = cli.out {
        cfg.out = Some(o);
    }
    if let Some(n) = cli.lattice_n {
        cfg.lattice_n = n;
    }
    cfg.threads = match cli.threads {
        Some(t) => Some(t),
        None => match std::env::var("CPLAB_THREADS") {
            Ok(v) if !v.is_empty() => {
                Some(v.parse().map_err(|_| Failure::Usage(format!("CPLAB_THREADS={v:?} is not a thread count")))?)
            }
            _ => cfg.threads,
        },
    };
    Ok(cfg)
}

/// Entry point with injectable streams; returns the exit status.
pub fn main_with<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
        }
    };
    let cfg = match resolve(cli) {
        Ok(c) => c,
        Err(f) => {
            let _ = writeln!(stderr, "{}", f.message());
            return f.exit_code();
        }
    };
    match execute(&cfg) {
        Ok(outcome) => match emit(&cfg, &outcome, stdout, stderr) {
            Ok(()) => outcome.status.exit_code(),
            Err(e) => {
                let _ = writeln!(stderr, "{e}");
                EXIT_USAGE
            }
        },
        Err(f) => {
            let _ = writeln!(stderr, "{}", f.message());
            f.exit_code()
        }
    }
}
