//! Command-line front end for `nframes-core`.
//!
//! A run reads one TOML config, dispatches a command and renders a report
//! either as text or as a JSON document with the keys `command`, `status`,
//! `residuals`, `constructed` and `timing_ms`. Exit codes: 0 pass, 1
//! obstruction or failed verification, 2 input error.

pub mod commands;
pub mod config;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, ValueEnum};
use serde::Serialize;
use serde_json::Value;

pub use config::{ConfigError, EngineConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Curvature,
    Flatness,
    NormalPoint,
    NormalPath,
    NormalMap,
    VbNormal,
    Lift,
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Curvature => "curvature",
            Command::Flatness => "flatness",
            Command::NormalPoint => "normal-point",
            Command::NormalPath => "normal-path",
            Command::NormalMap => "normal-map",
            Command::VbNormal => "vb-normal",
            Command::Lift => "lift",
            Command::Verify => "verify",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Machine,
}

#[derive(Debug, Clone, Parser)]
#[command(name = "nframes", version, about = "Connections, curvature and normal coordinates on fibre bundles")]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the tolerance the command checks against.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Overrides `numerics.grid`.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Overrides the integration step the command uses.
    #[arg(long)]
    pub step: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Machine report to re-verify (`verify` only).
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Record wall-clock time in `timing_ms`.
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    Obstructed,
    Error,
    InputError,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Fail | Status::Obstructed | Status::Error => 1,
            Status::InputError => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    pub status: Status,
    pub residuals: BTreeMap<String, f64>,
    pub constructed: Value,
    pub timing_ms: Option<f64>,
}

impl Report {
    pub fn new(command: Command, status: Status) -> Self {
        Report {
            command: command.name().into(),
            status,
            residuals: BTreeMap::new(),
            constructed: Value::Object(Default::default()),
            timing_ms: None,
        }
    }

    pub fn input_error(command: Command, err: &ConfigError) -> Self {
        let mut r = Report::new(command, Status::InputError);
        r.constructed = serde_json::json!({ "field": err.path, "message": err.message });
        r
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize") + "\n"
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("command: {}\nstatus: {}\n", self.command, status_word(self.status));
        if !self.residuals.is_empty() {
            out.push_str("residuals:\n");
            for (k, v) in &self.residuals {
                out.push_str(&format!("  {k} = {v:.6e}\n"));
            }
        }
        if self.constructed.as_object().is_some_and(|o| !o.is_empty()) {
            out.push_str("constructed:\n");
            let body = serde_json::to_string_pretty(&self.constructed).expect("reports serialize");
            for line in body.lines() {
                out.push_str("  ");
                out.push_str(line);
                out.push('\n');
            }
        }
        if let Some(t) = self.timing_ms {
            out.push_str(&format!("timing: {t:.1} ms\n"));
        }
        out
    }
}

fn status_word(s: Status) -> &'static str {
    match s {
        Status::Pass => "pass",
        Status::Fail => "fail",
        Status::Obstructed => "obstructed",
        Status::Error => "error",
        Status::InputError => "input-error",
    }
}

/// Exit code and rendered output of one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Parse `args` (including the program name) and run.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            };
        }
    };
    run_cli(&cli)
}

pub fn run_cli(cli: &Cli) -> Outcome {
    let start = Instant::now();
    let mut report = match load(cli) {
        Ok(cfg) => commands::execute(cli, &cfg),
        Err(e) => Report::input_error(cli.command, &e),
    };
    if cli.timing {
        report.timing_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    let stdout = match cli.format {
        Format::Text => report.to_text(),
        Format::Machine => report.to_json(),
    };
    let stderr = match report.status {
        Status::InputError => format!("error: {}\n", commands::input_error_text(&report)),
        _ => String::new(),
    };
    Outcome { code: report.status.exit_code(), stdout, stderr }
}

fn load(cli: &Cli) -> Result<EngineConfig, ConfigError> {
    let text = std::fs::read_to_string(&cli.config)
        .map_err(|e| ConfigError::new("--config", format!("{}: {e}", cli.config.display())))?;
    let mut cfg = EngineConfig::from_toml(&text)?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(g) = cli.grid {
        if g < 2 {
            return Err(ConfigError::new("--grid", "must be at least 2"));
        }
        cfg.numerics.grid = g;
    }
    if let Some(t) = cli.tol {
        if !(t > 0.0 && t.is_finite()) {
            return Err(ConfigError::new("--tol", "must be positive"));
        }
    }
    if let Some(h) = cli.step {
        if !(h > 0.0 && h.is_finite()) {
            return Err(ConfigError::new("--step", "must be positive"));
        }
    }
    Ok(cfg)
}
