//! `expcli`: run, validate, and reshape the scenario experiments.
//!
//! Exit codes: 0 success, 2 config/validation failure, 3 runtime failure
//! (including numerical blowup, which leaves partial artifacts flagged in
//! the manifest).

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod artifacts;
mod config;
mod scenarios;

use artifacts::{write_json, write_manifest, write_timeseries};
use config::Config;

/// Environment variable that, when set, re-roots relative output
/// directories.
pub const OUTPUT_ROOT_ENV: &str = "EXPCLI_OUTPUT_ROOT";

#[derive(Debug)]
pub enum CliError {
    /// Bad config or arguments: exit 2.
    Validation(String),
    /// Runtime failure: exit 3.
    Runtime(String),
    /// Numerical blowup: exit 3, with partial artifacts flagged.
    Blowup { time: f64 },
}

impl CliError {
    pub fn validation(msg: impl Into<String>) -> Self {
        CliError::Validation(msg.into())
    }
    pub fn runtime(msg: impl Into<String>) -> Self {
        CliError::Runtime(msg.into())
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "validation error: {m}"),
            CliError::Runtime(m) => write!(f, "runtime error: {m}"),
            CliError::Blowup { time } => write!(f, "numerical blowup at t = {time}"),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "expcli",
    version,
    about = "Determining-functional experiment runner",
    long_about = "Runs seeded experiment scenarios described by TOML configs and \
writes timeseries.csv, summary.json, and manifest.json into the configured \
output directory. Set EXPCLI_OUTPUT_ROOT to re-root relative output paths."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario config and write its artifacts.
    Run { config: PathBuf },
    /// Check a config without running anything.
    Validate { config: PathBuf },
    /// Reshape a manifest's timeseries into long-format CSV on stdout.
    Plotdata { manifest: PathBuf },
}

fn load_config(path: &PathBuf) -> Result<Config, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?;
    let cfg = Config::parse(&text)?;
    cfg.validate()?;
    Ok(cfg)
}

fn output_dir(cfg: &Config) -> PathBuf {
    match std::env::var_os(OUTPUT_ROOT_ENV) {
        Some(root) if !root.is_empty() => PathBuf::from(root).join(&cfg.output_dir),
        _ => cfg.output_dir.clone(),
    }
}

fn run(path: &PathBuf) -> Result<(), CliError> {
    let cfg = load_config(path)?;
    let dir = output_dir(&cfg);
    fs::create_dir_all(&dir)
        .map_err(|e| CliError::runtime(format!("{}: {e}", dir.display())))?;
    let scenario = cfg.scenario.name();
    match scenarios::run_scenario(&cfg) {
        Ok((ts, mut summary)) => {
            if let Some(obj) = summary.as_object_mut() {
                obj.insert("scenario".into(), scenario.into());
                obj.insert("tool_version".into(), env!("CARGO_PKG_VERSION").into());
                obj.insert(
                    "config".into(),
                    serde_json::to_value(&cfg).map_err(|e| CliError::runtime(e.to_string()))?,
                );
            }
            write_timeseries(&dir.join("timeseries.csv"), &ts)?;
            write_json(&dir.join("summary.json"), &summary)?;
            write_manifest(&dir, scenario, &["timeseries.csv", "summary.json"], false)?;
            println!("{scenario}: wrote {}", dir.display());
            Ok(())
        }
        Err(CliError::Blowup { time }) => {
            // record what we know and flag the manifest as partial
            let summary = serde_json::json!({
                "scenario": scenario,
                "tool_version": env!("CARGO_PKG_VERSION"),
                "error": { "kind": "blowup", "time": time },
            });
            write_json(&dir.join("summary.json"), &summary)?;
            write_manifest(&dir, scenario, &["summary.json"], true)?;
            Err(CliError::Blowup { time })
        }
        Err(other) => Err(other),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { config } => run(config),
        Command::Validate { config } => load_config(config).map(|cfg| {
            println!("{}: ok", cfg.scenario.name());
        }),
        Command::Plotdata { manifest } => {
            let stdout = std::io::stdout();
            artifacts::emit_plot_data(manifest, &mut stdout.lock())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("expcli: {e}");
            match e {
                CliError::Validation(_) => ExitCode::from(2),
                CliError::Runtime(_) | CliError::Blowup { .. } => ExitCode::from(3),
            }
        }
    }
}
