//! Driver for `lspec`: configuration, dispatch, artifacts and the
//! acceptance suite.

pub mod accept;
pub mod commands;
pub mod config;
pub mod output;

use serde_json::{json, Value};

pub use config::{Command, RunConfig};
use output::{document, to_json_string};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Compute(#[from] lspec_core::Error),
    #[error("io error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "ConfigError",
            CliError::Compute(e) => e.kind(),
            CliError::Io(_) => "IoError",
        }
    }

    /// Structured error document.
    pub fn to_json(&self) -> String {
        to_json_string(&document(json!({ "error": { "kind": self.kind(), "message": self.to_string() } })))
    }
}

/// Everything a run produces, rendered but not yet written.
pub struct Report {
    pub command: &'static str,
    pub pass: bool,
    /// Text for stdout.
    pub stdout: String,
    /// (file name, contents) for the artifact directory, manifest last.
    pub files: Vec<(String, String)>,
}

/// Echo of the resolved configuration.
fn manifest(config: &RunConfig, threads: Option<usize>, files: &[String], pass: bool) -> Result<Value, CliError> {
    let echo = serde_json::to_value(config).map_err(|e| CliError::Io(e.to_string()))?;
    Ok(document(json!({
        "command": config.command.name(),
        "config": echo,
        "threads": threads,
        "version": env!("CARGO_PKG_VERSION"),
        "artifacts": files,
        "pass": pass,
    })))
}

/// Validates, computes and renders; nothing touches the disk.
pub fn run(config: &RunConfig, progress: bool) -> Result<Report, CliError> {
    config.validate()?;
    let threads = config.resolved_threads()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    let outcome = pool.install(|| dispatch(config, progress))?;

    let name = config.command.name();
    let mut body = outcome.body;
    if let Value::Object(o) = &mut body {
        o.insert("command".into(), json!(name));
    }
    let doc = to_json_string(&document(body));
    let mut files = vec![(format!("{name}.json"), doc.clone())];
    if let Some(t) = &outcome.table {
        files.push((format!("{name}.csv"), t.to_csv()?));
    }
    let names: Vec<String> = files.iter().map(|(n, _)| n.clone()).collect();
    files.push(("manifest.json".into(), to_json_string(&manifest(config, threads, &names, outcome.pass)?)));
    Ok(Report { command: name, pass: outcome.pass, stdout: outcome.text.unwrap_or(doc), files })
}

fn dispatch(config: &RunConfig, progress: bool) -> Result<commands::Outcome, CliError> {
    use commands::*;
    match &config.command {
        Command::Curvature(a) => curvature_cmd(a),
        Command::Hadamard(a) => hadamard_cmd(a),
        Command::Elem(a) => elem_cmd(a),
        Command::ContourCheck(a) => contour_cmd(a),
        Command::Residues(a) => residues_cmd(a),
        Command::SpectralAction(a) => spectral_cmd(a),
        Command::UltrastaticFit(a) => fit_cmd(a),
        Command::Flow(a) => flow_cmd(a, config.seed),
        Command::Accept(a) => accept_cmd(a, progress),
    }
}

/// Writes the report's artifacts when an output directory is configured.
pub fn persist(config: &RunConfig, report: &Report) -> Result<(), CliError> {
    match &config.out {
        Some(dir) => output::write_artifacts(dir, &report.files),
        None => Ok(()),
    }
}
