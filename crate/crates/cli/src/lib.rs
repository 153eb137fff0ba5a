//! Batch front door for the lab: one experiment per invocation.
//!
//! A run reads a JSON config, validates it, executes the experiment inside
//! a rayon pool of the requested size and writes up to three artifacts:
//!
//! - `report.jsonl`: one record per line, each tagged with the config hash;
//! - `summary.csv`: tidy `config_hash,experiment,metric,value` rows;
//! - `manifest.json`: the canonical config, its hash, the seed and versions.
//!
//! Artifacts contain no timings, so equal configs give equal bytes.

pub mod config;
pub mod experiments;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

pub use config::{ExperimentConfig, ExperimentKind, OutputFormat, SCHEMA_VERSION};
pub use experiments::{run_experiment, ExperimentOutput};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error("run failed: {0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

impl From<vqalab_core::Error> for CliError {
    fn from(e: vqalab_core::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

fn io_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(format!("{}: {e}", path.display()))
}

/// Command-line overrides applied on top of the config file.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub out_dir: Option<PathBuf>,
    pub format: Option<OutputFormat>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub tool_version: &'static str,
    pub experiment: &'static str,
    pub config_hash: String,
    pub seed: u64,
    pub config: Value,
    pub artifacts: Vec<String>,
}

/// What a completed run produced.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub out_dir: PathBuf,
    pub config_hash: String,
    pub output: ExperimentOutput,
    pub artifacts: Vec<PathBuf>,
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    ExperimentConfig::from_json(&text)
}

/// Run `config` in a pool of `workers` threads (machine default if `None`).
pub fn execute(config: &ExperimentConfig, workers: Option<usize>) -> Result<ExperimentOutput, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        if w == 0 {
            return Err(CliError::Validation("--workers: must be at least 1".into()));
        }
        builder = builder.num_threads(w);
    }
    let pool = builder.build().map_err(|e| CliError::Runtime(e.to_string()))?;
    let output = pool.install(|| run_experiment(&config.experiment, config.seed))?;
    ensure_finite(&output)?;
    Ok(output)
}

fn finite_value(v: &Value) -> bool {
    match v {
        Value::Number(n) => n.as_f64().is_none_or(f64::is_finite),
        Value::Array(a) => a.iter().all(finite_value),
        Value::Object(m) => m.values().all(finite_value),
        _ => true,
    }
}

/// serde_json writes non-finite floats as `null`, so catch them first.
fn ensure_finite(output: &ExperimentOutput) -> Result<(), CliError> {
    if let Some((k, v)) = output.summary.iter().find(|(_, v)| !v.is_finite()) {
        return Err(CliError::Runtime(format!("metric `{k}` is not finite ({v})")));
    }
    for (i, r) in output.records.iter().enumerate() {
        if !finite_value(r) {
            return Err(CliError::Runtime(format!("report record {i} holds a non-finite number")));
        }
    }
    Ok(())
}

pub fn write_report<W: Write>(mut w: W, kind: ExperimentKind, hash: &str, output: &ExperimentOutput) -> std::io::Result<()> {
    for r in &output.records {
        let mut row = json!({ "config_hash": hash, "experiment": kind.name() });
        if let (Some(dst), Some(src)) = (row.as_object_mut(), r.as_object()) {
            dst.extend(src.iter().map(|(k, v)| (k.clone(), v.clone())));
        }
        serde_json::to_writer(&mut w, &row)?;
        w.write_all(b"\n")?;
    }
    let metrics: serde_json::Map<String, Value> = output.summary.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
    serde_json::to_writer(
        &mut w,
        &json!({ "config_hash": hash, "experiment": kind.name(), "record": "summary", "metrics": metrics }),
    )?;
    w.write_all(b"\n")
}

pub fn write_summary<W: Write>(w: W, kind: ExperimentKind, hash: &str, output: &ExperimentOutput) -> csv::Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(["config_hash", "experiment", "metric", "value"])?;
    for (k, v) in &output.summary {
        csv.write_record([hash, kind.name(), k.as_str(), v.to_string().as_str()])?;
    }
    csv.flush()?;
    Ok(())
}

/// Execute a loaded config and write its artifacts.
pub fn run_config(mut config: ExperimentConfig, opts: &RunOptions) -> Result<RunOutcome, CliError> {
    if let Some(s) = opts.seed {
        config.seed = s;
    }
    let format = opts.format.or(config.output.format).unwrap_or_default();
    let out_dir = opts
        .out_dir
        .clone()
        .or_else(|| config.output.dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("vqalab-out"));
    let hash = config.hash();
    let kind = config.experiment.kind();
    let output = execute(&config, opts.workers)?;

    fs::create_dir_all(&out_dir).map_err(|e| io_error(&out_dir, e))?;
    let mut artifacts = Vec::new();
    if format.jsonl() {
        let path = out_dir.join("report.jsonl");
        let f = fs::File::create(&path).map_err(|e| io_error(&path, e))?;
        write_report(std::io::BufWriter::new(f), kind, &hash, &output).map_err(|e| io_error(&path, e))?;
        artifacts.push(path);
    }
    if format.csv() {
        let path = out_dir.join("summary.csv");
        let f = fs::File::create(&path).map_err(|e| io_error(&path, e))?;
        write_summary(f, kind, &hash, &output).map_err(|e| io_error(&path, e))?;
        artifacts.push(path);
    }
    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        tool_version: env!("CARGO_PKG_VERSION"),
        experiment: kind.name(),
        config_hash: hash.clone(),
        seed: config.seed,
        config: config.canonical(),
        artifacts: artifacts
            .iter()
            .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
            .collect(),
    };
    let path = out_dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&path, text + "\n").map_err(|e| io_error(&path, e))?;
    artifacts.push(path);

    Ok(RunOutcome {
        out_dir,
        config_hash: hash,
        output,
        artifacts,
    })
}

/// Load, validate, execute and write; the CLI's `run` subcommand.
pub fn run(config_path: &Path, opts: &RunOptions) -> Result<RunOutcome, CliError> {
    run_config(load_config(config_path)?, opts)
}

/// The table printed by `vqalab list`.
pub fn list_experiments() -> String {
    let mut s = String::new();
    for k in ExperimentKind::ALL {
        s.push_str(&format!("{:<18} {}\n", k.name(), k.description()));
        for p in k.params() {
            match p.default {
                Some(d) => s.push_str(&format!("    {:<20} {} (default {d})\n", p.name, p.ty)),
                None => s.push_str(&format!("    {:<20} {}\n", p.name, p.ty)),
            }
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn non_finite_values_are_refused() {
        let ok = ExperimentOutput {
            records: vec![json!({ "x": 1.0, "nested": [0.5, { "y": 2 }] })],
            summary: vec![("m".into(), 0.25)],
        };
        assert!(ensure_finite(&ok).is_ok());
        let bad_metric = ExperimentOutput {
            records: vec![],
            summary: vec![("m".into(), f64::NAN)],
        };
        assert!(matches!(ensure_finite(&bad_metric), Err(CliError::Runtime(_))));
    }

    #[test]
    fn exit_codes_separate_validation_from_runtime() {
        assert_eq!(CliError::Validation(String::new()).exit_code(), 2);
        assert_eq!(CliError::Runtime(String::new()).exit_code(), 3);
    }
}
