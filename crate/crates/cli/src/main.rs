//! `nlw`: run one experiment from a TOML config plus command-line
//! overrides, write its artifacts and a `run.json` record.
//!
//! Exit status is 0 on success, 1 when the configuration is rejected or
//! the run cannot complete, and 2 when a verification check fails.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::Parser;
use serde_json::json;
use toml::{Table, Value};

use commands::Outcome;
use config::{parse_value, ExperimentConfig, RunError};

/// Numerical experiments for the radial nonlinear wave equation.
///
/// Usage: `nlw [--config FILE] [--seed N] [--out DIR] [--tol X] COMMAND [TARGET] [--key value]...`
/// where COMMAND is one of simulate, soliton, norms, verify, ladder,
/// channel, sweep. Each `--key value` overrides `key` in the command's
/// config section; values are parsed as TOML (`--values "[1, 2]"`).
/// `NLW_THREADS` caps the worker threads.
#[derive(Parser, Debug)]
#[command(name = "nlw", version)]
struct Cli {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(trailing_var_arg = true, allow_hyphen_values = true, value_name = "COMMAND [TARGET] [--key value]...")]
    args: Vec<String>,
}

const SWEEP_KEYS: [&str; 4] = ["base", "axis", "values", "fit"];

fn build(cli: Cli) -> Result<ExperimentConfig, RunError> {
    let mut args = cli.args.into_iter().peekable();
    let mut command = None;
    let mut target = None;
    if let Some(a) = args.next_if(|a| !a.starts_with("--")) {
        command = Some(a);
        if command.as_deref() == Some("verify") {
            target = args.next_if(|a| !a.starts_with("--"));
        }
    }
    let mut overrides: Vec<(String, Value)> = vec![];
    let (mut config_path, mut top) = (cli.config, Table::new());
    while let Some(flag) = args.next() {
        let Some(key) = flag.strip_prefix("--") else {
            return Err(RunError::invalid("args", format!("unexpected argument `{flag}`")));
        };
        let (key, raw) = match key.split_once('=') {
            Some((k, v)) => (k.to_string(), Some(v.to_string())),
            None => (key.to_string(), args.next_if(|a| !a.starts_with("--") || a.parse::<f64>().is_ok())),
        };
        let key = key.replace('-', "_");
        let value = raw.map(|r| parse_value(&r)).unwrap_or(Value::Boolean(true));
        match key.as_str() {
            "config" => config_path = Some(PathBuf::from(value.as_str().map(str::to_string).unwrap_or_else(|| value.to_string()))),
            "seed" | "tol" => {
                top.insert(key, value);
            }
            "out" | "output_dir" => {
                top.insert("output_dir".into(), Value::String(value.as_str().map(str::to_string).unwrap_or_else(|| value.to_string())));
            }
            _ => overrides.push((key, value)),
        }
    }
    let mut table = match &config_path {
        Some(p) => ExperimentConfig::load(p)?,
        None => Table::new(),
    };
    if let Some(c) = command {
        table.insert("command".into(), Value::String(c));
    }
    if let Some(t) = target {
        table.insert("target".into(), Value::String(t));
    }
    table.extend(top);
    if let Some(s) = cli.seed {
        table.insert("seed".into(), Value::Integer(s as i64));
    }
    if let Some(t) = cli.tol {
        table.insert("tol".into(), Value::Float(t));
    }
    if let Some(o) = cli.out {
        table.insert("output_dir".into(), Value::String(o.display().to_string()));
    }
    if !overrides.is_empty() {
        let command = table.get("command").and_then(Value::as_str).map(str::to_string).ok_or_else(|| RunError::invalid("command", "missing"))?;
        for (k, v) in overrides {
            let section = if command == "sweep" && !SWEEP_KEYS.contains(&k.as_str()) {
                let base = table.get("sweep").and_then(|s| s.get("base")).and_then(Value::as_str).map(str::to_string);
                base.ok_or_else(|| RunError::invalid("sweep.base", format!("missing, so `--{k}` has no section")))?
            } else {
                command.clone()
            };
            let entry = table.entry(section.clone()).or_insert_with(|| Value::Table(Table::new()));
            match entry {
                Value::Table(t) => {
                    t.insert(k, v);
                }
                _ => return Err(RunError::invalid(section, "must be a section")),
            }
        }
    }
    ExperimentConfig::from_table(table)
}

fn unix_now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

fn write_record(cfg: &ExperimentConfig, started: f64, status: &str, outcome: Option<&Outcome>, message: Option<String>) -> Result<(), RunError> {
    let record = json!({
        "tool": "nlw",
        "version": env!("CARGO_PKG_VERSION"),
        "config_hash": cfg.hash(),
        "config": cfg.canonical(),
        "started_unix": started,
        "finished_unix": unix_now(),
        "status": status,
        "message": message,
        "artifacts": outcome.map(|o| o.artifacts.clone()).unwrap_or_default(),
        "summary": outcome.map(|o| json!(o.summary)).unwrap_or(json!({})),
        "failures": outcome.map(|o| o.failures.clone()).unwrap_or_default(),
    });
    let text = serde_json::to_string_pretty(&record).map_err(RunError::failed)? + "\n";
    std::fs::write(cfg.output_dir.join("run.json"), text).map_err(|e| RunError::failed(format!("run.json: {e}")))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = std::env::var("NLW_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let cfg = match build(cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("invalid configuration: {e}");
            return ExitCode::from(1);
        }
    };
    let job = match commands::plan(&cfg) {
        Ok(j) => j,
        Err(e) => {
            eprintln!("invalid configuration: {e}");
            return ExitCode::from(1);
        }
    };
    if let Err(e) = std::fs::create_dir_all(&cfg.output_dir) {
        eprintln!("invalid configuration: output_dir: {}: {e}", cfg.output_dir.display());
        return ExitCode::from(1);
    }
    let started = unix_now();
    let (code, status, outcome, message) = match commands::execute(&job, &cfg, &cfg.output_dir) {
        Ok(o) if o.failures.is_empty() => (0, "ok", Some(o), None),
        Ok(o) => {
            for f in &o.failures {
                eprintln!("verification failed: {f}");
            }
            (2, "verification_failed", Some(o), None)
        }
        Err(e) => {
            eprintln!("error: {e}");
            (1, "error", None, Some(e.to_string()))
        }
    };
    if let Err(e) = write_record(&cfg, started, status, outcome.as_ref(), message) {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    if let Some(o) = &outcome {
        let summary = serde_json::to_string(&o.summary).unwrap_or_default();
        println!("{status}: {summary}");
    }
    ExitCode::from(code)
}
