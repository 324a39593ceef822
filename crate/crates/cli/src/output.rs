use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use randecho::Error;
use serde::Serialize;
use serde_json::Value;

pub const MANIFEST: &str = "manifest.json";

pub const EXIT_OK: u8 = 0;
pub const EXIT_CHECK: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_NUMERIC: u8 = 3;

/// A command that could not finish.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn config(message: impl Into<String>) -> Self {
        Self { code: EXIT_CONFIG, message: message.into() }
    }

    pub fn io(path: &Path, err: std::io::Error) -> Self {
        Self { code: EXIT_NUMERIC, message: format!("{}: {err}", path.display()) }
    }
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        let code = match err {
            Error::InsufficientSignal(_) => EXIT_CHECK,
            Error::Numeric(_) | Error::RankDeficient { .. } | Error::IntegratorUnstable { .. } => EXIT_NUMERIC,
            _ => EXIT_CONFIG,
        };
        Self { code, message: err.to_string() }
    }
}

/// How a command finished when it produced its outputs.
#[derive(Debug)]
pub struct Outcome {
    pub code: u8,
    pub message: Option<String>,
}

impl Outcome {
    pub fn ok() -> Self {
        Self { code: EXIT_OK, message: None }
    }

    pub fn check_failed(message: impl Into<String>) -> Self {
        Self { code: EXIT_CHECK, message: Some(message.into()) }
    }
}

fn now_ms() -> u128 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis()).unwrap_or(0)
}

/// Collects outputs of one run and writes them with a manifest.
pub struct RunWriter {
    dir: PathBuf,
    command: String,
    config_path: Option<String>,
    config: Value,
    master_seed: u64,
    started: u128,
    outputs: Vec<String>,
}

impl RunWriter {
    pub fn new(dir: &Path, command: &str, config_path: Option<&Path>, config: Value, master_seed: u64) -> Result<Self, Failure> {
        fs::create_dir_all(dir).map_err(|e| Failure::io(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            command: command.to_string(),
            config_path: config_path.map(|p| p.display().to_string()),
            config,
            master_seed,
            started: now_ms(),
            outputs: Vec::new(),
        })
    }

    pub fn text(&mut self, name: &str, body: &str) -> Result<(), Failure> {
        let path = self.dir.join(name);
        fs::write(&path, body).map_err(|e| Failure::io(&path, e))?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    /// Writes `value` with a leading `"manifest"` reference.
    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), Failure> {
        let mut doc = serde_json::Map::new();
        doc.insert("manifest".into(), Value::String(MANIFEST.into()));
        match serde_json::to_value(value).map_err(|e| Failure::config(e.to_string()))? {
            Value::Object(map) => doc.extend(map),
            other => {
                doc.insert("data".into(), other);
            }
        }
        let mut body = serde_json::to_string_pretty(&Value::Object(doc)).expect("JSON value serializes");
        body.push('\n');
        self.text(name, &body)
    }

    pub fn finish(self) -> Result<(), Failure> {
        let manifest = serde_json::json!({
            "tool": "randecho",
            "version": env!("CARGO_PKG_VERSION"),
            "command": self.command,
            "config_path": self.config_path,
            "config": self.config,
            "master_seed": self.master_seed,
            "started_unix_ms": self.started as u64,
            "finished_unix_ms": now_ms() as u64,
            "outputs": self.outputs,
        });
        let path = self.dir.join(MANIFEST);
        let mut body = serde_json::to_string_pretty(&manifest).expect("JSON value serializes");
        body.push('\n');
        fs::write(&path, body).map_err(|e| Failure::io(&path, e))
    }
}
