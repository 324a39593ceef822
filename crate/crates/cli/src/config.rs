use std::fs;
use std::path::Path;

use randecho::protocols::ExperimentConfig;
use serde_json::Value;

use crate::output::Failure;

/// Applies `a.b.c=value` to a JSON object, creating intermediate objects.
pub fn apply_override(doc: &mut Value, spec: &str) -> Result<(), Failure> {
    let (key, raw) = spec.split_once('=').ok_or_else(|| Failure::config(format!("--set `{spec}`: expected KEY=VALUE")))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Failure::config(format!("--set `{spec}`: empty key segment")));
    }
    let mut cursor = doc;
    for (i, part) in parts.iter().enumerate() {
        let map = cursor
            .as_object_mut()
            .ok_or_else(|| Failure::config(format!("--set `{spec}`: `{}` is not an object", parts[..i].join("."))))?;
        if i + 1 == parts.len() {
            map.insert((*part).to_string(), value);
            return Ok(());
        }
        cursor = map.entry((*part).to_string()).or_insert_with(|| Value::Object(Default::default()));
    }
    unreachable!("loop returns on the last segment")
}

/// Reads, overrides and validates an experiment config.
///
/// Returns the config together with its resolved JSON form.
pub fn load(
    path: Option<&Path>,
    overrides: &[String],
    seed: Option<u64>,
    default_protocol: &str,
) -> Result<(ExperimentConfig, Value), Failure> {
    let path = path.ok_or_else(|| Failure::config("--config PATH is required"))?;
    let text = fs::read_to_string(path).map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
    let mut doc: Value =
        serde_json::from_str(&text).map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
    if !doc.is_object() {
        return Err(Failure::config(format!("{}: top level must be a JSON object", path.display())));
    }
    for spec in overrides {
        apply_override(&mut doc, spec)?;
    }
    if let Some(s) = seed {
        doc["seed"] = Value::from(s);
    }
    if doc.get("protocol").is_none() {
        doc["protocol"] = Value::String(default_protocol.to_string());
    }
    let cfg: ExperimentConfig = serde_path_to_error::deserialize(doc.clone()).map_err(|e| {
        let field = e.path().to_string();
        let inner = e.into_inner();
        if field == "." {
            Failure::config(format!("{}: {inner}", path.display()))
        } else {
            Failure::config(format!("{}: field `{field}`: {inner}", path.display()))
        }
    })?;
    cfg.validate().map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
    let resolved = serde_json::to_value(&cfg).expect("config serializes");
    Ok((cfg, resolved))
}
