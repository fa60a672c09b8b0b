//! The report envelope. The `input` field echoes the parsed inputs in
//! canonical form and `inputSha256` hashes that echo, so identical inputs
//! hash identically no matter how the files were formatted.

use std::fs;
use std::path::Path;

use anyhow::Context;
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::Format;

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Report {
    pub command: String,
    pub version: String,
    pub input_sha256: String,
    pub input: Value,
    pub payload: Value,
}

pub fn build(command: &str, input: Value, payload: Value) -> Report {
    let canonical = serde_json::to_vec(&input).expect("input echo serializes");
    let digest = Sha256::digest(&canonical);
    let mut hex = String::with_capacity(64);
    for byte in digest {
        hex.push_str(&format!("{byte:02x}"));
    }
    Report {
        command: command.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        input_sha256: hex,
        input,
        payload,
    }
}

pub fn emit(report: &Report, out: Option<&Path>, format: Format) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(report).expect("report serializes");
    text.push('\n');
    if let Some(path) = out {
        fs::write(path, &text).with_context(|| format!("writing report to {}", path.display()))?;
    }
    match format {
        Format::Json if out.is_none() => print!("{text}"),
        Format::Json => {}
        Format::Table => print!("{}", render_table(report)),
    }
    Ok(())
}

/// One line per top-level payload entry; arrays get one line per element so
/// sweep rows read as a log.
fn render_table(report: &Report) -> String {
    let mut lines = Vec::new();
    lines.push(format!("command        {}", report.command));
    lines.push(format!("version        {}", report.version));
    lines.push(format!("input sha256   {}", report.input_sha256));
    match &report.payload {
        Value::Object(map) => {
            for (key, value) in map {
                match value {
                    Value::Array(items) if items.len() > 1 => {
                        lines.push(format!("{key}:"));
                        for item in items {
                            lines.push(format!("  {}", compact(item)));
                        }
                    }
                    other => lines.push(format!("{key:<14} {}", compact(other))),
                }
            }
        }
        other => lines.push(compact(other)),
    }
    lines.push(String::new());
    lines.join("\n")
}

fn compact(value: &Value) -> String {
    match value {
        Value::String(s) => s.clone(),
        other => serde_json::to_string(other).expect("value serializes"),
    }
}
