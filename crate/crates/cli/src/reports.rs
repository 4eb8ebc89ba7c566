//! Report emission: deterministic CSV and JSON with an embedded metadata
//! block (version, resolved config, arithmetic mode, tolerances, seed).

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{json, Value};

/// Metadata attached to every report.
#[derive(Debug, Clone, Serialize)]
pub struct Meta {
    pub version: &'static str,
    pub command: String,
    /// The fully resolved configuration that produced the output.
    pub config: Value,
    /// "exact" or "float".
    pub mode: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub details: Option<Value>,
}

impl Meta {
    pub fn new(command: &str, config: Value, mode: &'static str, tolerance: Option<f64>, seed: u64) -> Meta {
        Meta {
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            config,
            mode,
            tolerance,
            seed,
            details: None,
        }
    }

    pub fn with_extras(mut self, details: Value) -> Meta {
        self.details = Some(details);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Format> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => anyhow::bail!("unknown format {other:?} (expected csv or json)"),
        }
    }
}

/// Writes CSV rows (header + records, '\n' line endings, '.' decimals) to
/// `path`, or to stdout when absent. The metadata block goes to
/// `<path>.meta.json`, or to stderr in stdout mode.
pub fn emit_csv(
    path: Option<&Path>,
    header: &str,
    rows: impl Iterator<Item = String>,
    meta: &Meta,
) -> Result<()> {
    let mut body = String::new();
    body.push_str(header);
    body.push('\n');
    for row in rows {
        body.push_str(&row);
        body.push('\n');
    }
    let meta_json = serde_json::to_string_pretty(meta)?;
    match path {
        Some(p) => {
            std::fs::write(p, body).with_context(|| format!("writing {}", p.display()))?;
            let meta_path = meta_sibling(p);
            std::fs::write(&meta_path, meta_json + "\n")
                .with_context(|| format!("writing {}", meta_path.display()))?;
        }
        None => {
            std::io::stdout().write_all(body.as_bytes())?;
            eprintln!("{meta_json}");
        }
    }
    Ok(())
}

/// Writes {"meta": …, "data": …} to `path` or stdout.
pub fn emit_json<T: Serialize>(path: Option<&Path>, data: &T, meta: &Meta) -> Result<()> {
    let doc = json!({ "meta": meta, "data": data });
    let text = serde_json::to_string_pretty(&doc)? + "\n";
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

pub fn meta_sibling(path: &Path) -> PathBuf {
    let mut os = path.as_os_str().to_owned();
    os.push(".meta.json");
    PathBuf::from(os)
}
