//! Self-describing CSV and JSON artifacts.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;

/// A table of numbers or short strings, written as RFC 4180 CSV.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_numbers(&mut self, row: &[f64]) {
        self.rows.push(row.iter().map(|v| v.to_string()).collect());
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }
}

pub fn config_hash(json: &str) -> String {
    hex::encode(Sha256::digest(json.as_bytes()))
}

/// CSV text with `#` header lines carrying the command and the resolved
/// config with its SHA-256.
pub fn render_csv(command: &str, cfg: &RunConfig, table: &Table) -> Result<String> {
    let json = cfg.to_json();
    let mut out = format!(
        "# fraclab {} {command}\n# config: {json}\n# config_sha256: {}\n",
        fraclab::VERSION,
        config_hash(&json)
    );
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(&table.columns)?;
    for r in &table.rows {
        w.write_record(r)?;
    }
    out.push_str(std::str::from_utf8(&w.into_inner().context("flushing csv")?)?);
    Ok(out)
}

/// Pretty JSON with the config hash attached.
pub fn render_json<T: Serialize>(command: &str, cfg: &RunConfig, body: &T) -> Result<String> {
    let json = cfg.to_json();
    let doc = serde_json::json!({
        "command": command,
        "config_sha256": config_hash(&json),
        "config": serde_json::from_str::<serde_json::Value>(&json)?,
        "report": body,
    });
    Ok(serde_json::to_string_pretty(&doc)? + "\n")
}

pub fn write_text(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            }
            std::fs::write(p, text).with_context(|| format!("writing {}", p.display()))
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

/// `<output>.<suffix>` next to the main artifact.
pub fn companion(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".");
    s.push(suffix);
    PathBuf::from(s)
}

/// Run metadata written next to the main artifact.
pub fn write_sidecar(path: &Path, cfg: &RunConfig, wall_time: f64) -> Result<()> {
    let doc = serde_json::json!({
        "config": serde_json::from_str::<serde_json::Value>(&cfg.to_json())?,
        "versions": {
            "fraclab": fraclab::VERSION,
            "fraclab-cli": env!("CARGO_PKG_VERSION"),
        },
        "seed": cfg.seed,
        "wall_time": wall_time,
    });
    write_text(Some(&companion(path, "json")), &(serde_json::to_string_pretty(&doc)? + "\n"))
}
