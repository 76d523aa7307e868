//! Output files and the run record. Every numeric artifact is plain
//! delimited text plus a JSON mirror; the run record carries the scenario
//! hash and per-file digests so reruns can be compared at a glance.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum StdoutFormat {
    /// Aligned plain-text tables.
    Text,
    /// Structured JSON records.
    Records,
}

pub struct OutputWriter {
    dir: PathBuf,
    files: Vec<(String, String)>, // (name, sha256)
}

impl OutputWriter {
    pub fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)
            .with_context(|| format!("creating output directory {}", dir.display()))?;
        Ok(OutputWriter { dir: dir.to_path_buf(), files: Vec::new() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        self.files.push((name.to_string(), hex_digest(bytes)));
        Ok(())
    }

    pub fn write_text(&mut self, name: &str, text: &str) -> Result<()> {
        self.write_bytes(name, text.as_bytes())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write_text(name, &text)
    }

    /// Two-column (or wider) numeric text with a `#`-prefixed header line.
    pub fn write_table(&mut self, name: &str, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
        let mut text = format!("# {}\n", header.join("\t"));
        for row in rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.9e}")).collect();
            text.push_str(&cells.join("\t"));
            text.push('\n');
        }
        self.write_text(name, &text)
    }

    pub fn finish(mut self, scenario_name: &str, scenario_text: &str, seed: u64) -> Result<()> {
        #[derive(Serialize)]
        struct FileRecord {
            file: String,
            sha256: String,
        }
        #[derive(Serialize)]
        struct RunRecord {
            scenario: String,
            scenario_sha256: String,
            tool_version: String,
            timestamp_utc: String,
            seed: u64,
            outputs: Vec<FileRecord>,
        }
        let record = RunRecord {
            scenario: scenario_name.to_string(),
            scenario_sha256: hex_digest(scenario_text.as_bytes()),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp_utc: time::OffsetDateTime::now_utc()
                .format(&time::format_description::well_known::Rfc3339)
                .unwrap_or_default(),
            seed,
            outputs: self
                .files
                .drain(..)
                .map(|(file, sha256)| FileRecord { file, sha256 })
                .collect(),
        };
        let mut text = serde_json::to_string_pretty(&record)?;
        text.push('\n');
        let path = self.dir.join("run_record.json");
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }
}

pub fn hex_digest(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}
