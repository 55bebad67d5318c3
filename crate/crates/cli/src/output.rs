//! Result files: CSV with a provenance header, JSON reports and an append-only JSONL log.
//!
//! Every file is written to a temporary sibling and renamed into place.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use kinetic_interface::report::ExperimentReport;
use serde::Serialize;
use tempfile::NamedTempFile;

/// Provenance shared by every file of one run. Holds no wall-clock data, so reruns are
/// byte-identical.
#[derive(Clone, Debug, Serialize)]
pub struct Provenance {
    pub subcommand: String,
    pub config_sha256: String,
    pub seed: u64,
    /// Effective parameters after flag overrides.
    pub params: serde_json::Value,
}

impl Provenance {
    /// `# key: value` lines placed above the CSV column header.
    pub fn header(&self) -> String {
        format!(
            "# config_sha256: {}\n# subcommand: {}\n# seed: {}\n# params: {}\n",
            self.config_sha256, self.subcommand, self.seed, self.params
        )
    }
}

fn parent_dir(path: &Path) -> &Path {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    }
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = parent_dir(path);
    fs::create_dir_all(dir)?;
    let mut tmp = NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// CSV bytes of `report` below the provenance header and the report notes.
pub fn csv_bytes(prov: &Provenance, report: &ExperimentReport) -> Result<Vec<u8>, csv::Error> {
    let mut head = prov.header();
    for (k, v) in &report.notes {
        head.push_str(&format!("# {k}: {v}\n"));
    }
    let mut w = csv::Writer::from_writer(head.into_bytes());
    w.write_record(&report.columns)?;
    for row in &report.rows {
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    w.into_inner().map_err(|e| csv::Error::from(e.into_error()))
}

pub fn write_csv(path: &Path, prov: &Provenance, report: &ExperimentReport) -> std::io::Result<()> {
    let bytes = csv_bytes(prov, report).map_err(std::io::Error::other)?;
    write_atomic(path, &bytes)
}

/// Pretty JSON with the provenance embedded under `provenance`.
pub fn write_json<T: Serialize>(path: &Path, prov: &Provenance, body: &T) -> std::io::Result<()> {
    let value = serde_json::json!({ "provenance": prov, "report": body });
    let mut text = serde_json::to_string_pretty(&value).map_err(std::io::Error::other)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// One line of the experiment log.
#[derive(Clone, Debug, Serialize)]
pub struct LogRecord<'a> {
    #[serde(flatten)]
    pub provenance: &'a Provenance,
    pub wall_time_s: f64,
    pub exit_code: i32,
    pub outputs: Vec<String>,
    pub summary: serde_json::Value,
}

/// Appends one record to the JSONL log, rewriting the file atomically.
pub fn append_log(path: &Path, record: &LogRecord<'_>) -> std::io::Result<()> {
    let mut bytes = match fs::read(path) {
        Ok(b) => b,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Vec::new(),
        Err(e) => return Err(e),
    };
    if bytes.last().is_some_and(|b| *b != b'\n') {
        bytes.push(b'\n');
    }
    serde_json::to_writer(&mut bytes, record).map_err(std::io::Error::other)?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

/// Log location: `log` resolved against the directory of `out`, else `experiments.jsonl` there.
pub fn log_path(out: &Path, log: Option<&str>) -> PathBuf {
    let name = Path::new(log.unwrap_or("experiments.jsonl"));
    if name.is_absolute() {
        name.to_path_buf()
    } else {
        parent_dir(out).join(name)
    }
}
