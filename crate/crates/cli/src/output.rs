//! File output. All writes for a run go through one [`Emitter`], called
//! from the main thread after the parallel solves have returned.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use binarise::classicality::{verify_certificate, Certificate};
use binarise::scenarios::CorrelationObject;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Visibilities in machine output are rounded to `1 / V_SCALE`.
pub const V_SCALE: f64 = 1e6;

pub fn round_v(v: f64) -> f64 {
    // dividing by the exact scale yields the double nearest the decimal;
    // adding 0.0 turns -0.0 into 0.0
    (v * V_SCALE).round() / V_SCALE + 0.0
}

pub fn unix_seconds() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub label: String,
    pub v_multi: Option<f64>,
    pub v_bin: Option<f64>,
    /// Other reported numbers, keyed by name.
    pub values: serde_json::Map<String, serde_json::Value>,
    pub solve_time: f64,
    /// Certificate files, relative to the run directory.
    pub certificates: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: serde_json::Value,
    pub seeds: Vec<u64>,
    pub software_version: String,
    pub started_at: u64,
    pub finished_at: u64,
    pub instances: Vec<InstanceRecord>,
}

impl RunManifest {
    pub fn new(command: &str, parameters: serde_json::Value, seeds: Vec<u64>) -> Self {
        Self {
            command: command.into(),
            parameters,
            seeds,
            software_version: env!("CARGO_PKG_VERSION").into(),
            started_at: unix_seconds(),
            finished_at: 0,
            instances: Vec::new(),
        }
    }
}

pub struct Emitter {
    dir: PathBuf,
}

impl Emitter {
    pub fn create(dir: &Path) -> CliResult<Self> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Self { dir: dir.to_path_buf() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn write_text(&self, name: &str, text: &str) -> CliResult<PathBuf> {
        let path = self.path(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
        }
        fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> CliResult<PathBuf> {
        let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Invariant(e.to_string()))?;
        self.write_text(name, &text)
    }

    pub fn write_csv<T: Serialize>(&self, name: &str, header: &[&str], rows: &[T]) -> CliResult<PathBuf> {
        let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
        let io = |e: csv::Error| CliError::io(&self.path(name), e);
        writer.write_record(header).map_err(io)?;
        for row in rows {
            writer.serialize(row).map_err(io)?;
        }
        let bytes = writer.into_inner().map_err(|e| CliError::io(&self.path(name), e))?;
        self.write_text(name, &String::from_utf8(bytes).expect("csv output is UTF-8"))
    }

    /// Writes the certificate and the object it certifies after checking
    /// that the pair verifies. Returns the certificate file name.
    pub fn write_certified(
        &self,
        stem: &str,
        certificate: &Certificate,
        object: &CorrelationObject,
    ) -> CliResult<String> {
        let report = verify_certificate(certificate, object)?;
        if !report.passed {
            return Err(CliError::Invariant(format!(
                "certificate {stem} fails self-verification: {}",
                report.messages.join("; ")
            )));
        }
        let cert_name = format!("{stem}.certificate.json");
        self.write_text(&cert_name, &certificate.to_json()?)?;
        self.write_text(&format!("{stem}.object.json"), &object.to_json()?)?;
        Ok(cert_name)
    }

    pub fn finish_manifest(&self, name: &str, mut manifest: RunManifest) -> CliResult<PathBuf> {
        manifest.finished_at = unix_seconds();
        self.write_json(name, &manifest)
    }
}
