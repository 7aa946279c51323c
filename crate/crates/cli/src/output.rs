//! CSV formatting and the checksummed run manifest.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Shortest decimal string that parses back to exactly `v`.
///
/// Plain notation in `[1e-5, 1e16)`, exponent notation outside it.
pub fn fmt_f64(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return if v.is_nan() {
            "NaN".into()
        } else if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let a = v.abs();
    if (1e-5..1e16).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// In-memory CSV document with a fixed header.
#[derive(Debug, Clone)]
pub struct Csv {
    text: String,
    columns: usize,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut text = header.join(",");
        text.push('\n');
        Self {
            text,
            columns: header.len(),
        }
    }

    pub fn row(&mut self, fields: &[String]) {
        assert_eq!(fields.len(), self.columns, "CSV row width");
        let _ = writeln!(self.text, "{}", fields.join(","));
    }

    pub fn as_bytes(&self) -> &[u8] {
        self.text.as_bytes()
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Artifact {
    pub file: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    pub experiment_id: String,
    pub seed: u64,
    pub config_sha256: String,
    /// Verbatim copy of the experiment file.
    pub config: String,
    /// Values the run actually used after defaults and overrides.
    pub resolved: serde_json::Value,
    pub artifacts: Vec<Artifact>,
}

pub const MANIFEST_FILE: &str = "run-manifest.json";

/// Writes `bytes` to `dir/name` and returns its manifest entry.
pub fn write_artifact(dir: &Path, name: &str, bytes: &[u8]) -> io::Result<Artifact> {
    fs::write(dir.join(name), bytes)?;
    Ok(Artifact {
        file: name.into(),
        bytes: bytes.len(),
        sha256: sha256_hex(bytes),
    })
}

pub fn write_manifest(dir: &Path, manifest: &Manifest) -> io::Result<()> {
    let mut text = serde_json::to_string_pretty(manifest).map_err(io::Error::other)?;
    text.push('\n');
    fs::write(dir.join(MANIFEST_FILE), text)
}

/// Re-hashes every listed artifact and returns the files whose content no
/// longer matches.
pub fn verify_manifest(dir: &Path) -> io::Result<Vec<String>> {
    let text = fs::read_to_string(dir.join(MANIFEST_FILE))?;
    let manifest: Manifest = serde_json::from_str(&text).map_err(io::Error::other)?;
    let mut bad = Vec::new();
    for a in &manifest.artifacts {
        let bytes = fs::read(dir.join(&a.file))?;
        if bytes.len() != a.bytes || sha256_hex(&bytes) != a.sha256 {
            bad.push(a.file.clone());
        }
    }
    Ok(bad)
}
