use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    /// `measured ≤ tolerance`
    Le,
    /// `measured ≥ tolerance`
    Ge,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Assertion {
    pub name: String,
    pub pass: bool,
    pub measured: f64,
    pub relation: Relation,
    pub tolerance: f64,
}

impl Assertion {
    pub fn le(name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Self { name: name.into(), pass: measured <= tolerance, measured, relation: Relation::Le, tolerance }
    }

    pub fn ge(name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Self { name: name.into(), pass: measured >= tolerance, measured, relation: Relation::Ge, tolerance }
    }

    pub fn line(&self) -> String {
        let rel = match self.relation {
            Relation::Le => "<=",
            Relation::Ge => ">=",
        };
        let tag = if self.pass { "PASS" } else { "FAIL" };
        format!("{tag} {}: {:e} {rel} {:e}", self.name, self.measured, self.tolerance)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FileRecord {
    pub name: String,
    pub bytes: usize,
    pub sha256: String,
}

impl FileRecord {
    pub fn of(name: &str, contents: &[u8]) -> Self {
        Self { name: name.to_string(), bytes: contents.len(), sha256: hex(&Sha256::digest(contents)) }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub config: ExperimentConfig,
    /// SHA-256 of `blob <len>\0<canonical config JSON>`, framed like a git object.
    pub input_hash: String,
    pub wall_time_s: f64,
    pub files: Vec<FileRecord>,
    pub assertions: Vec<Assertion>,
    /// `Some` when the run consulted a length-spectrum cache.
    pub cache_hit: Option<bool>,
    pub notes: Vec<String>,
}

impl RunReport {
    pub fn all_pass(&self) -> bool {
        self.assertions.iter().all(|a| a.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Hash of the config with keys in sorted order, so formatting does not matter.
pub fn input_hash(config: &ExperimentConfig) -> String {
    let canonical =
        serde_json::to_vec(&serde_json::to_value(config).expect("config serializes")).expect("value serializes");
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", canonical.len()).as_bytes());
    h.update(&canonical);
    hex(&h.finalize())
}
