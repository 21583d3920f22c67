//! Configuration-driven experiment runs over the `speclab` modules.

pub mod config;
pub mod pipelines;
pub mod report;

use std::fs;
use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};

use speclab::arith::{build_length_spectrum, GroupParams, WeightMode, WeightedLengthSpectrum};

pub use config::{ConfigError, ExperimentConfig, Kind, Params};
pub use report::{Assertion, FileRecord, RunReport};

pub const REPORT_FILE: &str = "report.json";

/// Validates the config, runs its pipeline and writes the CSVs and `report.json`.
///
/// Validation and computation finish before anything is written, so a failed run
/// leaves the output directory untouched.
pub fn run_experiment(config: &ExperimentConfig, verify: bool) -> Result<RunReport> {
    let params = config.validate()?;
    let start = Instant::now();
    let out = pipelines::run(&params, config.seed, verify).with_context(|| format!("{} pipeline", config.kind))?;
    let wall_time_s = start.elapsed().as_secs_f64();

    let dir = &config.output_dir;
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut files = Vec::new();
    for (name, contents) in &out.artifacts {
        let path = dir.join(name);
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        files.push(FileRecord::of(name, contents.as_bytes()));
    }
    for (path, contents) in &out.external {
        write_file(path, contents)?;
        files.push(FileRecord::of(&path.display().to_string(), contents.as_bytes()));
    }
    let report = RunReport {
        config: config.clone(),
        input_hash: report::input_hash(config),
        wall_time_s,
        files,
        assertions: out.assertions,
        cache_hit: out.cache_hit,
        notes: out.notes,
    };
    let path = dir.join(REPORT_FILE);
    fs::write(&path, report.to_json()).with_context(|| format!("writing {}", path.display()))?;
    Ok(report)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

#[derive(Debug)]
pub enum CacheStatus {
    Loaded(WeightedLengthSpectrum),
    Missing,
}

/// Reads a length-spectrum cache; a missing file is not an error.
pub fn load_cache(path: &Path, expect: Option<(i64, i64, i64)>) -> Result<CacheStatus> {
    if !path.exists() {
        return Ok(CacheStatus::Missing);
    }
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let s =
        WeightedLengthSpectrum::from_cache_str(&text, expect).with_context(|| format!("loading {}", path.display()))?;
    Ok(CacheStatus::Loaded(s))
}

/// Enumerates the length spectrum of `Γ(A, p)` and writes it to `path`.
pub fn cache_length_spectrum(
    a: i64,
    p: i64,
    m_max: i64,
    bx: i64,
    mode: WeightMode,
    seed: u64,
    path: &Path,
) -> Result<WeightedLengthSpectrum> {
    let group = GroupParams::new(a, p)?;
    let s = build_length_spectrum(group, m_max, bx, mode, seed)?;
    write_file(path, &s.to_cache_string())?;
    Ok(s)
}
