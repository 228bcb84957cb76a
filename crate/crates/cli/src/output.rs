//! Report files. JSON for verdicts, CSV for series, every file written to a
//! temporary name first and renamed into place.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

use crate::instance::SCHEMA_VERSION;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Solved,
    ResidualFloor,
    Infeasible,
}

impl Verdict {
    pub fn from_pass(pass: bool) -> Self {
        if pass {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn exit_code(self) -> u8 {
        match self {
            Verdict::Pass | Verdict::Solved => 0,
            Verdict::Fail | Verdict::ResidualFloor | Verdict::Infeasible => 2,
        }
    }
}

/// An extra file produced by a command, next to `report.json`.
pub struct Artifact {
    pub name: &'static str,
    pub bytes: Vec<u8>,
}

pub struct Outcome {
    pub verdict: Verdict,
    pub result: serde_json::Value,
    pub artifacts: Vec<Artifact>,
}

/// The deterministic part of a run. Timestamps live in the manifest only.
#[derive(Serialize)]
pub struct Report<'a> {
    pub schema_version: u32,
    pub command: &'a str,
    pub instance_sha256: &'a str,
    pub seed: u64,
    pub verdict: Verdict,
    pub result: &'a serde_json::Value,
}

impl<'a> Report<'a> {
    pub fn new(command: &'a str, instance_sha256: &'a str, seed: u64, outcome: &'a Outcome) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command,
            instance_sha256,
            seed,
            verdict: outcome.verdict,
            result: &outcome.result,
        }
    }
}

#[derive(Serialize)]
pub struct Manifest<'a, C: Serialize> {
    pub schema_version: u32,
    pub command: &'a str,
    pub instance_sha256: &'a str,
    pub instance_name: Option<&'a str>,
    pub instance_description: Option<&'a str>,
    pub config: &'a C,
    pub started_at: String,
    pub finished_at: String,
    pub wall_time_s: f64,
    pub exit_code: u8,
    pub files: Vec<&'a str>,
}

pub fn to_json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Writes `bytes` to `dir/name` through a temporary file in the same
/// directory, so readers never see a partial file.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf> {
    let target = dir.join(name);
    let tmp = dir.join(format!(".{name}.tmp-{}", std::process::id()));
    let mut file = fs::File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
    file.write_all(bytes)?;
    file.sync_all()?;
    drop(file);
    fs::rename(&tmp, &target).with_context(|| format!("renaming into {}", target.display()))?;
    Ok(target)
}

/// CSV with a header row; floats use the shortest round-trip form.
pub fn csv_bytes<I>(header: &[String], rows: I) -> Result<Vec<u8>>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    Ok(w.into_inner().map_err(|e| e.into_error())?)
}

pub fn coord_header(prefix: &[&str], n: usize, suffix: &[&str]) -> Vec<String> {
    prefix
        .iter()
        .map(|s| s.to_string())
        .chain((0..n).map(|i| format!("x{i}")))
        .chain(suffix.iter().map(|s| s.to_string()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_leaves_no_temp_file() {
        let dir = tempfile::tempdir().unwrap();
        write_atomic(dir.path(), "a.json", b"{}").unwrap();
        write_atomic(dir.path(), "a.json", b"[]").unwrap();
        let names: Vec<_> = fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
        assert_eq!(names, vec!["a.json"]);
        assert_eq!(fs::read(dir.path().join("a.json")).unwrap(), b"[]");
    }

    #[test]
    fn csv_layout() {
        let bytes = csv_bytes(&coord_header(&["set"], 2, &[]), vec![vec!["level".into(), "0.5".into(), "-1".into()]]).unwrap();
        assert_eq!(String::from_utf8(bytes).unwrap(), "set,x0,x1\nlevel,0.5,-1\n");
    }

    #[test]
    fn exit_codes() {
        assert_eq!(Verdict::Solved.exit_code(), 0);
        assert_eq!(Verdict::ResidualFloor.exit_code(), 2);
        assert_eq!(Verdict::from_pass(false).exit_code(), 2);
    }
}
