//! Atomic artifact writing, SHA-256 digests and the run manifest.

use std::io::Write;
use std::path::{Path, PathBuf};

use ndelab::models::ProfileSolution;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

pub const PROFILE_HEADER: [&str; 6] = ["z", "g", "g1", "g2", "g3", "g4"];
pub const PROBE_HEADER: [&str; 2] = ["y0", "mismatch"];
pub const ENTROPY_HEADER: [&str; 2] = ["delta", "distance"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub parameters: serde_json::Map<String, serde_json::Value>,
    pub tool_version: String,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub wall_time_s: f64,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Shortest representation that parses back to the same f64.
pub fn num(v: f64) -> String {
    format!("{v:?}")
}

pub struct Outputs {
    dir: PathBuf,
    stem: String,
    pub written: Vec<FileDigest>,
}

impl Outputs {
    pub fn new(dir: PathBuf, stem: &str) -> Result<Self, CliError> {
        std::fs::create_dir_all(&dir)?;
        Ok(Self { dir, stem: stem.to_string(), written: Vec::new() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Writes through a temporary file in the same directory, then renames.
    pub fn write_bytes(&mut self, suffix: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
        let name = format!("{}{}", self.stem, suffix);
        let path = self.dir.join(&name);
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir)?;
        tmp.write_all(bytes)?;
        tmp.as_file().sync_all()?;
        tmp.persist(&path).map_err(|e| CliError::Io(e.error))?;
        self.written.push(FileDigest { path: name, sha256: sha256_hex(bytes) });
        Ok(path)
    }

    pub fn json<T: Serialize>(&mut self, value: &T) -> Result<PathBuf, CliError> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Output(e.to_string()))?;
        text.push('\n');
        self.write_bytes(".json", text.as_bytes())
    }

    pub fn csv(&mut self, suffix: &str, header: &[&str], rows: &[Vec<String>]) -> Result<PathBuf, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header).map_err(|e| CliError::Output(e.to_string()))?;
        for row in rows {
            w.write_record(row).map_err(|e| CliError::Output(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Output(e.to_string()))?;
        self.write_bytes(suffix, &bytes)
    }

    pub fn profile(&mut self, suffix: &str, profile: &ProfileSolution) -> Result<PathBuf, CliError> {
        let rows: Vec<Vec<String>> = (0..profile.len())
            .map(|i| std::iter::once(profile.grid[i]).chain(profile.row(i)).map(num).collect())
            .collect();
        self.csv(suffix, &PROFILE_HEADER, &rows)
    }

    pub fn manifest(&mut self, manifest: &RunManifest) -> Result<PathBuf, CliError> {
        let mut text = serde_json::to_string_pretty(manifest).map_err(|e| CliError::Output(e.to_string()))?;
        text.push('\n');
        let path = self.dir.join(format!("{}.manifest.json", self.stem));
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir)?;
        tmp.write_all(text.as_bytes())?;
        tmp.persist(&path).map_err(|e| CliError::Io(e.error))?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_of_empty_input() {
        assert_eq!(sha256_hex(b""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    }

    #[test]
    fn numbers_round_trip() {
        for v in [0.1, 1.0 / 105.0, 1e-300, -2.5e17] {
            assert_eq!(num(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn writes_are_recorded() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = Outputs::new(dir.path().to_path_buf(), "x").unwrap();
        out.csv(".csv", &ENTROPY_HEADER, &[vec!["0.1".into(), "2".into()]]).unwrap();
        let text = std::fs::read_to_string(dir.path().join("x.csv")).unwrap();
        assert_eq!(text, "delta,distance\n0.1,2\n");
        assert_eq!(out.written[0].sha256, sha256_hex(text.as_bytes()));
        // nothing but the artifact is left behind
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
