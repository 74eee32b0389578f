//! Output directory bookkeeping: written files, timings, tolerances, checks.

use crate::emit::Record;
use crate::error::{LabError, Result};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use std::time::Instant;

pub const MANIFEST_FILE: &str = "manifest.txt";

pub fn code_version() -> String {
    format!("aclab {}", env!("CARGO_PKG_VERSION"))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FileEntry {
    pub name: String,
    pub sha256: String,
    pub bytes: usize,
}

/// An in-run assertion and its outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default)]
pub struct Manifest {
    pub config_hash: String,
    pub version: String,
    pub files: Vec<FileEntry>,
    pub timings: Vec<(String, f64)>,
    pub tolerances: Vec<(String, f64)>,
    pub arbitration: Vec<String>,
    pub checks: Vec<Check>,
}

impl Manifest {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn render(&self) -> String {
        let mut lines = vec![Record::new("manifest")
            .text("config_hash", &self.config_hash)
            .text("version", &self.version)
            .int("files", self.files.len() as i64)
            .flag("passed", self.passed())
            .line()];
        for f in &self.files {
            lines.push(
                Record::new("file").text("name", &f.name).text("sha256", &f.sha256).int("bytes", f.bytes as i64).line(),
            );
        }
        for (op, s) in &self.timings {
            lines.push(Record::new("timing").text("op", op).float("seconds", *s).line());
        }
        for (name, v) in &self.tolerances {
            lines.push(Record::new("tolerance").text("name", name).float("value", *v).line());
        }
        for a in &self.arbitration {
            lines.push(Record::new("arbitration").text("entry", a).line());
        }
        for c in &self.checks {
            lines.push(Record::new("check").text("name", &c.name).flag("passed", c.passed).text("detail", &c.detail).line());
        }
        lines.join("\n") + "\n"
    }
}

/// Writes files into one run directory and keeps the manifest in step.
#[derive(Debug)]
pub struct Artifacts {
    dir: PathBuf,
    manifest: Manifest,
}

impl Artifacts {
    pub fn create(dir: &Path, config_hash: &str) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|source| LabError::Io { path: dir.display().to_string(), source })?;
        Ok(Self {
            dir: dir.to_path_buf(),
            manifest: Manifest { config_hash: config_hash.into(), version: code_version(), ..Default::default() },
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, contents: impl AsRef<[u8]>) -> Result<()> {
        let bytes = contents.as_ref();
        let path = self.dir.join(name);
        std::fs::write(&path, bytes).map_err(|source| LabError::Io { path: path.display().to_string(), source })?;
        let entry = FileEntry { name: name.into(), sha256: sha256_hex(bytes), bytes: bytes.len() };
        match self.manifest.files.iter_mut().find(|f| f.name == name) {
            Some(f) => *f = entry,
            None => self.manifest.files.push(entry),
        }
        Ok(())
    }

    /// Write records one per line.
    pub fn write_records(&mut self, name: &str, records: &[Record]) -> Result<()> {
        let text: String = records.iter().map(|r| r.line() + "\n").collect();
        self.write(name, text)
    }

    pub fn timed<T>(&mut self, op: &str, f: impl FnOnce() -> T) -> T {
        let t0 = Instant::now();
        let out = f();
        self.manifest.timings.push((op.into(), t0.elapsed().as_secs_f64()));
        out
    }

    pub fn tolerance(&mut self, name: &str, value: f64) {
        self.manifest.tolerances.push((name.into(), value));
    }

    pub fn arbitrate(&mut self, entry: impl Into<String>) {
        self.manifest.arbitration.push(entry.into());
    }

    pub fn check(&mut self, name: &str, passed: bool, detail: impl Into<String>) -> bool {
        self.manifest.checks.push(Check { name: name.into(), passed, detail: detail.into() });
        passed
    }

    /// Write the manifest last; it indexes everything written before it.
    pub fn finish(mut self) -> Result<Manifest> {
        let text = self.manifest.render();
        let path = self.dir.join(MANIFEST_FILE);
        std::fs::write(&path, text).map_err(|source| LabError::Io { path: path.display().to_string(), source })?;
        Ok(std::mem::take(&mut self.manifest))
    }
}

/// Re-hash every listed file and report the names that no longer match.
pub fn verify_manifest(dir: &Path) -> Result<Vec<String>> {
    let path = dir.join(MANIFEST_FILE);
    let text = std::fs::read_to_string(&path).map_err(|source| LabError::Io { path: path.display().to_string(), source })?;
    let mut bad = Vec::new();
    for line in text.lines().filter(|l| l.starts_with("record=file ")) {
        let field = |k: &str| {
            line.split(' ').find_map(|p| p.strip_prefix(k).and_then(|r| r.strip_prefix('='))).unwrap_or("")
        };
        let name = field("name");
        let ok = std::fs::read(dir.join(name)).map(|b| sha256_hex(&b) == field("sha256")).unwrap_or(false);
        if !ok {
            bad.push(name.to_string());
        }
    }
    Ok(bad)
}
