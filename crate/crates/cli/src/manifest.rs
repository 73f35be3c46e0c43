//! Run manifests: the configuration, root seed and hashes of every input and
//! output file, enough to rerun a command and compare results byte for byte.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Serialize)]
pub struct FileRecord {
    pub path: PathBuf,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub args: Vec<String>,
    pub seed: u64,
    pub config: serde_json::Value,
    pub inputs: Vec<FileRecord>,
    pub outputs: Vec<FileRecord>,
}

pub fn hash_file(path: &Path) -> std::io::Result<FileRecord> {
    let mut f = File::open(path)?;
    let mut h = Sha256::new();
    let mut buf = [0u8; 1 << 16];
    let mut bytes = 0u64;
    loop {
        let n = f.read(&mut buf)?;
        if n == 0 {
            break;
        }
        bytes += n as u64;
        h.update(&buf[..n]);
    }
    Ok(FileRecord { path: path.to_path_buf(), bytes, sha256: format!("{:x}", h.finalize()) })
}

/// Tracks the files one command reads and writes.
pub struct Run {
    manifest: Manifest,
}

impl Run {
    pub fn new(command: &str, seed: u64, config: &impl Serialize) -> Self {
        Self {
            manifest: Manifest {
                tool: env!("CARGO_PKG_NAME").into(),
                version: env!("CARGO_PKG_VERSION").into(),
                command: command.into(),
                args: std::env::args().skip(1).collect(),
                seed,
                config: serde_json::to_value(config).unwrap_or(serde_json::Value::Null),
                inputs: Vec::new(),
                outputs: Vec::new(),
            },
        }
    }

    /// Record an input file; fails if it cannot be read.
    pub fn input(&mut self, path: &Path) -> CliResult<()> {
        let rec = hash_file(path).map_err(|e| CliError::input(path, e))?;
        self.manifest.inputs.push(rec);
        Ok(())
    }

    pub fn outputs(&self) -> usize {
        self.manifest.outputs.len()
    }

    fn create(path: &Path) -> CliResult<BufWriter<File>> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| CliError::output(dir, e))?;
        }
        Ok(BufWriter::new(File::create(path).map_err(|e| CliError::output(path, e))?))
    }

    fn record(&mut self, path: &Path) -> CliResult<()> {
        let rec = hash_file(path).map_err(|e| CliError::output(path, e))?;
        log::info!("wrote {}", path.display());
        self.manifest.outputs.push(rec);
        Ok(())
    }

    pub fn write_bytes(&mut self, path: &Path, bytes: &[u8]) -> CliResult<()> {
        let mut w = Self::create(path)?;
        w.write_all(bytes).and_then(|_| w.flush()).map_err(|e| CliError::output(path, e))?;
        drop(w);
        self.record(path)
    }

    pub fn write_json(&mut self, path: &Path, value: &impl Serialize) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(value).map_err(tubelet::Error::from)?;
        text.push('\n');
        self.write_bytes(path, text.as_bytes())
    }

    /// Write through a core serializer.
    pub fn write_with(
        &mut self,
        path: &Path,
        f: impl FnOnce(&mut BufWriter<File>) -> tubelet::Result<()>,
    ) -> CliResult<()> {
        let mut w = Self::create(path)?;
        f(&mut w).map_err(|e| match e {
            tubelet::Error::Io(io) => CliError::output(path, io),
            other => CliError::Core(other),
        })?;
        w.flush().map_err(|e| CliError::output(path, e))?;
        drop(w);
        self.record(path)
    }

    /// Record a file written by someone else (for example a field and its sidecar).
    pub fn written(&mut self, path: &Path) -> CliResult<()> {
        self.record(path)
    }

    pub fn finish(self, path: &Path) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(&self.manifest).map_err(tubelet::Error::from)?;
        text.push('\n');
        let mut w = Self::create(path)?;
        w.write_all(text.as_bytes()).and_then(|_| w.flush()).map_err(|e| CliError::output(path, e))?;
        log::info!("wrote {}", path.display());
        Ok(())
    }
}

/// `<file>.manifest.json` next to a single output file.
pub fn beside(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}
