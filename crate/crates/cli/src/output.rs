//! File writers and run manifests.

use std::io;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::ser::{CompactFormatter, Formatter};
use sha2::{Digest, Sha256};

use crate::CliError;

/// Compact JSON with every float written to 17 significant digits.
struct Sig17;

impl Formatter for Sig17 {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        CompactFormatter.write_f64(writer, value as f64)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sig17);
    value.serialize(&mut ser).map_err(canonica::Error::from)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

/// Writes files under one output directory and remembers what was written.
pub struct Outputs {
    dir: PathBuf,
    written: Vec<String>,
}

impl Outputs {
    pub fn new(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Write { path: dir.display().to_string(), source })?;
        Ok(Outputs { dir: dir.to_path_buf(), written: Vec::new() })
    }

    /// Relative paths land in the output directory.
    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.dir.join(path)
        }
    }

    pub fn write(&mut self, path: &Path, contents: &str) -> Result<(), CliError> {
        let full = self.resolve(path);
        if let Some(parent) = full.parent() {
            std::fs::create_dir_all(parent).map_err(|source| CliError::Write { path: parent.display().to_string(), source })?;
        }
        std::fs::write(&full, contents).map_err(|source| CliError::Write { path: full.display().to_string(), source })?;
        self.written.push(path.display().to_string());
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, path: &Path, value: &T) -> Result<(), CliError> {
        let text = to_json(value)?;
        self.write(path, &text)
    }

    pub fn written(&self) -> &[String] {
        &self.written
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config_digest: String,
    pub seed: u64,
    pub tool_version: String,
    pub outputs: Vec<String>,
    /// Seconds since the Unix epoch; not part of the digest.
    pub timestamp: u64,
}

/// SHA-256 of the configuration serialised with sorted keys.
pub fn config_digest<T: Serialize>(config: &T) -> Result<String, CliError> {
    let value = serde_json::to_value(config).map_err(canonica::Error::from)?;
    let canonical = to_json(&value)?;
    let digest = Sha256::digest(canonical.as_bytes());
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

impl RunManifest {
    pub fn new<T: Serialize>(command: String, config: &T, seed: u64, outputs: Vec<String>) -> Result<Self, CliError> {
        Ok(RunManifest {
            command,
            config_digest: config_digest(config)?,
            seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            outputs,
            timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        })
    }
}
