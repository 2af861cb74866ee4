//! Content-addressed result cache.
//!
//! The key is the SHA-256 of the command's normal form, the hashes of every
//! catalog document it read, and the engine version. Entries are JSON
//! [`RunRecord`]s written through a temporary file and renamed into place, so
//! readers never observe a partial entry. Deleting the directory is always safe.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub const ENGINE_VERSION: &str = concat!("twmk-", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("cache directory {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("cache entry {path} is corrupt: {source}")]
    Corrupt { path: PathBuf, source: serde_json::Error },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunRecord {
    pub command_line: Vec<String>,
    /// Hash of the command normal form.
    pub config_hash: String,
    /// `(document name, hash)` for each catalog input.
    pub input_hashes: Vec<(String, String)>,
    pub engine_version: String,
    pub exit_code: i32,
    pub output: String,
    pub wall_time_ms: u64,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn cache_key(normal_form: &str, input_hashes: &[(String, String)]) -> String {
    let mut h = Sha256::new();
    h.update(normal_form.as_bytes());
    h.update(b"\n");
    for (name, hash) in input_hashes {
        h.update(name.as_bytes());
        h.update(b"=");
        h.update(hash.as_bytes());
        h.update(b"\n");
    }
    h.update(ENGINE_VERSION.as_bytes());
    hex::encode(h.finalize())
}

pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Cache { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    pub fn get(&self, key: &str) -> Result<Option<RunRecord>, CacheError> {
        let path = self.path(key);
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(CacheError::Io { path, source: e }),
        };
        serde_json::from_str(&text)
            .map(Some)
            .map_err(|e| CacheError::Corrupt { path, source: e })
    }

    pub fn put(&self, key: &str, record: &RunRecord) -> Result<PathBuf, CacheError> {
        let io = |path: &Path, e| CacheError::Io {
            path: path.to_path_buf(),
            source: e,
        };
        fs::create_dir_all(&self.dir).map_err(|e| io(&self.dir, e))?;
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir).map_err(|e| io(&self.dir, e))?;
        let json = serde_json::to_string_pretty(record).expect("records serialize");
        tmp.write_all(json.as_bytes()).map_err(|e| io(tmp.path(), e))?;
        let path = self.path(key);
        tmp.persist(&path).map_err(|e| io(&path, e.error))?;
        Ok(path)
    }
}
