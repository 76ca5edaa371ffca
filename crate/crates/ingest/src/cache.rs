//! Content-addressed response cache with atomic writes.

use std::io::Write;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::IngestError;

pub const CACHE_ENV: &str = "REVKIT_CACHE_DIR";

#[derive(Debug, Clone)]
pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self, IngestError> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir).map_err(|e| IngestError::io(&dir, e))?;
        Ok(Cache { dir })
    }

    /// The cache named by `REVKIT_CACHE_DIR`, if set.
    pub fn from_env() -> Result<Option<Self>, IngestError> {
        match std::env::var_os(CACHE_ENV) {
            Some(d) if !d.is_empty() => Cache::new(PathBuf::from(d)).map(Some),
            _ => Ok(None),
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Hex SHA-256 over the NUL-joined key parts.
    pub fn key(parts: &[&str]) -> String {
        let mut h = Sha256::new();
        for (i, p) in parts.iter().enumerate() {
            if i > 0 {
                h.update([0u8]);
            }
            h.update(p.as_bytes());
        }
        hex::encode(h.finalize())
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(&key[..2]).join(key)
    }

    pub fn get(&self, key: &str) -> Option<String> {
        std::fs::read_to_string(self.path(key)).ok()
    }

    /// Writes to a temporary file in the target directory, then renames it
    /// into place, so readers never see a partial entry.
    pub fn put(&self, key: &str, body: &str) -> Result<(), IngestError> {
        let path = self.path(key);
        let parent = path.parent().expect("cache entries live in a subdirectory");
        std::fs::create_dir_all(parent).map_err(|e| IngestError::io(parent, e))?;
        let mut tmp = tempfile::NamedTempFile::new_in(parent).map_err(|e| IngestError::io(parent, e))?;
        tmp.write_all(body.as_bytes()).map_err(|e| IngestError::io(&path, e))?;
        tmp.persist(&path).map_err(|e| IngestError::io(&path, e.error))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let c = Cache::new(dir.path()).unwrap();
        let k = Cache::key(&["https://x/api", "Title", "history:5"]);
        assert_eq!(k.len(), 64);
        assert_ne!(k, Cache::key(&["https://x/api", "Title", "history:4"]));
        assert!(c.get(&k).is_none());
        c.put(&k, "body").unwrap();
        assert_eq!(c.get(&k).as_deref(), Some("body"));
    }
}
