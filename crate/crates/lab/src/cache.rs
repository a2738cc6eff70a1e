//! Content-addressed result cache.
//!
//! Entries live at `<dir>/<kind>/<sha256>.json`. The key hashes the canonical
//! JSON of the inputs together with [`CACHE_VERSION`]; the entry stores a
//! checksum of its payload so truncated or edited files are detected and
//! recomputed.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::LabError;

/// Bumped whenever a cached payload could change for the same inputs.
pub const CACHE_VERSION: &str = concat!("sflow-cache-1/", env!("CARGO_PKG_VERSION"));

#[derive(Serialize, Deserialize)]
struct Entry {
    version: String,
    kind: String,
    key: String,
    checksum: String,
    payload: String,
}

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct CacheStats {
    pub hits: usize,
    pub misses: usize,
    pub corrupt: usize,
}

#[derive(Debug)]
pub struct Cache {
    dir: Option<PathBuf>,
    hits: AtomicUsize,
    misses: AtomicUsize,
    corrupt: AtomicUsize,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl Cache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Cache {
            dir: Some(dir.into()),
            hits: AtomicUsize::new(0),
            misses: AtomicUsize::new(0),
            corrupt: AtomicUsize::new(0),
        }
    }

    pub fn disabled() -> Self {
        Cache { dir: None, hits: AtomicUsize::new(0), misses: AtomicUsize::new(0), corrupt: AtomicUsize::new(0) }
    }

    pub fn stats(&self) -> CacheStats {
        CacheStats {
            hits: self.hits.load(Ordering::Relaxed),
            misses: self.misses.load(Ordering::Relaxed),
            corrupt: self.corrupt.load(Ordering::Relaxed),
        }
    }

    /// sha256 of `{"input", "kind", "version"}` with object keys sorted.
    pub fn key<K: Serialize>(kind: &str, input: &K) -> String {
        let doc = serde_json::json!({ "kind": kind, "version": CACHE_VERSION, "input": input });
        sha256_hex(doc.to_string().as_bytes())
    }

    pub fn path(&self, kind: &str, key: &str) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(kind).join(format!("{key}.json")))
    }

    fn read<T: DeserializeOwned>(&self, path: &Path, kind: &str, key: &str) -> Option<T> {
        let text = fs::read_to_string(path).ok()?;
        let valid = serde_json::from_str::<Entry>(&text).ok().filter(|e| {
            e.version == CACHE_VERSION
                && e.kind == kind
                && e.key == key
                && sha256_hex(e.payload.as_bytes()) == e.checksum
        });
        let payload = valid.and_then(|e| serde_json::from_str(&e.payload).ok());
        if payload.is_none() {
            self.corrupt.fetch_add(1, Ordering::Relaxed);
            log::warn!("cache entry {} is corrupt; recomputing", path.display());
        }
        payload
    }

    /// Writes to a temporary file in the target directory, then renames.
    fn write<T: Serialize>(&self, path: &Path, kind: &str, key: &str, value: &T) -> Result<(), LabError> {
        let payload =
            serde_json::to_string(value).map_err(|e| LabError::Numeric(format!("serializing {kind}: {e}")))?;
        let entry = Entry {
            version: CACHE_VERSION.into(),
            kind: kind.into(),
            key: key.into(),
            checksum: sha256_hex(payload.as_bytes()),
            payload,
        };
        let dir = path.parent().expect("cache paths have a parent");
        fs::create_dir_all(dir).map_err(|e| LabError::io(dir, e))?;
        let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| LabError::io(dir, e))?;
        let text = serde_json::to_string(&entry).expect("entry serializes");
        tmp.write_all(text.as_bytes()).map_err(|e| LabError::io(tmp.path(), e))?;
        tmp.as_file().sync_all().map_err(|e| LabError::io(tmp.path(), e))?;
        tmp.persist(path).map_err(|e| LabError::io(path, e.error))?;
        Ok(())
    }

    /// Returns the cached value for `input`, or computes and stores it.
    pub fn get_or_compute<K, T, E, F>(&self, kind: &str, input: &K, compute: F) -> Result<T, LabError>
    where
        K: Serialize,
        T: Serialize + DeserializeOwned,
        F: FnOnce() -> Result<T, E>,
        LabError: From<E>,
    {
        let key = Self::key(kind, input);
        let Some(path) = self.path(kind, &key) else {
            return Ok(compute()?);
        };
        if path.exists() {
            if let Some(v) = self.read(&path, kind, &key) {
                self.hits.fetch_add(1, Ordering::Relaxed);
                log::info!("cache hit {kind} {key}");
                return Ok(v);
            }
        }
        self.misses.fetch_add(1, Ordering::Relaxed);
        log::info!("cache miss {kind} {key}");
        let v = compute()?;
        self.write(&path, kind, &key, &v)?;
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn compute(calls: &AtomicUsize, x: f64) -> Result<Vec<f64>, LabError> {
        calls.fetch_add(1, Ordering::Relaxed);
        Ok(vec![x, x / 3.0, f64::MIN_POSITIVE])
    }

    #[test]
    fn keys_are_canonical() {
        let a = serde_json::json!({"a": 1, "b": [0.1, 2.0]});
        let b: serde_json::Value = serde_json::from_str(r#"{"b": [0.1, 2.0], "a": 1}"#).unwrap();
        assert_eq!(Cache::key("k", &a), Cache::key("k", &b));
        assert_ne!(Cache::key("k", &a), Cache::key("j", &a));
    }

    #[test]
    fn roundtrip_is_bit_exact_and_counts_hits() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path());
        let calls = AtomicUsize::new(0);
        let first = cache.get_or_compute("v", &1, || compute(&calls, 0.7)).unwrap();
        let second = cache.get_or_compute("v", &1, || compute(&calls, 0.7)).unwrap();
        assert_eq!(calls.load(Ordering::Relaxed), 1);
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&first), bits(&second));
        assert_eq!(cache.stats(), CacheStats { hits: 1, misses: 1, corrupt: 0 });
    }

    #[test]
    fn corrupt_entries_are_recomputed() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path());
        let calls = AtomicUsize::new(0);
        cache.get_or_compute("v", &2, || compute(&calls, 1.0)).unwrap();
        let path = cache.path("v", &Cache::key("v", &2)).unwrap();
        let text = fs::read_to_string(&path).unwrap().replace("0.333", "0.334");
        fs::write(&path, text).unwrap();
        let v = cache.get_or_compute("v", &2, || compute(&calls, 1.0)).unwrap();
        assert_eq!(v[1], 1.0 / 3.0);
        assert_eq!(calls.load(Ordering::Relaxed), 2);
        assert_eq!(cache.stats().corrupt, 1);
        fs::write(&path, "{").unwrap();
        cache.get_or_compute("v", &2, || compute(&calls, 1.0)).unwrap();
        assert_eq!(cache.stats().corrupt, 2);
        cache.get_or_compute("v", &2, || compute(&calls, 1.0)).unwrap();
        assert_eq!(calls.load(Ordering::Relaxed), 3);
    }

    #[test]
    fn disabled_cache_always_computes() {
        let cache = Cache::disabled();
        let calls = AtomicUsize::new(0);
        cache.get_or_compute("v", &3, || compute(&calls, 1.0)).unwrap();
        cache.get_or_compute("v", &3, || compute(&calls, 1.0)).unwrap();
        assert_eq!(calls.load(Ordering::Relaxed), 2);
    }
}
