//! On-disk cache of fitted artifacts keyed by a SHA-256 of their inputs.

use std::fs;
use std::path::{Path, PathBuf};

use log::{debug, warn};
use sha2::{Digest, Sha256};

use crate::clustering::Centroids;
use crate::error::Result;
use crate::scalar::Scalar;
use crate::svm::LinearModel;

/// Incremental content hash. Every field is length- or tag-prefixed so
/// concatenations cannot collide.
#[derive(Clone, Default)]
pub struct Fingerprint(Sha256);

impl Fingerprint {
    pub fn new(tag: &str) -> Self {
        let mut f = Self(Sha256::new());
        f.str(tag);
        f
    }

    pub fn str(&mut self, s: &str) -> &mut Self {
        self.u64(s.len() as u64);
        self.0.update(s.as_bytes());
        self
    }

    pub fn u64(&mut self, v: u64) -> &mut Self {
        self.0.update(v.to_le_bytes());
        self
    }

    pub fn scalars<T: Scalar>(&mut self, values: impl IntoIterator<Item = T>) -> &mut Self {
        for v in values {
            self.0.update(v.as_f64().to_le_bytes());
        }
        self
    }

    pub fn bytes(&mut self, b: &[u8]) -> &mut Self {
        self.u64(b.len() as u64);
        self.0.update(b);
        self
    }

    pub fn hex(&self) -> String {
        hex::encode(self.0.clone().finalize())
    }
}

/// Directory of cached centroid and model files.
#[derive(Debug, Clone)]
pub struct ArtifactCache {
    dir: PathBuf,
}

impl ArtifactCache {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(Self { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, kind: &str, key: &str) -> PathBuf {
        self.dir.join(format!("{kind}-{key}"))
    }

    /// Writes through a temporary file so concurrent readers never see a
    /// partial artifact.
    fn store(&self, path: &Path, write: impl FnOnce(&Path) -> Result<()>) {
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        let result = write(&tmp).and_then(|_| fs::rename(&tmp, path).map_err(Into::into));
        if let Err(e) = result {
            warn!("could not cache {}: {e}", path.display());
            let _ = fs::remove_file(&tmp);
        }
    }

    pub fn centroids<T: Scalar>(&self, key: &str, compute: impl FnOnce() -> Result<Centroids<T>>) -> Result<Centroids<T>> {
        let path = self.path("centroids", key);
        if path.is_file() {
            match Centroids::load(&path) {
                Ok(c) => {
                    debug!("cache hit {}", path.display());
                    return Ok(c);
                }
                Err(e) => warn!("ignoring unreadable cache entry {}: {e}", path.display()),
            }
        }
        let c = compute()?;
        self.store(&path, |p| c.save(p));
        Ok(c)
    }

    pub fn model<T: Scalar>(&self, key: &str, compute: impl FnOnce() -> Result<LinearModel<T>>) -> Result<LinearModel<T>> {
        let path = self.path("model", key);
        if path.is_file() {
            match LinearModel::load(&path) {
                Ok(m) => {
                    debug!("cache hit {}", path.display());
                    return Ok(m);
                }
                Err(e) => warn!("ignoring unreadable cache entry {}: {e}", path.display()),
            }
        }
        let m = compute()?;
        self.store(&path, |p| m.save(p));
        Ok(m)
    }
}
