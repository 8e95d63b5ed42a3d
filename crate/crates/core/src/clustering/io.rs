//! Centroid files.
//!
//! Binary layout, little-endian: the 8 bytes `CBAGCENT`, a `u32` version,
//! then `K`, `m` and `seed` as `u64`, then `K · m` row-major `f64` values.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::Array2;

use super::Centroids;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

const MAGIC: &[u8; 8] = b"CBAGCENT";
const VERSION: u32 = 1;

fn format_err(message: impl Into<String>) -> Error {
    Error::Format {
        what: "centroid file",
        message: message.into(),
    }
}

impl<T: Scalar> Centroids<T> {
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        for v in [self.k() as u64, self.dim() as u64, self.seed] {
            w.write_all(&v.to_le_bytes())?;
        }
        for &v in self.matrix.iter() {
            w.write_all(&v.as_f64().to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic).map_err(|_| format_err("truncated header"))?;
        if &magic != MAGIC {
            return Err(format_err("bad magic bytes"));
        }
        let mut b4 = [0u8; 4];
        r.read_exact(&mut b4).map_err(|_| format_err("truncated header"))?;
        let version = u32::from_le_bytes(b4);
        if version != VERSION {
            return Err(format_err(format!("unsupported version {version}")));
        }
        let mut b8 = [0u8; 8];
        let mut header = [0u64; 3];
        for h in &mut header {
            r.read_exact(&mut b8).map_err(|_| format_err("truncated header"))?;
            *h = u64::from_le_bytes(b8);
        }
        let [k, m, seed] = header;
        let (k, m) = (k as usize, m as usize);
        let mut data = Vec::with_capacity(k.saturating_mul(m).min(1 << 28));
        for _ in 0..k * m {
            r.read_exact(&mut b8).map_err(|_| format_err(format!("expected {k}×{m} values")))?;
            data.push(T::lit(f64::from_le_bytes(b8)));
        }
        if r.read(&mut b8)? != 0 {
            return Err(format_err("trailing bytes after the last row"));
        }
        Centroids::new(Array2::from_shape_vec((k, m), data).expect("k × m values"), seed)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_binary(BufWriter::new(File::create(path)?))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|source| Error::UnreadableFile {
            path: path.to_path_buf(),
            source,
        })?;
        Self::read_binary(BufReader::new(file))
    }

    /// Same layout as the word-vector text format, with rows named `c<k>`.
    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{} {}", self.k(), self.dim())?;
        for k in 0..self.k() {
            write!(w, "c{k}")?;
            for v in self.row(k) {
                write!(w, " {v}")?;
            }
            writeln!(w)?;
        }
        w.flush()?;
        Ok(())
    }
}
