//! Binary dictionary files with a key=value sidecar.
//!
//! Layout (little endian): magic `DWDICT01`; u64 n_vertices, n_columns,
//! n_scales, n_samples; f64 t_max, rho, t_step; n_samples u64 sample
//! indices; then the column-major f64 values.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use faer::Mat;

use super::{Dictionary, DictionaryKind};
use crate::mesh::{SampleSet, SamplingStrategy};

pub const DICT_MAGIC: &[u8; 8] = b"DWDICT01";

fn meta_path(path: &Path) -> PathBuf {
    path.with_extension("meta")
}

fn invalid(msg: impl Into<String>) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg.into())
}

/// Writes `dict` to `path` and its metadata to the `.meta` sibling.
pub fn write_dictionary(path: impl AsRef<Path>, dict: &Dictionary) -> io::Result<()> {
    let path = path.as_ref();
    let mut out = io::BufWriter::new(fs::File::create(path)?);
    out.write_all(DICT_MAGIC)?;
    for v in [
        dict.n_vertices(),
        dict.n_columns(),
        dict.n_scales,
        dict.n_samples(),
    ] {
        out.write_all(&(v as u64).to_le_bytes())?;
    }
    for v in [dict.t_max, dict.rho, dict.t_step] {
        out.write_all(&v.to_le_bytes())?;
    }
    for &s in dict.samples.indices() {
        out.write_all(&(s as u64).to_le_bytes())?;
    }
    for c in 0..dict.n_columns() {
        for v in dict.columns.col_as_slice(c) {
            out.write_all(&v.to_le_bytes())?;
        }
    }
    out.flush()?;

    let mut meta = io::BufWriter::new(fs::File::create(meta_path(path))?);
    writeln!(meta, "format=DWDICT01")?;
    writeln!(meta, "kind={}", dict.kind.as_str())?;
    writeln!(meta, "n_vertices={}", dict.n_vertices())?;
    writeln!(meta, "n_columns={}", dict.n_columns())?;
    writeln!(meta, "n_scales={}", dict.n_scales)?;
    writeln!(meta, "n_samples={}", dict.n_samples())?;
    writeln!(meta, "t_max={:e}", dict.t_max)?;
    writeln!(meta, "rho={:e}", dict.rho)?;
    writeln!(meta, "t_step={:e}", dict.t_step)?;
    writeln!(meta, "sampling={}", dict.samples.strategy())?;
    writeln!(meta, "seed={}", dict.samples.seed())?;
    let list: Vec<String> = dict
        .samples
        .indices()
        .iter()
        .map(|s| s.to_string())
        .collect();
    writeln!(meta, "samples={}", list.join(","))?;
    meta.flush()
}

fn read_u64(r: &mut impl Read) -> io::Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64(r: &mut impl Read) -> io::Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

/// Reads a dictionary written by [`write_dictionary`]. The sidecar is
/// optional; without it the kind defaults to wavelet and samples are
/// tagged explicit.
pub fn read_dictionary(path: impl AsRef<Path>) -> io::Result<Dictionary> {
    let path = path.as_ref();
    let mut r = io::BufReader::new(fs::File::open(path)?);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != DICT_MAGIC {
        return Err(invalid("not a DWDICT01 file"));
    }
    let n_vertices = read_u64(&mut r)? as usize;
    let n_columns = read_u64(&mut r)? as usize;
    let n_scales = read_u64(&mut r)? as usize;
    let n_samples = read_u64(&mut r)? as usize;
    if n_samples * n_scales != n_columns {
        return Err(invalid(format!(
            "{n_columns} columns do not match {n_samples} samples x {n_scales} scales"
        )));
    }
    let t_max = read_f64(&mut r)?;
    let rho = read_f64(&mut r)?;
    let t_step = read_f64(&mut r)?;
    let mut indices = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        indices.push(read_u64(&mut r)? as usize);
    }
    let mut columns = Mat::zeros(n_vertices, n_columns);
    for c in 0..n_columns {
        for v in columns.col_as_slice_mut(c) {
            *v = read_f64(&mut r)?;
        }
    }
    let mut rest = Vec::new();
    r.read_to_end(&mut rest)?;
    if !rest.is_empty() {
        return Err(invalid("trailing bytes after dictionary values"));
    }

    let mut kind = DictionaryKind::Wavelet;
    let mut strategy = SamplingStrategy::Explicit;
    let mut seed = 0;
    if let Ok(text) = fs::read_to_string(meta_path(path)) {
        for line in text.lines() {
            match line.split_once('=') {
                Some(("kind", "heat")) => kind = DictionaryKind::Heat,
                Some(("sampling", s)) => strategy = s.parse().map_err(invalid)?,
                Some(("seed", s)) => seed = s.parse().map_err(|_| invalid("bad seed"))?,
                _ => {}
            }
        }
    }
    let samples =
        SampleSet::new(indices, n_vertices, strategy, seed).map_err(|e| invalid(e.to_string()))?;
    Ok(Dictionary {
        kind,
        columns,
        samples,
        n_scales,
        t_max,
        t_step,
        rho,
    })
}
