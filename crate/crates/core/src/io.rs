//! Binary grid files and report emission.
//!
//! Grid file layout, all little-endian:
//! `GRUSHIN1` | n: u32 | Nx: u32 | Nt: u32 | x_extent: f64 | t_extent: f64 | payload
//! where the payload holds Nx^n·Nt complex samples as interleaved (re, im) f64,
//! spatial indices fastest.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{GridFunction, GridSpec};

pub const MAGIC: &[u8; 8] = b"GRUSHIN1";
pub const HEADER_LEN: usize = 8 + 3 * 4 + 2 * 8;

pub fn encode_grid_function(f: &GridFunction) -> Vec<u8> {
    let g = f.spec();
    let mut out = Vec::with_capacity(HEADER_LEN + 16 * g.len());
    out.extend_from_slice(MAGIC);
    for d in [g.n, g.nx, g.nt] {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    out.extend_from_slice(&g.x_extent.to_le_bytes());
    out.extend_from_slice(&g.t_extent.to_le_bytes());
    for v in f.values() {
        out.extend_from_slice(&v.re.to_le_bytes());
        out.extend_from_slice(&v.im.to_le_bytes());
    }
    out
}

fn u32_at(b: &[u8], at: usize) -> usize {
    u32::from_le_bytes(b[at..at + 4].try_into().expect("4 bytes")) as usize
}

fn f64_at(b: &[u8], at: usize) -> f64 {
    f64::from_le_bytes(b[at..at + 8].try_into().expect("8 bytes"))
}

/// Parses a header and returns the grid it declares.
pub fn decode_header(bytes: &[u8]) -> Result<GridSpec> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Truncated {
            expected: HEADER_LEN,
            found: bytes.len(),
        });
    }
    if &bytes[..8] != MAGIC {
        return Err(Error::Format(format!(
            "bad magic {:?}",
            String::from_utf8_lossy(&bytes[..8])
        )));
    }
    let spec = GridSpec {
        n: u32_at(bytes, 8),
        nx: u32_at(bytes, 12),
        nt: u32_at(bytes, 16),
        x_extent: f64_at(bytes, 20),
        t_extent: f64_at(bytes, 28),
    };
    spec.validate()
        .map_err(|e| Error::Format(format!("invalid header: {e}")))?;
    Ok(spec)
}

pub fn decode_grid_function(bytes: &[u8]) -> Result<GridFunction> {
    let spec = decode_header(bytes)?;
    let expected = spec
        .len()
        .checked_mul(16)
        .and_then(|p| p.checked_add(HEADER_LEN))
        .ok_or_else(|| Error::Format("declared payload overflows".into()))?;
    if bytes.len() != expected {
        return Err(Error::Truncated {
            expected,
            found: bytes.len(),
        });
    }
    let values = bytes[HEADER_LEN..]
        .chunks_exact(16)
        .map(|c| Complex64::new(f64_at(c, 0), f64_at(c, 8)))
        .collect();
    GridFunction::new(spec, values)
}

pub fn load_grid_function(path: &Path) -> Result<GridFunction> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_grid_function(&bytes)
}

pub fn save_grid_function(f: &GridFunction, path: &Path) -> Result<()> {
    write_atomic(path, &encode_grid_function(f))
}

/// Writes to a temporary sibling, then renames over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let name = path
        .file_name()
        .ok_or_else(|| Error::Input(format!("{} has no file name", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let write = || -> std::io::Result<()> {
        let mut file = fs::File::create(&tmp)?;
        file.write_all(bytes)?;
        file.sync_all()?;
        fs::rename(&tmp, path)
    };
    write().map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::io(path, e)
    })
}

/// Pretty JSON with a trailing newline. Deterministic for a given value.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::data(format!("serialize: {e}")))?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    write_atomic(path, to_json(value)?.as_bytes())
}

/// `trial,ratio` rows for plotting.
pub fn ratios_csv(ratios: &[f64]) -> String {
    let mut s = String::from("trial,ratio\n");
    for (i, r) in ratios.iter().enumerate() {
        s.push_str(&format!("{i},{r:.17e}\n"));
    }
    s
}

/// Writes `<stem>.json` and `<stem>.csv` into `dir`; returns the JSON path.
pub fn write_report<T: Serialize>(value: &T, ratios: &[f64], dir: &Path, stem: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let json = dir.join(format!("{stem}.json"));
    write_json(value, &json)?;
    write_atomic(&dir.join(format!("{stem}.csv")), ratios_csv(ratios).as_bytes())?;
    Ok(json)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> GridFunction {
        let g = GridSpec::new(2, 8, 3.0, 8, 6.5).unwrap();
        GridFunction::from_fn(g, |x, t| Complex64::new(x[0].sin() * t, x[1] - 1e-300)).unwrap()
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let f = sample();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.grid");
        save_grid_function(&f, &path).unwrap();
        let g = load_grid_function(&path).unwrap();
        assert_eq!(f.spec(), g.spec());
        for (a, b) in f.values().iter().zip(g.values()) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
    }

    #[test]
    fn header_errors() {
        let mut bytes = encode_grid_function(&sample());
        let mut wrong = bytes.clone();
        wrong[..8].copy_from_slice(b"GRUSHIN0");
        assert!(matches!(decode_grid_function(&wrong), Err(Error::Format(_))));
        bytes.truncate(bytes.len() - 1);
        assert!(matches!(decode_grid_function(&bytes), Err(Error::Truncated { .. })));
        assert!(matches!(decode_grid_function(&bytes[..10]), Err(Error::Truncated { .. })));
        let mut bad_dim = encode_grid_function(&sample());
        bad_dim[12..16].copy_from_slice(&12u32.to_le_bytes());
        assert!(matches!(decode_grid_function(&bad_dim), Err(Error::Format(_))));
    }

    #[test]
    fn non_finite_payload_rejected() {
        let mut bytes = encode_grid_function(&sample());
        bytes[HEADER_LEN..HEADER_LEN + 8].copy_from_slice(&f64::NAN.to_le_bytes());
        assert!(matches!(decode_grid_function(&bytes), Err(Error::Data(_))));
    }

    #[test]
    fn report_pair_written() {
        let dir = tempfile::tempdir().unwrap();
        let json = write_report(&serde_json::json!({"a": 1}), &[0.5, 2.0], dir.path(), "r").unwrap();
        assert_eq!(fs::read_to_string(json).unwrap(), "{\n  \"a\": 1\n}\n");
        let csv = fs::read_to_string(dir.path().join("r.csv")).unwrap();
        assert_eq!(csv.lines().count(), 3);
    }
}
