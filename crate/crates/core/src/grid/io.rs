//! Flat binary storage for grids: little-endian `f64` pairs `(re, im)` in
//! row-major order (`x` is the row index), with a JSON sidecar `{"N", "L", "hbar"}`.

use std::fs;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{GridSpec, GridSymbol};
use crate::error::{MoyalError, Result};

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct Sidecar {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "L")]
    pub l: f64,
    pub hbar: f64,
}

/// `<path>.json` next to the binary file.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

pub fn encode(values: impl Iterator<Item = Complex64>) -> Vec<u8> {
    let mut out = Vec::new();
    for z in values {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    out
}

pub fn decode(bytes: &[u8]) -> Result<Vec<Complex64>> {
    if bytes.len() % 16 != 0 {
        return Err(MoyalError::Io(format!("binary length {} is not a multiple of 16", bytes.len())));
    }
    Ok(bytes
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().unwrap());
            let im = f64::from_le_bytes(c[8..].try_into().unwrap());
            Complex64::new(re, im)
        })
        .collect())
}

pub fn write_grid(path: &Path, g: &GridSymbol) -> Result<()> {
    let s = g.spec();
    fs::write(path, encode(g.samples().iter().copied()))?;
    let side = Sidecar { n: s.n, l: s.l, hbar: s.hbar };
    let text = serde_json::to_string(&side).map_err(|e| MoyalError::Io(e.to_string()))?;
    fs::write(sidecar_path(path), text)?;
    Ok(())
}

/// Read a grid written by [`write_grid`]; tolerances take their defaults.
pub fn read_grid(path: &Path) -> Result<GridSymbol> {
    let text = fs::read_to_string(sidecar_path(path))?;
    let side: Sidecar = serde_json::from_str(&text).map_err(|e| MoyalError::Io(e.to_string()))?;
    let spec = GridSpec::new(side.n, side.l, side.hbar)?;
    let values = decode(&fs::read(path)?)?;
    let samples = Array2::from_shape_vec((spec.n, spec.n), values)
        .map_err(|e| MoyalError::Io(format!("sample count does not match the sidecar: {e}")))?;
    GridSymbol::new(spec, samples)
}
