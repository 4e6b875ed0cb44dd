//! Operators and wavefunctions in the grid storage format. Matrices are
//! written row-major; the sidecar carries `{"N", "L", "hbar"}` of the position grid.

use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use super::{OperatorMatrix, WaveVector, XGrid};
use crate::error::{MoyalError, Result};
use crate::grid::io::{decode, encode, sidecar_path, Sidecar};

fn write_sidecar(path: &Path, g: &XGrid) -> Result<()> {
    let side = Sidecar { n: g.n, l: g.l, hbar: g.hbar };
    let text = serde_json::to_string(&side).map_err(|e| MoyalError::Io(e.to_string()))?;
    fs::write(sidecar_path(path), text)?;
    Ok(())
}

fn read_sidecar(path: &Path) -> Result<XGrid> {
    let text = fs::read_to_string(sidecar_path(path))?;
    let side: Sidecar = serde_json::from_str(&text).map_err(|e| MoyalError::Io(e.to_string()))?;
    XGrid::new(side.n, side.l, side.hbar)
}

pub fn write_operator(path: &Path, op: &OperatorMatrix) -> Result<()> {
    let n = op.grid.n;
    fs::write(path, encode((0..n).flat_map(|i| (0..n).map(move |j| op.m[(i, j)]))))?;
    write_sidecar(path, &op.grid)
}

pub fn read_operator(path: &Path) -> Result<OperatorMatrix> {
    let grid = read_sidecar(path)?;
    let values = decode(&fs::read(path)?)?;
    if values.len() != grid.n * grid.n {
        return Err(MoyalError::Io(format!("expected {} entries, found {}", grid.n * grid.n, values.len())));
    }
    Ok(OperatorMatrix { grid, m: DMatrix::from_row_slice(grid.n, grid.n, &values) })
}

pub fn write_wave(path: &Path, psi: &WaveVector) -> Result<()> {
    fs::write(path, encode(psi.values.iter().copied()))?;
    write_sidecar(path, &psi.grid)
}

pub fn read_wave(path: &Path) -> Result<WaveVector> {
    let grid = read_sidecar(path)?;
    let values = decode(&fs::read(path)?)?;
    if values.len() != grid.n {
        return Err(MoyalError::Io(format!("expected {} entries, found {}", grid.n, values.len())));
    }
    Ok(WaveVector { grid, values: DVector::from_vec(values) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::SymbolEvaluator;
    use crate::weyl::{coherent_state, quantize_kernel};

    #[test]
    fn round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let g = XGrid::new(32, 4.0, 0.5).unwrap();
        let (op, _) = quantize_kernel(&SymbolEvaluator::gaussian(1.0, (0.5, 0.25)).mul(&SymbolEvaluator::monomial(0, 1)), &g);
        let p = dir.path().join("op.bin");
        write_operator(&p, &op).unwrap();
        assert_eq!(read_operator(&p).unwrap(), op);
        assert_eq!(fs::read(&p).unwrap()[..16], crate::grid::io::encode(std::iter::once(op.m[(0, 0)]))[..]);

        let psi = coherent_state((0.5, -0.5), &g);
        let q = dir.path().join("psi.bin");
        write_wave(&q, &psi).unwrap();
        assert_eq!(read_wave(&q).unwrap(), psi);
        assert!(read_operator(&q).is_err());
    }
}
