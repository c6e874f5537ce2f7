//! Activation dump files: magic `BGNA`, `u32` samples, `u32` neurons
//! (little-endian), then row-major `f32` values.

use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use super::format::{read_f32_body, read_f32_header, write_f32_matrix};
use crate::bitlinalg::DenseMatrix;
use crate::error::{DataError, Error};

pub const ACTIVATIONS_MAGIC: &[u8; 4] = b"BGNA";

pub fn write_activations(path: &Path, acts: &DenseMatrix) -> Result<(), DataError> {
    write_f32_matrix(path, ACTIVATIONS_MAGIC, acts)
}

pub fn read_activations(path: &Path) -> Result<DenseMatrix, DataError> {
    let file = File::open(path).map_err(|source| {
        if source.kind() == std::io::ErrorKind::NotFound {
            DataError::MissingFile(path.to_path_buf())
        } else {
            DataError::Io {
                path: path.to_path_buf(),
                source,
            }
        }
    })?;
    let mut r = BufReader::new(file);
    let (rows, cols) = read_f32_header(&mut r, path, ACTIVATIONS_MAGIC)?;
    if rows == 0 || cols == 0 {
        return Err(Error::invalid(format!("activation dump is empty ({rows} x {cols})")).into());
    }
    let data = read_f32_body(&mut r, path, rows, cols)?;
    Ok(DenseMatrix::from_vec(rows, cols, data)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_and_magic() {
        let dir = tempfile::TempDir::new().unwrap();
        let p = dir.path().join("a.bin");
        let m = DenseMatrix::from_fn(5, 3, |r, c| r as f64 * 0.5 - c as f64);
        write_activations(&p, &m).unwrap();
        assert_eq!(read_activations(&p).unwrap(), m);

        let q = dir.path().join("f.bin");
        super::super::format::write_f32_matrix(&q, super::super::format::FEATURES_MAGIC, &m)
            .unwrap();
        assert!(matches!(
            read_activations(&q),
            Err(DataError::BadMagic { .. })
        ));
        assert!(matches!(
            read_activations(&dir.path().join("nope")),
            Err(DataError::MissingFile(_))
        ));
    }
}
