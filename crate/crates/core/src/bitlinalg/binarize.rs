//! Sign-and-scale binarization of vectors and matrix buckets.
//!
//! A bucket `v` of length `t` is approximated by `α·sign(v)` with
//! `α = ‖v‖₁ / t`, the minimizer of `‖v − α·s‖²` over scalars `α` and sign
//! patterns `s`. Zero entries take the sign `+1`.

use super::bits::BitVector;
use super::dense::DenseMatrix;
use crate::error::{Error, Result};

/// Optimal `(signs, scale)` pair for a single vector.
pub fn binarize_vector(v: &[f64]) -> Result<(BitVector, f64)> {
    if v.is_empty() {
        return Err(Error::invalid("cannot binarize an empty vector"));
    }
    if let Some(i) = v.iter().position(|x| !x.is_finite()) {
        return Err(Error::invalid(format!("non-finite entry at index {i}")));
    }
    Ok(binarize_finite(v))
}

fn binarize_finite(v: &[f64]) -> (BitVector, f64) {
    let scale = v.iter().map(|x| x.abs()).sum::<f64>() / v.len() as f64;
    (BitVector::from_signs_of(v), scale)
}

/// Whether each bucket holds a matrix row or a matrix column.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orientation {
    RowBuckets,
    ColumnBuckets,
}

/// A `±1` matrix stored one packed bucket per row (or column), each bucket
/// carrying a nonnegative rescaling scalar.
#[derive(Clone, Debug, PartialEq)]
pub struct PackedBinMatrix {
    rows: usize,
    cols: usize,
    orientation: Orientation,
    buckets: Vec<BitVector>,
    scalars: Vec<f64>,
}

impl PackedBinMatrix {
    pub fn new(
        rows: usize,
        cols: usize,
        orientation: Orientation,
        buckets: Vec<BitVector>,
        scalars: Vec<f64>,
    ) -> Result<Self> {
        let (count, len) = match orientation {
            Orientation::RowBuckets => (rows, cols),
            Orientation::ColumnBuckets => (cols, rows),
        };
        if buckets.len() != count || scalars.len() != count {
            return Err(Error::shape(
                "PackedBinMatrix::new",
                format!("{count} buckets"),
                format!("{} buckets, {} scalars", buckets.len(), scalars.len()),
            ));
        }
        if let Some(b) = buckets.iter().find(|b| b.len() != len) {
            return Err(Error::shape(
                "PackedBinMatrix::new",
                format!("bucket length {len}"),
                b.len(),
            ));
        }
        if scalars.iter().any(|s| !s.is_finite() || *s < 0.0) {
            return Err(Error::invalid(
                "bucket scalars must be finite and nonnegative",
            ));
        }
        Ok(Self {
            rows,
            cols,
            orientation,
            buckets,
            scalars,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn buckets(&self) -> &[BitVector] {
        &self.buckets
    }

    pub fn scalars(&self) -> &[f64] {
        &self.scalars
    }

    /// `±1` entry at `(r, c)`.
    pub fn sign(&self, r: usize, c: usize) -> f64 {
        match self.orientation {
            Orientation::RowBuckets => self.buckets[r].sign(c),
            Orientation::ColumnBuckets => self.buckets[c].sign(r),
        }
    }

    /// The unscaled `±1` matrix.
    pub fn signs(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.rows, self.cols, |r, c| self.sign(r, c))
    }

    /// `scalar × signs` for every bucket.
    pub fn reconstruct(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.rows, self.cols, |r, c| {
            let s = match self.orientation {
                Orientation::RowBuckets => self.scalars[r],
                Orientation::ColumnBuckets => self.scalars[c],
            };
            s * self.sign(r, c)
        })
    }

    /// Storage in bits: one bit per entry plus a 32-bit scalar per bucket.
    pub fn storage_bits(&self) -> u64 {
        (self.rows * self.cols + 32 * self.buckets.len()) as u64
    }
}

/// One bucket per column (weights): `α_j = mean |W[:, j]|`, `B[:, j] = sign(W[:, j])`.
pub fn binarize_columns(w: &DenseMatrix) -> Result<PackedBinMatrix> {
    let (rows, cols) = w.shape();
    if rows == 0 || cols == 0 {
        return Err(Error::invalid(format!(
            "cannot binarize a {rows}x{cols} matrix"
        )));
    }
    let (buckets, scalars) = (0..cols).map(|c| binarize_finite(&w.column(c))).unzip();
    PackedBinMatrix::new(rows, cols, Orientation::ColumnBuckets, buckets, scalars)
}

/// One bucket per row (node features): `β_i = mean |H[i, :]|`, `F[i, :] = sign(H[i, :])`.
pub fn binarize_rows(h: &DenseMatrix) -> Result<PackedBinMatrix> {
    let (rows, cols) = h.shape();
    if rows == 0 || cols == 0 {
        return Err(Error::invalid(format!(
            "cannot binarize a {rows}x{cols} matrix"
        )));
    }
    let (buckets, scalars) = (0..rows).map(|r| binarize_finite(h.row(r))).unzip();
    PackedBinMatrix::new(rows, cols, Orientation::RowBuckets, buckets, scalars)
}
