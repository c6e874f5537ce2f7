use rayon::prelude::*;

use super::binarize::{Orientation, PackedBinMatrix};
use super::bits::xnor_popcount_words;
use super::dense::DenseMatrix;
use crate::error::{Error, Result};

/// Binary matrix product `ζ_ij = β_i · α_j · (F_i ⊛ B_j)` where `⊛` is the
/// XNOR/popcount dot product.
///
/// `features` must be row-bucketed (`N × d`) and `weights` column-bucketed
/// (`d × m`). Output rows are computed independently and in parallel.
pub fn bin_gemm(features: &PackedBinMatrix, weights: &PackedBinMatrix) -> Result<DenseMatrix> {
    if features.orientation() != Orientation::RowBuckets {
        return Err(Error::invalid(
            "left operand of bin_gemm must be row-bucketed",
        ));
    }
    if weights.orientation() != Orientation::ColumnBuckets {
        return Err(Error::invalid(
            "right operand of bin_gemm must be column-bucketed",
        ));
    }
    let d = features.cols();
    if weights.rows() != d {
        return Err(Error::shape(
            "bin_gemm",
            format!("inner dimension {d}"),
            weights.rows(),
        ));
    }
    let m = weights.cols();
    let mut out = vec![0.0; features.rows() * m];
    if m == 0 {
        return Ok(DenseMatrix::from_raw(features.rows(), 0, out));
    }
    let alphas = weights.scalars();
    let columns = weights.buckets();
    out.par_chunks_mut(m)
        .zip(
            features
                .buckets()
                .par_iter()
                .zip(features.scalars().par_iter()),
        )
        .for_each(|(row, (f, &beta))| {
            for ((slot, b), &alpha) in row.iter_mut().zip(columns).zip(alphas) {
                let dot = xnor_popcount_words(f.words(), b.words(), d);
                *slot = beta * alpha * dot as f64;
            }
        });
    Ok(DenseMatrix::from_raw(features.rows(), m, out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitlinalg::{binarize_columns, binarize_rows, BitVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_entry() {
        let f = PackedBinMatrix::new(
            1,
            2,
            Orientation::RowBuckets,
            vec![BitVector::pack(&[1, -1]).unwrap()],
            vec![2.0],
        )
        .unwrap();
        let b = PackedBinMatrix::new(
            2,
            1,
            Orientation::ColumnBuckets,
            vec![BitVector::pack(&[1, -1]).unwrap()],
            vec![0.5],
        )
        .unwrap();
        let z = bin_gemm(&f, &b).unwrap();
        assert_eq!(z.as_slice(), &[2.0]);
    }

    #[test]
    fn zero_row_scalars_give_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let w = DenseMatrix::from_fn(5, 3, |_, _| rng.random_range(-1.0..1.0));
        let f = binarize_rows(&DenseMatrix::zeros(4, 5)).unwrap();
        let z = bin_gemm(&f, &binarize_columns(&w).unwrap()).unwrap();
        assert!(z.as_slice().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn random_instance_matches_float_reference() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let h = DenseMatrix::from_fn(8, 16, |_, _| rng.random_range(-2.0..2.0));
        let w = DenseMatrix::from_fn(16, 4, |_, _| rng.random_range(-1.0..1.0));
        let f = binarize_rows(&h).unwrap();
        let b = binarize_columns(&w).unwrap();
        let want = DenseMatrix::from_fn(8, 4, |i, j| {
            (0..16)
                .map(|k| f.reconstruct().get(i, k) * b.reconstruct().get(k, j))
                .sum()
        });
        assert!(bin_gemm(&f, &b).unwrap().max_abs_diff(&want) < 1e-9);
    }

    #[test]
    fn orientation_and_shape_errors() {
        let h = DenseMatrix::from_fn(2, 3, |i, j| (i + j) as f64);
        let rows = binarize_rows(&h).unwrap();
        let cols = binarize_columns(&h).unwrap();
        assert!(bin_gemm(&cols, &cols).is_err());
        assert!(bin_gemm(&rows, &rows).is_err());
        // 2x3 times 2x3 column-bucketed: inner 3 vs 2
        assert!(bin_gemm(&rows, &cols).is_err());
    }
}
