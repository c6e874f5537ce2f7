//! Bit-packed `±1` linear algebra: packing, sign-and-scale binarization and
//! the XNOR/popcount matrix product.

mod binarize;
mod bits;
mod dense;
mod gemm;

pub use binarize::{
    binarize_columns, binarize_rows, binarize_vector, Orientation, PackedBinMatrix,
};
pub use bits::{xnor_popcount_dot, BitVector, WORD_BITS};
pub use dense::DenseMatrix;
pub use gemm::bin_gemm;
