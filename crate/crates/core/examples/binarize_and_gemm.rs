//! Binarizes a feature matrix row-wise and a weight matrix column-wise, runs
//! the XNOR/popcount product and checks it against the float product of the
//! reconstructed scaled-sign matrices.
//!
//! `cargo run --release --example binarize_and_gemm`

use bigcn::bitlinalg::{
    bin_gemm, binarize_columns, binarize_rows, binarize_vector, xnor_popcount_dot, BitVector,
    DenseMatrix,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // A single vector: sign bits plus the mean absolute value.
    let v = [0.9, -0.2, 0.4, -1.3, 0.0];
    let (bits, alpha) = binarize_vector(&v)?;
    println!("v = {v:?}");
    println!("signs = {:?}, alpha = {alpha}", bits.unpack());

    // XNOR/popcount dot of two sign vectors equals their ±1 inner product.
    let a = BitVector::pack(&[1, -1, 1, 1, -1, -1, 1])?;
    let b = BitVector::pack(&[1, 1, -1, 1, -1, 1, 1])?;
    println!("xnor-popcount dot = {}", xnor_popcount_dot(&a, &b)?);

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (n, k, m) = (6, 200, 4);
    let h = DenseMatrix::from_fn(n, k, |_, _| rng.random_range(-2.0..2.0));
    let w = DenseMatrix::from_fn(k, m, |_, _| rng.random_range(-1.0..1.0));
    let (hb, wb) = (binarize_rows(&h)?, binarize_columns(&w)?);
    let packed = bin_gemm(&hb, &wb)?;
    let float = hb.reconstruct().matmul(&wb.reconstruct())?;
    println!(
        "{n}x{k} · {k}x{m}: max |bin_gemm − float| = {:.2e}",
        packed.max_abs_diff(&float)
    );
    println!(
        "storage: {} bits packed vs {} bits as f32",
        hb.storage_bits() + wb.storage_bits(),
        32 * (n * k + k * m)
    );
    println!("first row of the product: {:?}", packed.row(0));
    Ok(())
}
