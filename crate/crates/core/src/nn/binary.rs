//! Binarized feature extraction shared by the binary layers.
//!
//! The forward pass keeps both the packed form (for the XNOR kernel) and the
//! reconstructed dense form `H̃ = diag(β)·F`, `W̃ = B·diag(α)` that the
//! backward pass differentiates through.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bitlinalg::{bin_gemm, binarize_columns, binarize_rows, DenseMatrix, PackedBinMatrix};
use crate::error::{Error, Result};

/// Which quantity the straight-through indicator `1{|r| < 1}` tests when
/// gradients pass back through the feature binarization.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum SteMode {
    /// Gate on the magnitude of the incoming gradient itself.
    #[default]
    #[serde(rename = "grad")]
    GradientMagnitude,
    /// Gate on the magnitude of the pre-binarization input.
    #[serde(rename = "input")]
    InputMagnitude,
}

#[inline]
pub(crate) fn ste_pass(r: f64) -> bool {
    r.abs() < 1.0
}

/// Inverted-dropout mask: every entry is either `0` or `1 / (1 − p)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DropoutMask {
    scale: DenseMatrix,
}

impl DropoutMask {
    pub fn sample<R: Rng + ?Sized>(
        rows: usize,
        cols: usize,
        rate: f64,
        rng: &mut R,
    ) -> Result<Self> {
        if !(0.0..1.0).contains(&rate) {
            return Err(Error::invalid(format!(
                "dropout rate {rate} outside [0, 1)"
            )));
        }
        let keep = 1.0 / (1.0 - rate);
        let scale = DenseMatrix::from_fn(rows, cols, |_, _| {
            if rng.random::<f64>() < rate {
                0.0
            } else {
                keep
            }
        });
        Ok(Self { scale })
    }

    /// Wraps an explicit scale matrix (entries must be nonnegative).
    pub fn from_scale(scale: DenseMatrix) -> Result<Self> {
        if scale.as_slice().iter().any(|&s| s < 0.0) {
            return Err(Error::invalid("dropout scale must be nonnegative"));
        }
        Ok(Self { scale })
    }

    pub fn scale(&self) -> &DenseMatrix {
        &self.scale
    }

    pub(crate) fn apply(&self, m: &DenseMatrix) -> Result<DenseMatrix> {
        m.hadamard(&self.scale)
    }
}

/// Forward mode of a layer.
#[derive(Clone, Debug, Default)]
pub enum Phase {
    /// Packed XNOR/popcount kernel, no dropout.
    #[default]
    Inference,
    /// Float simulation on reconstructed matrices, optional dropout on `H̃`.
    Training { dropout: Option<DropoutMask> },
}

impl Phase {
    pub fn training() -> Self {
        Phase::Training { dropout: None }
    }

    pub fn is_training(&self) -> bool {
        matches!(self, Phase::Training { .. })
    }
}

/// A binarized layer input: `F`, `β`, the raw input and the (possibly
/// dropped-out) reconstruction `H̃`.
#[derive(Clone, Debug)]
pub struct BinarizedInput {
    pub input: DenseMatrix,
    pub packed: PackedBinMatrix,
    pub reconstructed: DenseMatrix,
    pub dropout: Option<DropoutMask>,
}

impl BinarizedInput {
    pub fn new(input: &DenseMatrix, dropout: Option<DropoutMask>) -> Result<Self> {
        let packed = binarize_rows(input)?;
        let mut reconstructed = packed.reconstruct();
        if let Some(mask) = &dropout {
            if mask.scale.shape() != input.shape() {
                return Err(Error::shape(
                    "dropout mask",
                    format!("{:?}", input.shape()),
                    format!("{:?}", mask.scale.shape()),
                ));
            }
            reconstructed = mask.apply(&reconstructed)?;
        }
        Ok(Self {
            input: input.clone(),
            packed,
            reconstructed,
            dropout,
        })
    }

    /// Gradient w.r.t. the raw input given `∂L/∂H̃` (of the dropped-out
    /// reconstruction).
    pub fn input_grad(
        &self,
        grad_reconstructed: &DenseMatrix,
        ste: SteMode,
    ) -> Result<DenseMatrix> {
        let mut g = match &self.dropout {
            Some(mask) => mask.apply(grad_reconstructed)?,
            None => grad_reconstructed.clone(),
        };
        if g.shape() != self.input.shape() {
            return Err(Error::shape(
                "input_grad",
                format!("{:?}", self.input.shape()),
                format!("{:?}", g.shape()),
            ));
        }
        match ste {
            SteMode::GradientMagnitude => {
                for x in g.as_mut_slice() {
                    if !ste_pass(*x) {
                        *x = 0.0;
                    }
                }
            }
            SteMode::InputMagnitude => {
                for (x, h) in g.as_mut_slice().iter_mut().zip(self.input.as_slice()) {
                    if !ste_pass(*h) {
                        *x = 0.0;
                    }
                }
            }
        }
        Ok(g)
    }
}

/// Binarized weights: `B`, `α`, a copy of the latent weights and `W̃`.
#[derive(Clone, Debug)]
pub struct BinarizedWeights {
    pub latent: DenseMatrix,
    pub packed: PackedBinMatrix,
    pub reconstructed: DenseMatrix,
}

impl BinarizedWeights {
    pub fn new(latent: &DenseMatrix) -> Result<Self> {
        let packed = binarize_columns(latent)?;
        let reconstructed = packed.reconstruct();
        Ok(Self {
            latent: latent.clone(),
            packed,
            reconstructed,
        })
    }

    /// Gradient w.r.t. the latent weights given `∂L/∂W̃`:
    ///
    /// `∂L/∂W_ij = (1/d_in)·B_ij·Σ_k ∂L/∂W̃_kj·B_kj + α_j·∂L/∂W̃_ij·1{|W_ij| < 1}`.
    pub fn latent_grad(&self, grad_reconstructed: &DenseMatrix) -> Result<DenseMatrix> {
        let (d_in, d_out) = self.latent.shape();
        if grad_reconstructed.shape() != (d_in, d_out) {
            return Err(Error::shape(
                "latent_grad",
                format!("{d_in}x{d_out}"),
                format!("{:?}", grad_reconstructed.shape()),
            ));
        }
        let alpha = self.packed.scalars();
        let signs = self.packed.signs();
        let mut col_dot = vec![0.0; d_out];
        for k in 0..d_in {
            for (acc, (g, b)) in col_dot
                .iter_mut()
                .zip(grad_reconstructed.row(k).iter().zip(signs.row(k)))
            {
                *acc += g * b;
            }
        }
        let inv = 1.0 / d_in as f64;
        Ok(DenseMatrix::from_fn(d_in, d_out, |i, j| {
            let b = signs.get(i, j);
            let mut g = inv * b * col_dot[j];
            if ste_pass(self.latent.get(i, j)) {
                g += alpha[j] * grad_reconstructed.get(i, j);
            }
            g
        }))
    }
}

/// `ζ = H̃·W̃`, via the packed kernel in inference and the float
/// reconstruction in training.
pub(crate) fn project(
    input: &BinarizedInput,
    weights: &BinarizedWeights,
    training: bool,
) -> Result<DenseMatrix> {
    if training {
        input.reconstructed.matmul(&weights.reconstructed)
    } else {
        bin_gemm(&input.packed, &weights.packed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn dropout_mask_values() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let m = DropoutMask::sample(20, 30, 0.4, &mut rng).unwrap();
        let kept = m.scale().as_slice().iter().filter(|&&s| s > 0.0).count();
        assert!(m
            .scale()
            .as_slice()
            .iter()
            .all(|&s| s == 0.0 || (s - 1.0 / 0.6).abs() < 1e-15));
        assert!((300..=420).contains(&kept), "kept {kept} of 600");
        assert!(DropoutMask::sample(1, 1, 1.0, &mut rng).is_err());
        assert!(DropoutMask::sample(1, 1, -0.1, &mut rng).is_err());
    }

    #[test]
    fn gradient_magnitude_gate_kills_large_entries() {
        let h = DenseMatrix::from_rows(&[vec![0.2, -3.0]]).unwrap();
        let bin = BinarizedInput::new(&h, None).unwrap();
        let g = DenseMatrix::from_rows(&[vec![1.5, 0.5]]).unwrap();
        let out = bin.input_grad(&g, SteMode::GradientMagnitude).unwrap();
        assert_eq!(out.as_slice(), &[0.0, 0.5]);
        let out = bin.input_grad(&g, SteMode::InputMagnitude).unwrap();
        assert_eq!(out.as_slice(), &[1.5, 0.0]);
    }

    #[test]
    fn latent_grad_zero_for_zero_upstream() {
        let w = DenseMatrix::from_rows(&[vec![0.3, -0.2], vec![-0.7, 0.1]]).unwrap();
        let bw = BinarizedWeights::new(&w).unwrap();
        let g = bw.latent_grad(&DenseMatrix::zeros(2, 2)).unwrap();
        assert!(g.as_slice().iter().all(|&x| x == 0.0));
    }
}
