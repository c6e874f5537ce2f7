//! Binarized graph convolution: `H_out = Ã · (H̃ · W̃)` with no activation.

use super::binary::{project, BinarizedInput, BinarizedWeights, Phase, SteMode};
use crate::bitlinalg::DenseMatrix;
use crate::error::{Error, Result};
use crate::graph::{aggregate, NormalizedAdjacency};

/// A binarized graph-convolution layer holding full-precision latent
/// weights; the binary form is rederived on every forward pass.
#[derive(Clone, Debug, PartialEq)]
pub struct BiGcnLayer {
    pub weights: DenseMatrix,
    pub ste: SteMode,
}

impl BiGcnLayer {
    pub fn new(weights: DenseMatrix, ste: SteMode) -> Self {
        Self { weights, ste }
    }

    pub fn d_in(&self) -> usize {
        self.weights.rows()
    }

    pub fn d_out(&self) -> usize {
        self.weights.cols()
    }
}

/// Intermediates kept for the backward pass.
#[derive(Clone, Debug)]
pub struct LayerCache {
    pub input: BinarizedInput,
    pub weights: BinarizedWeights,
    pub zeta: DenseMatrix,
    pub ste: SteMode,
}

pub fn bigcn_forward(
    adj: &NormalizedAdjacency,
    h_in: &DenseMatrix,
    layer: &BiGcnLayer,
    phase: Phase,
) -> Result<(DenseMatrix, LayerCache)> {
    if h_in.cols() != layer.d_in() {
        return Err(Error::shape(
            "bigcn_forward",
            format!("{} input columns", layer.d_in()),
            h_in.cols(),
        ));
    }
    if h_in.rows() != adj.num_nodes() {
        return Err(Error::shape(
            "bigcn_forward",
            format!("{} nodes", adj.num_nodes()),
            h_in.rows(),
        ));
    }
    let training = phase.is_training();
    let dropout = match phase {
        Phase::Training { dropout } => dropout,
        Phase::Inference => None,
    };
    let input = BinarizedInput::new(h_in, dropout)?;
    let weights = BinarizedWeights::new(&layer.weights)?;
    let zeta = project(&input, &weights, training)?;
    let out = aggregate(adj, &zeta)?;
    Ok((
        out,
        LayerCache {
            input,
            weights,
            zeta,
            ste: layer.ste,
        },
    ))
}

/// Returns `(∂L/∂H_in, ∂L/∂W_latent)`.
pub fn bigcn_backward(
    cache: &LayerCache,
    adj: &NormalizedAdjacency,
    grad_out: &DenseMatrix,
) -> Result<(DenseMatrix, DenseMatrix)> {
    let (gi, gw) = bigcn_backward_with(cache, adj, grad_out, true)?;
    Ok((gi.expect("requested"), gw))
}

/// Like [`bigcn_backward`], optionally skipping the input gradient (first
/// layer of a model).
pub fn bigcn_backward_with(
    cache: &LayerCache,
    adj: &NormalizedAdjacency,
    grad_out: &DenseMatrix,
    want_input: bool,
) -> Result<(Option<DenseMatrix>, DenseMatrix)> {
    if grad_out.shape() != cache.zeta.shape() {
        return Err(Error::shape(
            "bigcn_backward",
            format!("{:?}", cache.zeta.shape()),
            format!("{:?}", grad_out.shape()),
        ));
    }
    // Ã is symmetric, so Ãᵀ·g = Ã·g.
    let grad_zeta = aggregate(adj, grad_out)?;
    let grad_w_tilde = cache.input.reconstructed.t_matmul(&grad_zeta)?;
    let grad_w = cache.weights.latent_grad(&grad_w_tilde)?;
    let grad_in = if want_input {
        let grad_h_tilde = grad_zeta.matmul_t(&cache.weights.reconstructed)?;
        Some(cache.input.input_grad(&grad_h_tilde, cache.ste)?)
    } else {
        None
    };
    Ok((grad_in, grad_w))
}
