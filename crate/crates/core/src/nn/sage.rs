//! Binarized GraphSAGE with the mean aggregator:
//! `h_i' = W̃_θ ⊛ h̃_i + mean_{j ∈ N(i)} W̃_n ⊛ h̃_j`, no activation.
//!
//! The input is expected to be batch-normalized already. Nodes without
//! neighbors get a zero neighbor term.

use super::binary::{project, BinarizedInput, BinarizedWeights, Phase, SteMode};
use crate::bitlinalg::DenseMatrix;
use crate::error::{Error, Result};
use crate::graph::MeanAggregator;

#[derive(Clone, Debug, PartialEq)]
pub struct BiSageLayer {
    pub self_weights: DenseMatrix,
    pub neighbor_weights: DenseMatrix,
    pub ste: SteMode,
}

#[derive(Clone, Debug)]
pub struct SageCache {
    pub input: BinarizedInput,
    pub self_weights: BinarizedWeights,
    pub neighbor_weights: BinarizedWeights,
    pub ste: SteMode,
}

pub fn bisage_forward(
    agg: &MeanAggregator,
    h_in: &DenseMatrix,
    layer: &BiSageLayer,
    phase: Phase,
) -> Result<(DenseMatrix, SageCache)> {
    if layer.self_weights.shape() != layer.neighbor_weights.shape() {
        return Err(Error::shape(
            "bisage_forward",
            format!("{:?}", layer.self_weights.shape()),
            format!("{:?}", layer.neighbor_weights.shape()),
        ));
    }
    if h_in.cols() != layer.self_weights.rows() || h_in.rows() != agg.num_nodes() {
        return Err(Error::shape(
            "bisage_forward",
            format!("{}x{}", agg.num_nodes(), layer.self_weights.rows()),
            format!("{}x{}", h_in.rows(), h_in.cols()),
        ));
    }
    let training = phase.is_training();
    let dropout = match phase {
        Phase::Training { dropout } => dropout,
        Phase::Inference => None,
    };
    let input = BinarizedInput::new(h_in, dropout)?;
    let self_weights = BinarizedWeights::new(&layer.self_weights)?;
    let neighbor_weights = BinarizedWeights::new(&layer.neighbor_weights)?;
    let own = project(&input, &self_weights, training)?;
    let neigh = agg.apply(&project(&input, &neighbor_weights, training)?)?;
    Ok((
        own.add(&neigh)?,
        SageCache {
            input,
            self_weights,
            neighbor_weights,
            ste: layer.ste,
        },
    ))
}

/// Gradients of one Bi-GraphSAGE layer.
#[derive(Clone, Debug)]
pub struct SageGrads {
    pub input: Option<DenseMatrix>,
    pub self_weights: DenseMatrix,
    pub neighbor_weights: DenseMatrix,
}

pub fn bisage_backward(
    cache: &SageCache,
    agg: &MeanAggregator,
    grad_out: &DenseMatrix,
    want_input: bool,
) -> Result<SageGrads> {
    let h_tilde = &cache.input.reconstructed;
    if grad_out.rows() != h_tilde.rows() || grad_out.cols() != cache.self_weights.latent.cols() {
        return Err(Error::shape(
            "bisage_backward",
            format!("{}x{}", h_tilde.rows(), cache.self_weights.latent.cols()),
            format!("{:?}", grad_out.shape()),
        ));
    }
    let grad_neigh = agg.apply_transpose(grad_out)?;
    let self_weights = cache
        .self_weights
        .latent_grad(&h_tilde.t_matmul(grad_out)?)?;
    let neighbor_weights = cache
        .neighbor_weights
        .latent_grad(&h_tilde.t_matmul(&grad_neigh)?)?;
    let input = if want_input {
        let g = grad_out
            .matmul_t(&cache.self_weights.reconstructed)?
            .add(&grad_neigh.matmul_t(&cache.neighbor_weights.reconstructed)?)?;
        Some(cache.input.input_grad(&g, cache.ste)?)
    } else {
        None
    };
    Ok(SageGrads {
        input,
        self_weights,
        neighbor_weights,
    })
}
