//! Full-precision graph convolution `σ(Ã·H·W)` used as the baseline.

use super::binary::DropoutMask;
use crate::bitlinalg::DenseMatrix;
use crate::error::{Error, Result};
use crate::graph::{aggregate, NormalizedAdjacency};

#[derive(Clone, Debug, PartialEq)]
pub struct GcnLayer {
    pub weights: DenseMatrix,
}

/// `Ã·(H·W)`, followed by ReLU when `activation` is set.
pub fn gcn_forward(
    adj: &NormalizedAdjacency,
    h_in: &DenseMatrix,
    w: &DenseMatrix,
    activation: bool,
) -> Result<DenseMatrix> {
    Ok(gcn_forward_cached(adj, h_in, w, activation, None)?.0)
}

#[derive(Clone, Debug)]
pub struct GcnCache {
    /// Layer input after dropout.
    input: DenseMatrix,
    dropout: Option<DropoutMask>,
    /// Output before ReLU, kept only when the activation is on.
    pre_activation: Option<DenseMatrix>,
}

pub fn gcn_forward_cached(
    adj: &NormalizedAdjacency,
    h_in: &DenseMatrix,
    w: &DenseMatrix,
    activation: bool,
    dropout: Option<DropoutMask>,
) -> Result<(DenseMatrix, GcnCache)> {
    if h_in.rows() != adj.num_nodes() {
        return Err(Error::shape(
            "gcn_forward",
            format!("{} nodes", adj.num_nodes()),
            h_in.rows(),
        ));
    }
    let input = match &dropout {
        Some(mask) => mask.apply(h_in)?,
        None => h_in.clone(),
    };
    let out = aggregate(adj, &input.matmul(w)?)?;
    let (out, pre_activation) = if activation {
        (out.map(|x| x.max(0.0)), Some(out))
    } else {
        (out, None)
    };
    Ok((
        out,
        GcnCache {
            input,
            dropout,
            pre_activation,
        },
    ))
}

/// Returns `(∂L/∂H_in, ∂L/∂W)`; the input gradient is skipped unless `want_input`.
pub fn gcn_backward(
    cache: &GcnCache,
    adj: &NormalizedAdjacency,
    w: &DenseMatrix,
    grad_out: &DenseMatrix,
    want_input: bool,
) -> Result<(Option<DenseMatrix>, DenseMatrix)> {
    let grad = match &cache.pre_activation {
        Some(pre) => {
            let gate = pre.map(|x| if x > 0.0 { 1.0 } else { 0.0 });
            grad_out.hadamard(&gate)?
        }
        None => grad_out.clone(),
    };
    let grad_z = aggregate(adj, &grad)?;
    let grad_w = cache.input.t_matmul(&grad_z)?;
    let grad_in = if want_input {
        let g = grad_z.matmul_t(w)?;
        Some(match &cache.dropout {
            Some(mask) => mask.apply(&g)?,
            None => g,
        })
    } else {
        None
    };
    Ok((grad_in, grad_w))
}
