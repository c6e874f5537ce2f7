//! Per-column standardization without learned affine parameters.

use crate::bitlinalg::DenseMatrix;

pub const BN_EPS: f64 = 1e-5;
pub const BN_MOMENTUM: f64 = 0.9;

/// Running statistics for one batch-norm site.
///
/// Running values follow `r ← momentum·r + (1 − momentum)·batch`; the first
/// training batch initializes them directly.
#[derive(Clone, Debug, PartialEq)]
pub struct BatchNorm {
    pub running_mean: Vec<f64>,
    pub running_var: Vec<f64>,
    pub initialized: bool,
}

impl BatchNorm {
    pub fn new(dim: usize) -> Self {
        Self {
            running_mean: vec![0.0; dim],
            running_var: vec![1.0; dim],
            initialized: false,
        }
    }

    pub fn dim(&self) -> usize {
        self.running_mean.len()
    }
}

#[derive(Clone, Debug)]
pub struct BatchNormCache {
    normalized: DenseMatrix,
    inv_std: Vec<f64>,
}

/// Standardizes `h` column-wise: batch statistics (and a running-statistics
/// update) in training, running statistics in inference.
pub fn batch_norm_apply(h: &DenseMatrix, training: bool, state: &mut BatchNorm) -> DenseMatrix {
    if training {
        batch_norm_train(h, state).0
    } else {
        batch_norm_infer(h, state)
    }
}

pub fn batch_norm_infer(h: &DenseMatrix, state: &BatchNorm) -> DenseMatrix {
    let inv_std: Vec<f64> = state
        .running_var
        .iter()
        .map(|v| 1.0 / (v + BN_EPS).sqrt())
        .collect();
    DenseMatrix::from_fn(h.rows(), h.cols(), |r, c| {
        (h.get(r, c) - state.running_mean[c]) * inv_std[c]
    })
}

pub fn batch_norm_train(h: &DenseMatrix, state: &mut BatchNorm) -> (DenseMatrix, BatchNormCache) {
    let (n, d) = h.shape();
    assert_eq!(d, state.dim(), "batch norm width");
    let inv_n = 1.0 / n.max(1) as f64;
    let mut mean = vec![0.0; d];
    for r in 0..n {
        for (m, x) in mean.iter_mut().zip(h.row(r)) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m *= inv_n);
    let mut var = vec![0.0; d];
    for r in 0..n {
        for ((v, x), m) in var.iter_mut().zip(h.row(r)).zip(&mean) {
            *v += (x - m) * (x - m);
        }
    }
    var.iter_mut().for_each(|v| *v *= inv_n);

    if state.initialized {
        for (r, b) in state.running_mean.iter_mut().zip(&mean) {
            *r = BN_MOMENTUM * *r + (1.0 - BN_MOMENTUM) * b;
        }
        for (r, b) in state.running_var.iter_mut().zip(&var) {
            *r = BN_MOMENTUM * *r + (1.0 - BN_MOMENTUM) * b;
        }
    } else {
        state.running_mean.clone_from(&mean);
        state.running_var.clone_from(&var);
        state.initialized = true;
    }

    let inv_std: Vec<f64> = var.iter().map(|v| 1.0 / (v + BN_EPS).sqrt()).collect();
    let normalized = DenseMatrix::from_fn(n, d, |r, c| (h.get(r, c) - mean[c]) * inv_std[c]);
    (
        normalized.clone(),
        BatchNormCache {
            normalized,
            inv_std,
        },
    )
}

/// `∂L/∂h` given `∂L/∂ĥ` for a training-mode forward.
pub fn batch_norm_backward(cache: &BatchNormCache, grad: &DenseMatrix) -> DenseMatrix {
    let (n, d) = grad.shape();
    let inv_n = 1.0 / n as f64;
    let mut mean_g = vec![0.0; d];
    let mut mean_gx = vec![0.0; d];
    for r in 0..n {
        for c in 0..d {
            let g = grad.get(r, c);
            mean_g[c] += g * inv_n;
            mean_gx[c] += g * cache.normalized.get(r, c) * inv_n;
        }
    }
    DenseMatrix::from_fn(n, d, |r, c| {
        cache.inv_std[c] * (grad.get(r, c) - mean_g[c] - cache.normalized.get(r, c) * mean_gx[c])
    })
}
