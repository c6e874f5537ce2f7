//! Scalar references, random instance generators and the finite-difference
//! driver shared by the integration tests. The references use plain nested
//! loops and never call into the library's numerics.

#![allow(dead_code)]

use bigcn::bitlinalg::DenseMatrix;
use bigcn::graph::{AttributedGraph, Masks};
use rand::Rng;

pub type Mat = Vec<Vec<f64>>;

pub fn to_mat(m: &DenseMatrix) -> Mat {
    (0..m.rows()).map(|r| m.row(r).to_vec()).collect()
}

pub fn from_mat(m: &Mat) -> DenseMatrix {
    DenseMatrix::from_rows(m).unwrap()
}

pub fn random_mat<R: Rng>(rng: &mut R, rows: usize, cols: usize, scale: f64) -> Mat {
    (0..rows)
        .map(|_| (0..cols).map(|_| rng.random_range(-scale..scale)).collect())
        .collect()
}

fn sgn(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

pub fn random_edges<R: Rng>(rng: &mut R, n: usize, p: f64) -> Vec<(usize, usize)> {
    let mut e = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random::<f64>() < p {
                e.push((u, v));
            }
        }
    }
    e
}

/// Graph with the given features, random labels and every node in train.
pub fn graph_with<R: Rng>(
    rng: &mut R,
    x: &Mat,
    edges: &[(usize, usize)],
    classes: usize,
) -> AttributedGraph {
    let n = x.len();
    let labels = (0..n).map(|_| rng.random_range(0..classes)).collect();
    let masks = Masks::new(vec![true; n], vec![false; n], vec![false; n]).unwrap();
    AttributedGraph::new(from_mat(x), edges.iter().copied(), labels, classes, masks).unwrap()
}

/// `D̂^{-1/2} (A + I) D̂^{-1/2}` as a dense matrix.
pub fn dense_norm_adj(n: usize, edges: &[(usize, usize)]) -> Mat {
    let mut a = vec![vec![0.0; n]; n];
    for (i, row) in a.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for &(u, v) in edges {
        if u != v {
            a[u][v] = 1.0;
            a[v][u] = 1.0;
        }
    }
    let deg: Vec<f64> = a.iter().map(|r| r.iter().sum()).collect();
    for i in 0..n {
        for j in 0..n {
            a[i][j] /= (deg[i] * deg[j]).sqrt();
        }
    }
    a
}

/// Row scales `mean_j |x_ij|` and signs.
pub fn row_scale_sign(x: &Mat) -> (Vec<f64>, Mat) {
    let beta = x
        .iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>() / r.len() as f64)
        .collect();
    let s = x
        .iter()
        .map(|r| r.iter().map(|&v| sgn(v)).collect())
        .collect();
    (beta, s)
}

/// Column scales `mean_i |w_ij|` and signs.
pub fn col_scale_sign(w: &Mat) -> (Vec<f64>, Mat) {
    let (d_in, d_out) = (w.len(), w[0].len());
    let alpha = (0..d_out)
        .map(|j| (0..d_in).map(|i| w[i][j].abs()).sum::<f64>() / d_in as f64)
        .collect();
    let s = w
        .iter()
        .map(|r| r.iter().map(|&v| sgn(v)).collect())
        .collect();
    (alpha, s)
}

/// `ζ_ij = Σ_k β_i F_ik · α_j B_kj` by explicit loops.
pub fn scalar_bin_product(x: &Mat, w: &Mat) -> Mat {
    let (beta, f) = row_scale_sign(x);
    let (alpha, b) = col_scale_sign(w);
    let (n, k, m) = (x.len(), w.len(), w[0].len());
    let mut z = vec![vec![0.0; m]; n];
    for i in 0..n {
        for j in 0..m {
            let mut acc = 0.0;
            for p in 0..k {
                acc += (beta[i] * f[i][p]) * (alpha[j] * b[p][j]);
            }
            z[i][j] = acc;
        }
    }
    z
}

/// Smallest `‖v − a·s‖²` over all sign patterns `s` with the optimal
/// nonnegative scale `a = max(0, s·v / t)`.
pub fn exhaustive_min_sq_error(v: &[f64]) -> f64 {
    let t = v.len();
    let mut best = f64::INFINITY;
    for pattern in 0u32..(1 << t) {
        let s: Vec<f64> = (0..t)
            .map(|i| if pattern >> i & 1 == 1 { 1.0 } else { -1.0 })
            .collect();
        let a = (s.iter().zip(v).map(|(s, v)| s * v).sum::<f64>() / t as f64).max(0.0);
        let err: f64 = v.iter().zip(&s).map(|(v, s)| (v - a * s).powi(2)).sum();
        best = best.min(err);
    }
    best
}

pub struct BackwardRef {
    pub out: Mat,
    pub grad_in: Mat,
    pub grad_w: Mat,
}

/// Forward and backward of one binarized graph convolution in the training
/// (float-simulation) mode, computed entry by entry.
///
/// `mask` holds the inverted-dropout scale applied to `H̃`. `gate_on_input`
/// selects the straight-through indicator on the raw input instead of on the
/// incoming gradient.
pub fn scalar_bigcn(
    x: &Mat,
    w: &Mat,
    edges: &[(usize, usize)],
    mask: &Mat,
    gate_on_input: bool,
    grad_out: &Mat,
) -> BackwardRef {
    let (n, d_in, d_out) = (x.len(), w.len(), w[0].len());
    let a = dense_norm_adj(n, edges);
    let (beta, f) = row_scale_sign(x);
    let (alpha, b) = col_scale_sign(w);
    let ht: Mat = (0..n)
        .map(|i| (0..d_in).map(|k| beta[i] * f[i][k] * mask[i][k]).collect())
        .collect();
    let wt: Mat = (0..d_in)
        .map(|k| (0..d_out).map(|j| alpha[j] * b[k][j]).collect())
        .collect();

    let mut zeta = vec![vec![0.0; d_out]; n];
    for i in 0..n {
        for j in 0..d_out {
            for k in 0..d_in {
                zeta[i][j] += ht[i][k] * wt[k][j];
            }
        }
    }
    let mut out = vec![vec![0.0; d_out]; n];
    for i in 0..n {
        for j in 0..d_out {
            for p in 0..n {
                out[i][j] += a[i][p] * zeta[p][j];
            }
        }
    }

    // ∂L/∂ζ = Ãᵀ ∂L/∂out (transpose taken explicitly).
    let mut gz = vec![vec![0.0; d_out]; n];
    for p in 0..n {
        for j in 0..d_out {
            for i in 0..n {
                gz[p][j] += a[i][p] * grad_out[i][j];
            }
        }
    }
    let mut gwt = vec![vec![0.0; d_out]; d_in];
    for k in 0..d_in {
        for j in 0..d_out {
            for i in 0..n {
                gwt[k][j] += ht[i][k] * gz[i][j];
            }
        }
    }
    let mut ght = vec![vec![0.0; d_in]; n];
    for i in 0..n {
        for k in 0..d_in {
            for j in 0..d_out {
                ght[i][k] += gz[i][j] * wt[k][j];
            }
        }
    }

    let mut grad_in = vec![vec![0.0; d_in]; n];
    for i in 0..n {
        for k in 0..d_in {
            let g = ght[i][k] * mask[i][k];
            let gate = if gate_on_input { x[i][k] } else { g };
            grad_in[i][k] = if gate.abs() < 1.0 { g } else { 0.0 };
        }
    }

    let mut grad_w = vec![vec![0.0; d_out]; d_in];
    for j in 0..d_out {
        let mut col = 0.0;
        for k in 0..d_in {
            col += gwt[k][j] * b[k][j];
        }
        for i in 0..d_in {
            let through_scale = b[i][j] * col / d_in as f64;
            let through_sign = if w[i][j].abs() < 1.0 {
                alpha[j] * gwt[i][j]
            } else {
                0.0
            };
            grad_w[i][j] = through_scale + through_sign;
        }
    }
    BackwardRef {
        out,
        grad_in,
        grad_w,
    }
}

pub fn max_abs_diff(a: &Mat, b: &Mat) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// `|a − n| / max(|a|, |n|)`, or the absolute difference when both are below
/// `floor`.
pub fn rel_err(analytic: f64, numeric: f64, floor: f64) -> f64 {
    let scale = analytic.abs().max(numeric.abs());
    if scale < floor {
        (analytic - numeric).abs()
    } else {
        (analytic - numeric).abs() / scale
    }
}

/// End-to-end finite-difference check of a full-precision GCN (input batch
/// norm, ReLU hidden layers, masked cross-entropy) on a random graph with
/// `n ≤ 6` nodes. Returns the largest relative error over every weight.
pub fn gcn_gradcheck<R: Rng>(rng: &mut R, n: usize, widths: &[usize], step: f64) -> f64 {
    use bigcn::nn::{masked_softmax_xent, GraphContext, LayerType, Model, ModelConfig};

    let classes = *widths.last().unwrap();
    let x = random_mat(rng, n, widths[0], 2.0);
    let edges = random_edges(rng, n, 0.5);
    let g = graph_with(rng, &x, &edges, classes);
    let ctx = GraphContext::new(&g);
    let cfg = ModelConfig {
        model: LayerType::Gcn,
        widths: widths.to_vec(),
        ..Default::default()
    };
    let model = Model::init(&cfg, rng).unwrap();

    let loss = |m: &Model| -> f64 {
        let mut m = m.clone();
        let (logits, _) = m
            .forward_train(&ctx, g.features(), 0.0, &mut rand::rng())
            .unwrap();
        masked_softmax_xent(&logits, g.labels(), &g.masks().train)
            .unwrap()
            .0
    };
    let mut m = model.clone();
    let (logits, trace) = m
        .forward_train(&ctx, g.features(), 0.0, &mut rand::rng())
        .unwrap();
    let (_, grad_logits) = masked_softmax_xent(&logits, g.labels(), &g.masks().train).unwrap();
    let grads = model.backward(&ctx, &trace, &grad_logits).unwrap();

    let mut worst: f64 = 0.0;
    assert_eq!(grads.len(), model.clone().params_mut().len());
    for (p, grad) in grads.iter().enumerate() {
        let (rows, cols) = grad.shape();
        for r in 0..rows {
            for c in 0..cols {
                let eval_at = |delta: f64| {
                    let mut mm = model.clone();
                    let w = &mut mm.params_mut()[p];
                    let v = w.get(r, c);
                    w.set(r, c, v + delta);
                    loss(&mm)
                };
                let numeric = (eval_at(step) - eval_at(-step)) / (2.0 * step);
                worst = worst.max(rel_err(grad.get(r, c), numeric, 1e-6));
            }
        }
    }
    worst
}
