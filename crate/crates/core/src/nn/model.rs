//! Stacked layers with optional batch normalization, forward/backward over a
//! whole graph, and the flat binary weight format.

use std::io::{Read, Write};

use rand::Rng;
use rand_distr::{Distribution, Uniform};

use super::bigcn::{bigcn_backward_with, bigcn_forward, BiGcnLayer, LayerCache};
use super::binary::{DropoutMask, Phase, SteMode};
use super::config::{LayerType, ModelConfig, NormPlacement};
use super::gcn::{gcn_backward, gcn_forward_cached, GcnCache, GcnLayer};
use super::norm::{
    batch_norm_backward, batch_norm_infer, batch_norm_train, BatchNorm, BatchNormCache,
};
use super::sage::{bisage_backward, bisage_forward, BiSageLayer, SageCache};
use crate::bitlinalg::DenseMatrix;
use crate::error::{Error, Result};
use crate::graph::{normalize_adjacency, AttributedGraph, MeanAggregator, NormalizedAdjacency};

/// Graph operators shared by every layer of a model.
#[derive(Clone, Debug)]
pub struct GraphContext {
    pub adj: NormalizedAdjacency,
    pub mean: MeanAggregator,
}

impl GraphContext {
    pub fn new(g: &AttributedGraph) -> Self {
        Self {
            adj: normalize_adjacency(g),
            mean: MeanAggregator::new(g),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Layer {
    Gcn(GcnLayer),
    BiGcn(BiGcnLayer),
    BiSage(BiSageLayer),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    kind: LayerType,
    widths: Vec<usize>,
    layers: Vec<Layer>,
    norms: Vec<Option<BatchNorm>>,
}

enum Cache {
    Gcn(GcnCache),
    BiGcn(LayerCache),
    BiSage(SageCache),
}

/// Everything a training forward pass leaves behind for `backward`.
pub struct ForwardTrace {
    caches: Vec<Cache>,
    norms: Vec<Option<BatchNormCache>>,
}

/// Xavier/Glorot uniform initialization.
pub fn xavier_uniform<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DenseMatrix {
    let bound = (6.0 / (rows + cols) as f64).sqrt();
    let dist = Uniform::new_inclusive(-bound, bound).expect("finite bound");
    DenseMatrix::from_fn(rows, cols, |_, _| dist.sample(rng))
}

impl Model {
    pub fn init<R: Rng + ?Sized>(config: &ModelConfig, rng: &mut R) -> Result<Self> {
        config.validate()?;
        let widths = config.widths.clone();
        let layers = widths
            .windows(2)
            .map(|w| match config.model {
                LayerType::Gcn => Layer::Gcn(GcnLayer {
                    weights: xavier_uniform(w[0], w[1], rng),
                }),
                LayerType::BiGcn => {
                    Layer::BiGcn(BiGcnLayer::new(xavier_uniform(w[0], w[1], rng), config.ste))
                }
                LayerType::BiSage => Layer::BiSage(BiSageLayer {
                    self_weights: xavier_uniform(w[0], w[1], rng),
                    neighbor_weights: xavier_uniform(w[0], w[1], rng),
                    ste: config.ste,
                }),
            })
            .collect();
        let norms = widths[..widths.len() - 1]
            .iter()
            .enumerate()
            .map(|(l, &d)| match config.norm_placement() {
                NormPlacement::EveryLayer => Some(BatchNorm::new(d)),
                NormPlacement::Input if l == 0 => Some(BatchNorm::new(d)),
                _ => None,
            })
            .collect();
        Ok(Self {
            kind: config.model,
            widths,
            layers,
            norms,
        })
    }

    pub fn kind(&self) -> LayerType {
        self.kind
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn norms(&self) -> &[Option<BatchNorm>] {
        &self.norms
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    /// Latent (or full-precision) weights in a fixed order.
    pub fn params_mut(&mut self) -> Vec<&mut DenseMatrix> {
        let mut out = Vec::new();
        for layer in &mut self.layers {
            match layer {
                Layer::Gcn(l) => out.push(&mut l.weights),
                Layer::BiGcn(l) => out.push(&mut l.weights),
                Layer::BiSage(l) => {
                    out.push(&mut l.self_weights);
                    out.push(&mut l.neighbor_weights);
                }
            }
        }
        out
    }

    fn check_input(&self, x: &DenseMatrix) -> Result<()> {
        if x.cols() != self.widths[0] {
            return Err(Error::shape(
                "model input",
                format!("{} columns", self.widths[0]),
                x.cols(),
            ));
        }
        Ok(())
    }

    /// Inference forward; returns the logits and every hidden representation
    /// (layer outputs before the last).
    pub fn forward_with_hidden(
        &self,
        ctx: &GraphContext,
        x: &DenseMatrix,
    ) -> Result<(DenseMatrix, Vec<DenseMatrix>)> {
        self.check_input(x)?;
        let last = self.layers.len() - 1;
        let mut hidden = Vec::with_capacity(last);
        let mut h = x.clone();
        for (l, layer) in self.layers.iter().enumerate() {
            if let Some(bn) = &self.norms[l] {
                h = batch_norm_infer(&h, bn);
            }
            h = match layer {
                Layer::Gcn(g) => gcn_forward_cached(&ctx.adj, &h, &g.weights, l < last, None)?.0,
                Layer::BiGcn(b) => bigcn_forward(&ctx.adj, &h, b, Phase::Inference)?.0,
                Layer::BiSage(s) => bisage_forward(&ctx.mean, &h, s, Phase::Inference)?.0,
            };
            if l < last {
                hidden.push(h.clone());
            }
        }
        Ok((h, hidden))
    }

    pub fn forward(&self, ctx: &GraphContext, x: &DenseMatrix) -> Result<DenseMatrix> {
        Ok(self.forward_with_hidden(ctx, x)?.0)
    }

    /// Training forward on the float-simulation path. Dropout masks (if
    /// `dropout > 0`) are drawn from `rng` layer by layer.
    pub fn forward_train<R: Rng + ?Sized>(
        &mut self,
        ctx: &GraphContext,
        x: &DenseMatrix,
        dropout: f64,
        rng: &mut R,
    ) -> Result<(DenseMatrix, ForwardTrace)> {
        self.check_input(x)?;
        let last = self.layers.len() - 1;
        let mut caches = Vec::with_capacity(self.layers.len());
        let mut norm_caches = Vec::with_capacity(self.layers.len());
        let mut h = x.clone();
        for (l, layer) in self.layers.iter().enumerate() {
            let norm_cache = match &mut self.norms[l] {
                Some(bn) => {
                    let (out, cache) = batch_norm_train(&h, bn);
                    h = out;
                    Some(cache)
                }
                None => None,
            };
            norm_caches.push(norm_cache);
            let mask = if dropout > 0.0 {
                Some(DropoutMask::sample(h.rows(), h.cols(), dropout, rng)?)
            } else {
                None
            };
            let (out, cache) = match layer {
                Layer::Gcn(g) => {
                    let (o, c) = gcn_forward_cached(&ctx.adj, &h, &g.weights, l < last, mask)?;
                    (o, Cache::Gcn(c))
                }
                Layer::BiGcn(b) => {
                    let (o, c) = bigcn_forward(&ctx.adj, &h, b, Phase::Training { dropout: mask })?;
                    (o, Cache::BiGcn(c))
                }
                Layer::BiSage(s) => {
                    let (o, c) =
                        bisage_forward(&ctx.mean, &h, s, Phase::Training { dropout: mask })?;
                    (o, Cache::BiSage(c))
                }
            };
            caches.push(cache);
            h = out;
        }
        Ok((
            h,
            ForwardTrace {
                caches,
                norms: norm_caches,
            },
        ))
    }

    /// Parameter gradients in [`params_mut`](Self::params_mut) order.
    pub fn backward(
        &self,
        ctx: &GraphContext,
        trace: &ForwardTrace,
        grad_logits: &DenseMatrix,
    ) -> Result<Vec<DenseMatrix>> {
        let mut per_layer: Vec<Vec<DenseMatrix>> = Vec::with_capacity(self.layers.len());
        let mut grad = grad_logits.clone();
        for l in (0..self.layers.len()).rev() {
            let want_input = l > 0;
            let (grad_in, grads) = match (&self.layers[l], &trace.caches[l]) {
                (Layer::Gcn(g), Cache::Gcn(c)) => {
                    let (gi, gw) = gcn_backward(c, &ctx.adj, &g.weights, &grad, want_input)?;
                    (gi, vec![gw])
                }
                (Layer::BiGcn(_), Cache::BiGcn(c)) => {
                    let (gi, gw) = bigcn_backward_with(c, &ctx.adj, &grad, want_input)?;
                    (gi, vec![gw])
                }
                (Layer::BiSage(_), Cache::BiSage(c)) => {
                    let g = bisage_backward(c, &ctx.mean, &grad, want_input)?;
                    (g.input, vec![g.self_weights, g.neighbor_weights])
                }
                _ => return Err(Error::invalid("trace does not belong to this model")),
            };
            per_layer.push(grads);
            if let Some(gi) = grad_in {
                grad = match &trace.norms[l] {
                    Some(cache) => batch_norm_backward(cache, &gi),
                    None => gi,
                };
            }
        }
        per_layer.reverse();
        Ok(per_layer.into_iter().flatten().collect())
    }

    /// Writes the flat weight file: magic `BGNM`, a `u32` version, the layer
    /// type and STE mode bytes, `u32` layer count, `u32` widths, then per
    /// layer a batch-norm flag byte (with running mean/variance when set) and
    /// the latent weights, all `f64` little-endian row-major.
    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(MODEL_MAGIC)?;
        w.write_all(&MODEL_VERSION.to_le_bytes())?;
        let ste = match self.layers.first() {
            Some(Layer::BiGcn(l)) => l.ste,
            Some(Layer::BiSage(l)) => l.ste,
            _ => SteMode::default(),
        };
        w.write_all(&[kind_tag(self.kind), ste_tag(ste)])?;
        w.write_all(&(self.layers.len() as u32).to_le_bytes())?;
        for &d in &self.widths {
            w.write_all(&(d as u32).to_le_bytes())?;
        }
        let put = |w: &mut W, xs: &[f64]| -> std::io::Result<()> {
            for x in xs {
                w.write_all(&x.to_le_bytes())?;
            }
            Ok(())
        };
        for (layer, norm) in self.layers.iter().zip(&self.norms) {
            match norm {
                Some(bn) => {
                    w.write_all(&[1])?;
                    put(&mut w, &bn.running_mean)?;
                    put(&mut w, &bn.running_var)?;
                }
                None => w.write_all(&[0])?,
            }
            match layer {
                Layer::Gcn(l) => put(&mut w, l.weights.as_slice())?,
                Layer::BiGcn(l) => put(&mut w, l.weights.as_slice())?,
                Layer::BiSage(l) => {
                    put(&mut w, l.self_weights.as_slice())?;
                    put(&mut w, l.neighbor_weights.as_slice())?;
                }
            }
        }
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> std::io::Result<Self> {
        let bad = |m: &str| std::io::Error::new(std::io::ErrorKind::InvalidData, m.to_string());
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MODEL_MAGIC {
            return Err(bad("not a model file (bad magic)"));
        }
        let mut u32buf = [0u8; 4];
        let mut read_u32 = |r: &mut R| -> std::io::Result<u32> {
            r.read_exact(&mut u32buf)?;
            Ok(u32::from_le_bytes(u32buf))
        };
        if read_u32(&mut r)? != MODEL_VERSION {
            return Err(bad("unsupported model file version"));
        }
        let mut tags = [0u8; 2];
        r.read_exact(&mut tags)?;
        let kind = match tags[0] {
            0 => LayerType::Gcn,
            1 => LayerType::BiGcn,
            2 => LayerType::BiSage,
            _ => return Err(bad("unknown layer type")),
        };
        let ste = match tags[1] {
            0 => SteMode::GradientMagnitude,
            1 => SteMode::InputMagnitude,
            _ => return Err(bad("unknown STE mode")),
        };
        let num_layers = read_u32(&mut r)? as usize;
        if num_layers == 0 || num_layers > 1024 {
            return Err(bad("implausible layer count"));
        }
        let widths = (0..=num_layers)
            .map(|_| read_u32(&mut r).map(|d| d as usize))
            .collect::<std::io::Result<Vec<_>>>()?;
        if widths.contains(&0) {
            return Err(bad("zero width"));
        }
        let read_f64s = |r: &mut R, n: usize| -> std::io::Result<Vec<f64>> {
            let mut buf = vec![0u8; n * 8];
            r.read_exact(&mut buf)?;
            Ok(buf
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect())
        };
        let read_matrix = |r: &mut R, rows: usize, cols: usize| -> std::io::Result<DenseMatrix> {
            DenseMatrix::from_vec(rows, cols, read_f64s(r, rows * cols)?)
                .map_err(|e| bad(&e.to_string()))
        };
        let mut layers = Vec::with_capacity(num_layers);
        let mut norms = Vec::with_capacity(num_layers);
        for w in widths.windows(2) {
            let mut flag = [0u8; 1];
            r.read_exact(&mut flag)?;
            norms.push(match flag[0] {
                0 => None,
                1 => Some(BatchNorm {
                    running_mean: read_f64s(&mut r, w[0])?,
                    running_var: read_f64s(&mut r, w[0])?,
                    initialized: true,
                }),
                _ => return Err(bad("bad batch-norm flag")),
            });
            layers.push(match kind {
                LayerType::Gcn => Layer::Gcn(GcnLayer {
                    weights: read_matrix(&mut r, w[0], w[1])?,
                }),
                LayerType::BiGcn => {
                    Layer::BiGcn(BiGcnLayer::new(read_matrix(&mut r, w[0], w[1])?, ste))
                }
                LayerType::BiSage => Layer::BiSage(BiSageLayer {
                    self_weights: read_matrix(&mut r, w[0], w[1])?,
                    neighbor_weights: read_matrix(&mut r, w[0], w[1])?,
                    ste,
                }),
            });
        }
        Ok(Self {
            kind,
            widths,
            layers,
            norms,
        })
    }
}

const MODEL_MAGIC: &[u8; 4] = b"BGNM";
const MODEL_VERSION: u32 = 1;

fn kind_tag(kind: LayerType) -> u8 {
    match kind {
        LayerType::Gcn => 0,
        LayerType::BiGcn => 1,
        LayerType::BiSage => 2,
    }
}

fn ste_tag(ste: SteMode) -> u8 {
    match ste {
        SteMode::GradientMagnitude => 0,
        SteMode::InputMagnitude => 1,
    }
}
