//! Forward and backward passes for binarized and full-precision graph
//! layers, loss, normalization, optimizer and the training loop.

mod adam;
mod bigcn;
mod binary;
mod config;
mod gcn;
mod loss;
mod model;
mod norm;
mod sage;
mod train;

pub use adam::{adam_step, AdamState};
pub use bigcn::{bigcn_backward, bigcn_backward_with, bigcn_forward, BiGcnLayer, LayerCache};
pub use binary::{BinarizedInput, BinarizedWeights, DropoutMask, Phase, SteMode};
pub use config::{LayerType, ModelConfig, NormPlacement, DEFAULT_HIDDEN};
pub use gcn::{gcn_backward, gcn_forward, gcn_forward_cached, GcnCache, GcnLayer};
pub use loss::{masked_accuracy, masked_softmax_xent};
pub use model::{xavier_uniform, ForwardTrace, GraphContext, Layer, Model};
pub use norm::{
    batch_norm_apply, batch_norm_backward, batch_norm_infer, batch_norm_train, BatchNorm,
    BatchNormCache,
};
pub use sage::{bisage_backward, bisage_forward, BiSageLayer, SageCache, SageGrads};
pub use train::{evaluate, train, EpochMetrics, Evaluation, TrainOutcome};
