//! Full-batch training with early stopping on validation loss.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::adam::{adam_step, AdamState};
use super::config::ModelConfig;
use super::loss::{masked_accuracy, masked_softmax_xent};
use super::model::{GraphContext, Model};
use crate::error::{Error, Result};
use crate::graph::AttributedGraph;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_acc: f64,
    pub val_loss: f64,
    pub val_acc: f64,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    /// Weights at the best-validation epoch (or the initial weights when no
    /// epoch ran).
    pub model: Model,
    pub trace: Vec<EpochMetrics>,
    pub best_epoch: Option<usize>,
    pub test_acc: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub train_acc: f64,
    pub val_acc: f64,
    pub test_acc: f64,
    pub val_loss: f64,
}

/// Inference-mode accuracies on the three splits.
pub fn evaluate(model: &Model, graph: &AttributedGraph, ctx: &GraphContext) -> Result<Evaluation> {
    let logits = model.forward(ctx, graph.features())?;
    let m = graph.masks();
    let labels = graph.labels();
    Ok(Evaluation {
        train_acc: masked_accuracy(&logits, labels, &m.train)?,
        val_acc: masked_accuracy(&logits, labels, &m.val)?,
        test_acc: masked_accuracy(&logits, labels, &m.test)?,
        val_loss: masked_softmax_xent(&logits, labels, &m.val)?.0,
    })
}

/// Trains `config.model` on `graph`. Deterministic for a given seed.
///
/// Empty `config.widths` are resolved to `[d, 64, C]`.
pub fn train(
    config: &ModelConfig,
    graph: &AttributedGraph,
    ctx: &GraphContext,
) -> Result<TrainOutcome> {
    let mut config = config.clone();
    config.resolve_widths(graph);
    config.validate_for(graph)?;
    let (train_n, val_n, test_n, _) = graph.masks().counts();
    if train_n == 0 || val_n == 0 || test_n == 0 {
        return Err(Error::invalid(format!(
            "train/val/test splits must be non-empty (have {train_n}/{val_n}/{test_n})"
        )));
    }
    if ctx.adj.num_nodes() != graph.num_nodes() {
        return Err(Error::shape(
            "train",
            format!("{} nodes", graph.num_nodes()),
            ctx.adj.num_nodes(),
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut model = Model::init(&config, &mut rng)?;
    let clip = (config.model.is_binary() && config.clip_latent).then_some(1.0);
    let mut adam = AdamState::default();
    let labels = graph.labels();
    let masks = graph.masks();

    let mut best = model.clone();
    let mut best_epoch = None;
    let mut best_val = f64::INFINITY;
    let mut trace = Vec::new();

    for epoch in 0..config.max_epochs {
        let (logits, fwd) = model.forward_train(ctx, graph.features(), config.dropout, &mut rng)?;
        let (train_loss, grad) = masked_softmax_xent(&logits, labels, &masks.train)?;
        let train_acc = masked_accuracy(&logits, labels, &masks.train)?;
        let grads = model.backward(ctx, &fwd, &grad)?;
        drop(fwd);
        adam_step(&mut model.params_mut(), &grads, &mut adam, config.lr, clip)?;

        let logits = model.forward(ctx, graph.features())?;
        let (val_loss, _) = masked_softmax_xent(&logits, labels, &masks.val)?;
        let val_acc = masked_accuracy(&logits, labels, &masks.val)?;
        trace.push(EpochMetrics {
            epoch,
            train_loss,
            train_acc,
            val_loss,
            val_acc,
        });
        if !val_loss.is_finite() || !train_loss.is_finite() {
            return Err(Error::invalid(format!("loss diverged at epoch {epoch}")));
        }
        if val_loss < best_val {
            best_val = val_loss;
            best_epoch = Some(epoch);
            best.clone_from(&model);
        } else if epoch - best_epoch.unwrap_or(0) >= config.patience {
            break;
        }
    }

    let test_acc = evaluate(&best, graph, ctx)?.test_acc;
    Ok(TrainOutcome {
        model: best,
        trace,
        best_epoch,
        test_acc,
    })
}
