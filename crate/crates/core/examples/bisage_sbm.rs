//! Trains a binarized GraphSAGE model (mean aggregator, separate self and
//! neighbor weights, batch norm before every layer) on a synthetic graph,
//! once with each straight-through gate.
//!
//! `cargo run --release --example bisage_sbm`

use bigcn::data::{generate_sbm, SbmParams};
use bigcn::nn::{train, GraphContext, LayerType, ModelConfig, SteMode};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let graph = generate_sbm(&SbmParams {
        nodes_per_class: 80,
        classes: 4,
        feature_dim: 40,
        seed: 3,
        ..Default::default()
    })?;
    let ctx = GraphContext::new(&graph);
    for ste in [SteMode::GradientMagnitude, SteMode::InputMagnitude] {
        let config = ModelConfig {
            model: LayerType::BiSage,
            ste,
            lr: 0.01,
            max_epochs: 300,
            patience: 50,
            seed: 3,
            ..Default::default()
        };
        let out = train(&config, &graph, &ctx)?;
        let best = &out.trace[out.best_epoch.unwrap_or(0)];
        println!(
            "{ste:?}: best epoch {} (val loss {:.3}, val acc {:.3}), test acc {:.3}",
            best.epoch, best.val_loss, best.val_acc, out.test_acc
        );
    }
    Ok(())
}
